#include "forgelab/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace forgelab::nn {

namespace {

double activate(double z, Activation act) {
    return act == Activation::relu ? (z > 0.0 ? z : 0.0) : z;
}

// ReLU derivative at exactly 0 is taken as 0 (subgradient choice).
double activate_prime(double z, Activation act) {
    return act == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

Matrix softmax_columns(const Matrix& z) {
    Matrix p(z.rows(), z.cols());
    for (std::size_t k = 0; k < z.cols(); ++k) {
        double m = z(0, k);
        for (std::size_t i = 1; i < z.rows(); ++i) m = std::max(m, z(i, k));
        double total = 0.0;
        for (std::size_t i = 0; i < z.rows(); ++i) {
            const double e = std::exp(z(i, k) - m);
            p(i, k) = e;
            total += e;
        }
        for (std::size_t i = 0; i < z.rows(); ++i) p(i, k) /= total;
    }
    return p;
}

void check_batch(const FcnParams& params, const MiniBatch& batch) {
    batch.validate();
    if (batch.input_dim() != params.weights.front().rows()) {
        throw std::invalid_argument("nn: input dimension mismatch");
    }
    if (batch.class_count() != params.weights.back().cols()) {
        throw std::invalid_argument("nn: class count mismatch");
    }
}

// D_L row k = v_k * yhat^(k) - y^(k); D_i = (D_{i+1} W_{i+1}^T) o H_i.
std::vector<Matrix> errors_from_cache(const FcnParams& params, const ForwardCache& cache,
                                      const Matrix& y) {
    const std::size_t layers = params.depth();
    const std::size_t b = y.cols();
    const std::size_t n = y.rows();
    std::vector<Matrix> errors(layers);
    const Matrix& p = cache.probabilities;
    Matrix d_last(b, n);
    for (std::size_t k = 0; k < b; ++k) {
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) v += y(i, k);
        for (std::size_t i = 0; i < n; ++i) d_last(k, i) = v * p(i, k) - y(i, k);
    }
    errors[layers - 1] = std::move(d_last);
    for (std::size_t i = layers - 1; i-- > 0;) {
        Matrix d = errors[i + 1] * params.weights[i + 1].transposed();  // b x d_i
        const Matrix& z = cache.pre_activations[i];                     // d_i x b
        for (std::size_t k = 0; k < b; ++k)
            for (std::size_t j = 0; j < d.cols(); ++j)
                d(k, j) *= activate_prime(z(j, k), params.activation);
        errors[i] = std::move(d);
    }
    return errors;
}

}  // namespace

void FcnArchitecture::validate() const {
    if (layer_dims.size() < 2) throw std::invalid_argument("architecture: need L >= 1");
    for (std::size_t d : layer_dims) {
        if (d < 1) throw std::invalid_argument("architecture: dims must be >= 1");
    }
}

FcnArchitecture FcnParams::arch() const {
    FcnArchitecture a;
    a.activation = activation;
    a.layer_dims.push_back(weights.front().rows());
    for (const Matrix& w : weights) a.layer_dims.push_back(w.cols());
    return a;
}

void FcnParams::validate() const {
    if (weights.empty() || weights.size() != biases.size()) {
        throw std::invalid_argument("params: weights/biases layer mismatch");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (biases[i].size() != weights[i].cols()) {
            throw std::invalid_argument("params: bias length mismatch");
        }
        if (i + 1 < weights.size() && weights[i].cols() != weights[i + 1].rows()) {
            throw std::invalid_argument("params: consecutive layer shape mismatch");
        }
        if (!weights[i].all_finite()) {
            throw std::invalid_argument("params: entries must be finite");
        }
    }
}

ForwardCache forward(const FcnParams& params, const Matrix& x) {
    if (x.rows() != params.weights.front().rows() || x.cols() == 0) {
        throw std::invalid_argument("forward: input shape mismatch");
    }
    const std::size_t layers = params.depth();
    const std::size_t b = x.cols();
    ForwardCache cache;
    cache.activations.reserve(layers);
    cache.pre_activations.reserve(layers);
    cache.activations.push_back(x);
    for (std::size_t i = 0; i < layers; ++i) {
        const Matrix& w = params.weights[i];
        const Vector& bias = params.biases[i];
        Matrix z = w.transposed() * cache.activations.back();
        for (std::size_t r = 0; r < z.rows(); ++r)
            for (std::size_t k = 0; k < b; ++k) z(r, k) += bias[r];
        cache.pre_activations.push_back(z);
        if (i + 1 < layers) {
            Matrix a(z.rows(), z.cols());
            for (std::size_t t = 0; t < z.size(); ++t) {
                a.data()[t] = activate(z.data()[t], params.activation);
            }
            cache.activations.push_back(std::move(a));
        }
    }
    cache.probabilities = softmax_columns(cache.pre_activations.back());
    return cache;
}

double loss(const ForwardCache& cache, const Matrix& y) {
    const Matrix& p = cache.probabilities;
    if (p.rows() != y.rows() || p.cols() != y.cols()) {
        throw std::invalid_argument("loss: label shape mismatch");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < y.cols(); ++k) {
        for (std::size_t i = 0; i < y.rows(); ++i) {
            total -= y(i, k) * std::log(std::max(p(i, k), 1e-300));
        }
    }
    return total / static_cast<double>(y.cols());
}

double example_loss(const FcnParams& params, const Vector& x, const Vector& y) {
    return loss(forward(params, Matrix::from_column(x)), Matrix::from_column(y));
}

std::vector<Matrix> error_matrices(const FcnParams& params, const MiniBatch& batch) {
    check_batch(params, batch);
    const ForwardCache cache = forward(params, batch.x);
    return errors_from_cache(params, cache, batch.y);
}

Gradient grad_batch(const FcnParams& params, const MiniBatch& batch) {
    check_batch(params, batch);
    const std::size_t layers = params.depth();
    const std::size_t b = batch.batch_size();
    const double inv_b = 1.0 / static_cast<double>(b);
    const ForwardCache cache = forward(params, batch.x);
    const std::vector<Matrix> errors = errors_from_cache(params, cache, batch.y);

    Gradient g;
    g.d_weights.reserve(layers);
    g.d_biases.reserve(layers);
    for (std::size_t i = 0; i < layers; ++i) {
        g.d_weights.push_back((cache.activations[i] * errors[i]).scaled(inv_b));
        Vector db(errors[i].cols(), 0.0);
        for (std::size_t k = 0; k < b; ++k)
            for (std::size_t j = 0; j < db.size(); ++j) db[j] += errors[i](k, j);
        for (double& v : db) v *= inv_b;
        g.d_biases.push_back(std::move(db));
    }
    return g;
}

Gradient grad_example(const FcnParams& params, const Vector& x, const Vector& y) {
    MiniBatch single;
    single.x = Matrix::from_column(x);
    single.y = Matrix::from_column(y);
    return grad_batch(params, single);
}

Vector flatten(const Gradient& g) {
    Vector flat;
    for (std::size_t i = 0; i < g.d_weights.size(); ++i) {
        const Vector& w = g.d_weights[i].data();
        flat.insert(flat.end(), w.begin(), w.end());
        flat.insert(flat.end(), g.d_biases[i].begin(), g.d_biases[i].end());
    }
    return flat;
}

Vector flatten(const FcnParams& params) {
    Vector flat;
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        const Vector& w = params.weights[i].data();
        flat.insert(flat.end(), w.begin(), w.end());
        flat.insert(flat.end(), params.biases[i].begin(), params.biases[i].end());
    }
    return flat;
}

Gradient unflatten_gradient(const FcnParams& shape_like, const Vector& flat) {
    if (flat.size() != param_count(shape_like)) {
        throw std::invalid_argument("unflatten: length mismatch");
    }
    Gradient g;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < shape_like.weights.size(); ++i) {
        const std::size_t wn = shape_like.weights[i].size();
        g.d_weights.emplace_back(shape_like.weights[i].rows(), shape_like.weights[i].cols(),
                                 Vector(flat.begin() + pos, flat.begin() + pos + wn));
        pos += wn;
        const std::size_t bn = shape_like.biases[i].size();
        g.d_biases.emplace_back(flat.begin() + pos, flat.begin() + pos + bn);
        pos += bn;
    }
    return g;
}

std::size_t param_count(const FcnParams& params) {
    std::size_t total = 0;
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        total += params.weights[i].size() + params.biases[i].size();
    }
    return total;
}

namespace {

double sq_distance(const Vector& a, const Vector& b, const char* what) {
    if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

double l2_distance(const Gradient& a, const Gradient& b) {
    if (a.d_weights.size() != b.d_weights.size()) {
        throw std::invalid_argument("l2_distance: layer count mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.d_weights.size(); ++i) {
        acc += sq_distance(a.d_weights[i].data(), b.d_weights[i].data(), "l2_distance");
        acc += sq_distance(a.d_biases[i], b.d_biases[i], "l2_distance");
    }
    return std::sqrt(acc);
}

double l2_distance(const FcnParams& a, const FcnParams& b) {
    if (a.weights.size() != b.weights.size()) {
        throw std::invalid_argument("l2_distance: layer count mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.weights.size(); ++i) {
        acc += sq_distance(a.weights[i].data(), b.weights[i].data(), "l2_distance");
        acc += sq_distance(a.biases[i], b.biases[i], "l2_distance");
    }
    return std::sqrt(acc);
}

InversionResult invert_single_example(const Gradient& g) {
    const Vector& delta = g.d_biases.front();
    const double nsq = linalg::dot(delta, delta);
    InversionResult out;
    out.delta = delta;
    if (std::sqrt(nsq) <= 1e-12) {
        out.degenerate = true;
        return out;
    }
    out.degenerate = false;
    out.x = g.d_weights.front() * delta;
    for (double& v : out.x) v /= nsq;
    return out;
}

}  // namespace forgelab::nn
