#pragma once

#include <random>
#include <vector>

#include "forgelab/data.hpp"
#include "forgelab/linalg.hpp"
#include "forgelab/nn.hpp"
#include "forgelab/rng.hpp"
#include "forgelab/trace.hpp"

namespace testutil {

using forgelab::Rng;
using forgelab::linalg::Matrix;
using forgelab::linalg::Vector;

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(rows, cols);
    for (double& v : m.data()) v = dist(rng);
    return m;
}

inline Vector random_vector(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Vector v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

inline Vector one_hot(std::size_t n, std::size_t index) {
    Vector y(n, 0.0);
    y[index] = 1.0;
    return y;
}

// Parameters with uniform [-1, 1] entries (incl. biases), for oracle tests.
inline forgelab::nn::FcnParams random_params(Rng& rng, const std::vector<std::size_t>& dims,
                                             forgelab::nn::Activation act) {
    forgelab::nn::FcnParams p;
    p.activation = act;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        p.weights.push_back(random_matrix(rng, dims[i], dims[i + 1]));
        p.biases.push_back(random_vector(rng, dims[i + 1]));
    }
    return p;
}

// Independent numeric-rank oracle: row reduction with partial pivoting.
inline std::size_t brute_rank(Matrix m, double tol = 1e-9) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t pivot = rank;
        for (std::size_t r = rank + 1; r < rows; ++r) {
            if (std::fabs(m(r, c)) > std::fabs(m(pivot, c))) pivot = r;
        }
        if (std::fabs(m(pivot, c)) <= tol) continue;
        for (std::size_t j = 0; j < cols; ++j) std::swap(m(rank, j), m(pivot, j));
        for (std::size_t r = rank + 1; r < rows; ++r) {
            const double f = m(r, c) / m(rank, c);
            for (std::size_t j = c; j < cols; ++j) m(r, j) -= f * m(rank, j);
        }
        ++rank;
    }
    return rank;
}

// Central-difference gradient of the single-example loss, one entry at a time.
inline forgelab::nn::Gradient finite_difference_gradient(const forgelab::nn::FcnParams& params,
                                                         const Vector& x, const Vector& y,
                                                         double h = 1e-6) {
    namespace nn = forgelab::nn;
    nn::Gradient g;
    nn::FcnParams probe = params;
    for (std::size_t layer = 0; layer < params.weights.size(); ++layer) {
        Matrix dw(params.weights[layer].rows(), params.weights[layer].cols());
        for (std::size_t t = 0; t < dw.size(); ++t) {
            const double keep = probe.weights[layer].data()[t];
            probe.weights[layer].data()[t] = keep + h;
            const double up = nn::example_loss(probe, x, y);
            probe.weights[layer].data()[t] = keep - h;
            const double down = nn::example_loss(probe, x, y);
            probe.weights[layer].data()[t] = keep;
            dw.data()[t] = (up - down) / (2.0 * h);
        }
        g.d_weights.push_back(std::move(dw));
        Vector db(params.biases[layer].size());
        for (std::size_t t = 0; t < db.size(); ++t) {
            const double keep = probe.biases[layer][t];
            probe.biases[layer][t] = keep + h;
            const double up = nn::example_loss(probe, x, y);
            probe.biases[layer][t] = keep - h;
            const double down = nn::example_loss(probe, x, y);
            probe.biases[layer][t] = keep;
            db[t] = (up - down) / (2.0 * h);
        }
        g.d_biases.push_back(std::move(db));
    }
    return g;
}

// True when some pre-activation sits within `margin` of a ReLU kink.
inline bool near_kink(const forgelab::nn::FcnParams& params, const Vector& x,
                      double margin = 1e-4) {
    const auto cache = forgelab::nn::forward(params, Matrix::from_column(x));
    for (std::size_t i = 0; i + 1 < params.weights.size() + 1; ++i) {
        if (i + 1 == params.weights.size()) break;  // output layer has no kink
        for (double z : cache.pre_activations[i].data()) {
            if (std::fabs(z) < margin) return true;
        }
    }
    return false;
}

inline forgelab::data::MiniBatch random_batch(Rng& rng, std::size_t d, std::size_t n,
                                              std::size_t b, bool one_hot_labels = true) {
    forgelab::data::MiniBatch batch;
    batch.x = random_matrix(rng, d, b);
    batch.y = Matrix(n, b);
    if (one_hot_labels) {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t k = 0; k < b; ++k) batch.y(pick(rng), k) = 1.0;
    } else {
        batch.y = random_matrix(rng, n, b, -2.0, 2.0);
    }
    return batch;
}

}  // namespace testutil
