#include "forgelab/exact.hpp"

#include <gmp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

namespace forgelab::exact {

namespace {

using data::MiniBatch;
using linalg::Matrix;
using linalg::Tolerance;
using linalg::Vector;

// ---------------------------------------------------------------- big ints

// Minimal RAII shim over mpz_t; only what the combinatorics below need.
class Big {
public:
    Big() { mpz_init(z_); }
    explicit Big(unsigned long v) { mpz_init_set_ui(z_, v); }
    Big(const Big& o) { mpz_init_set(z_, o.z_); }
    Big& operator=(const Big& o) {
        if (this != &o) mpz_set(z_, o.z_);
        return *this;
    }
    ~Big() { mpz_clear(z_); }

    mpz_t& raw() { return z_; }
    const mpz_t& raw() const { return z_; }

    bool fits_u64() const { return mpz_fits_ulong_p(z_); }
    std::uint64_t to_u64() const { return mpz_get_ui(z_); }
    std::string to_string() const {
        char* s = mpz_get_str(nullptr, 10, z_);
        std::string out(s);
        std::free(s);
        return out;
    }

private:
    mpz_t z_;
};

Big binomial(unsigned long n, unsigned long k) {
    Big out;
    mpz_bin_uiui(out.raw(), n, k);
    return out;
}

// ------------------------------------------------------------ the universe

// Enumerable grid domain {q/(v-1)}^d x one-hot(n). Example id e encodes the
// label in its least significant factor (e = pixel_code * n + class) and the
// pixel pattern as base-v digits of pixel_code.
struct Universe {
    std::size_t d, n, v;

    std::uint64_t count() const {
        std::uint64_t pixels = 1;
        for (std::size_t i = 0; i < d; ++i) {
            if (pixels > std::numeric_limits<std::uint64_t>::max() / v) {
                throw std::overflow_error("brute force: v^d overflows");
            }
            pixels *= v;
        }
        if (pixels > std::numeric_limits<std::uint64_t>::max() / n) {
            throw std::overflow_error("brute force: v^d * n overflows");
        }
        return pixels * n;
    }

    data::Example example(std::uint64_t id) const {
        data::Example e;
        const std::size_t label = id % n;
        std::uint64_t code = id / n;
        e.x.resize(d);
        const double span = static_cast<double>(v - 1);
        for (std::size_t j = 0; j < d; ++j) {
            e.x[j] = static_cast<double>(code % v) / span;
            code /= v;
        }
        e.y.assign(n, 0.0);
        e.y[label] = 1.0;
        return e;
    }
};

// --------------------------------------------- lexicographic combinations

bool next_combination(std::vector<std::uint64_t>& c, std::uint64_t universe) {
    const std::size_t b = c.size();
    std::size_t i = b;
    while (i-- > 0) {
        if (c[i] + 1 <= universe - (b - i)) {
            ++c[i];
            for (std::size_t j = i + 1; j < b; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

Big combination_rank(std::uint64_t universe, const std::vector<std::uint64_t>& comb) {
    Big rank;
    std::uint64_t prev = 0;
    for (std::size_t i = 0; i < comb.size(); ++i) {
        for (std::uint64_t x = prev; x < comb[i]; ++x) {
            Big term = binomial(universe - 1 - x, comb.size() - 1 - i);
            mpz_add(rank.raw(), rank.raw(), term.raw());
        }
        prev = comb[i] + 1;
    }
    return rank;
}

std::vector<std::uint64_t> unrank_combination(std::uint64_t universe, std::size_t b, Big rank) {
    std::vector<std::uint64_t> comb(b);
    std::uint64_t x = 0;
    for (std::size_t i = 0; i < b; ++i) {
        for (;;) {
            Big skip = binomial(universe - 1 - x, b - 1 - i);
            if (mpz_cmp(rank.raw(), skip.raw()) < 0) break;
            mpz_sub(rank.raw(), rank.raw(), skip.raw());
            ++x;
        }
        comb[i] = x++;
    }
    return comb;
}

// ---------------------------------------------------------------- helpers

Matrix softmax_of(const nn::FcnParams& model, const Matrix& x) {
    return nn::forward(model, x).probabilities;
}

nn::FcnParams single_layer_model(const Matrix& w) {
    nn::FcnParams model;
    model.weights.push_back(w);
    model.biases.emplace_back(w.cols(), 0.0);
    model.activation = nn::Activation::identity;
    return model;
}

double weight_grad_distance(const nn::FcnParams& model, const MiniBatch& a, const MiniBatch& b) {
    const Matrix da = nn::grad_batch(model, a).d_weights[0];
    const Matrix db = nn::grad_batch(model, b).d_weights[0];
    return (da - db).frobenius_norm();
}

}  // namespace

bool feasibility(std::size_t d, std::size_t d1, std::size_t b) {
    return d * b > d1 * (d + b);
}

bool factored_feasibility(std::size_t d, std::size_t d1, std::size_t b) {
    return d > d1 && b > d1;
}

Vector PerturbationBasis::column(std::size_t idx) const {
    if (idx >= k_rank) throw std::out_of_range("basis: column index out of range");
    if (method == BasisMethod::stacked_kron) return basis_vectors.col(idx);
    // basis vector (i, j) is vec(n_i c_j^T) = c_j (x) n_i
    const std::size_t r1 = null_w.cols();
    const std::size_t i = idx % r1;
    const std::size_t j = idx / r1;
    Vector out(d * b);
    for (std::size_t col = 0; col < b; ++col) {
        const double cj = null_d(col, j);
        for (std::size_t row = 0; row < d; ++row) out[col * d + row] = cj * null_w(row, i);
    }
    return out;
}

Matrix PerturbationBasis::sample(Rng& rng) const {
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (method == BasisMethod::stacked_kron) {
        Vector coeffs(k_rank);
        for (double& c : coeffs) c = gauss(rng);
        return linalg::unvec(basis_vectors * coeffs, d, b);
    }
    const std::size_t r1 = null_w.cols();
    const std::size_t r2 = null_d.cols();
    Matrix mix(r1, r2);
    for (std::size_t j = 0; j < r2; ++j) {  // coefficient order matches column()
        for (std::size_t i = 0; i < r1; ++i) mix(i, j) = gauss(rng);
    }
    return null_w * mix * null_d.transposed();
}

PerturbationBasis perturbation_basis(const nn::FcnParams& params, const MiniBatch& batch,
                                     BasisMethod method, const Tolerance& tol) {
    if (params.depth() < 2) {
        throw std::invalid_argument("perturbation_basis: needs a hidden layer (L >= 2)");
    }
    const Matrix& w1 = params.weights[0];            // d x d1
    const Matrix d1 = nn::error_matrices(params, batch)[0];  // b x d1

    PerturbationBasis basis;
    basis.method = method;
    basis.d = w1.rows();
    basis.d1 = w1.cols();
    basis.b = batch.batch_size();

    if (method == BasisMethod::stacked_kron) {
        // K = [ D1^T (x) I_d ; I_b (x) W1^T ], null space gives vec(P)
        const Matrix k = linalg::vstack(
            linalg::kron(d1.transposed(), Matrix::identity(basis.d)),
            linalg::kron(Matrix::identity(basis.b), w1.transposed()));
        basis.basis_vectors = linalg::nullspace(k, tol);
        basis.k_rank = basis.basis_vectors.cols();
    } else {
        basis.null_w = linalg::nullspace(w1.transposed(), tol);  // d x r1
        basis.null_d = linalg::nullspace(d1.transposed(), tol);  // b x r2
        basis.k_rank = basis.null_w.cols() * basis.null_d.cols();
    }
    return basis;
}

ForgeResult perturb_forge(const nn::FcnParams& params, const MiniBatch& batch, double scale,
                          std::uint64_t seed, BasisMethod method) {
    const PerturbationBasis basis = perturbation_basis(params, batch, method);
    if (basis.dim() == 0) {
        throw std::runtime_error("perturb_forge: only the trivial perturbation exists");
    }
    Rng rng = make_rng(mix_seed(seed, 0x70657274ULL));
    Matrix p = basis.sample(rng);
    const double norm = p.frobenius_norm();
    if (scale > 0.0 && norm > 0.0) p = p.scaled(scale / norm);
    if (scale == 0.0) p = Matrix(basis.d, basis.b);

    MiniBatch forged;
    forged.x = batch.x + p;
    forged.y = batch.y;

    ForgeResult result;
    result.grad_distance =
        nn::l2_distance(nn::grad_batch(params, batch), nn::grad_batch(params, forged));
    result.approx_error = result.grad_distance;
    result.forged = std::move(forged);
    result.method =
        method == BasisMethod::stacked_kron ? "exact_perturb/stacked" : "exact_perturb/factored";
    result.seed = seed;
    return result;
}

ErrorMatrixDraw sample_error_matrix(Rng& rng, std::size_t b, std::size_t n) {
    if (n < 2) throw std::invalid_argument("error matrix: need at least two classes");
    std::normal_distribution<double> gauss(0.0, 1.0);
    ErrorMatrixDraw draw;
    draw.d = Matrix(b, n);
    for (std::size_t k = 0; k < b; ++k) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double g = gauss(rng);
            draw.d(k, j) = g;
            row_sum += g;
        }
        draw.d(k, n - 1) = -row_sum;  // forces the zero row sum
    }
    draw.v_constants.assign(b, 1.0);
    return draw;
}

ForgeResult error_matrix_forge(const Matrix& w, const MiniBatch& batch, std::uint64_t seed,
                               std::size_t max_resamples) {
    batch.validate();
    const std::size_t b = batch.batch_size();
    const std::size_t n = w.cols();
    if (batch.input_dim() != w.rows() || batch.class_count() != n) {
        throw std::invalid_argument("error_matrix_forge: shape mismatch with W");
    }

    const nn::FcnParams model = single_layer_model(w);
    const Matrix g = nn::grad_batch(model, batch).d_weights[0];  // d x n
    const std::size_t g_rank = linalg::rank(g);
    if (b <= g_rank) {
        throw std::invalid_argument("error_matrix_forge: needs b > rank of the weight gradient");
    }

    Rng rng = make_rng(mix_seed(seed, 0x656d7321ULL));
    const Tolerance tol;
    std::string last_failure = "no attempt made";
    for (std::size_t attempt = 0; attempt <= max_resamples; ++attempt) {
        const ErrorMatrixDraw draw = sample_error_matrix(rng, b, n);
        if (linalg::rank(draw.d) < g_rank) {
            last_failure = "sampled D had rank below rank(G)";
            continue;
        }
        // X' D = bG row-wise: solve D^T X'^T = b G^T
        const auto ls = linalg::solve_ls(draw.d.transposed(),
                                         g.transposed().scaled(static_cast<double>(b)), tol);
        if (!ls.consistent) {
            last_failure = "X'D = bG was inconsistent for the sampled D";
            continue;
        }
        const Matrix x_forged = ls.solution.transposed();  // d x b
        const Matrix probs = softmax_of(model, x_forged);  // n x b
        Matrix y_forged(n, b);
        for (std::size_t k = 0; k < b; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                y_forged(i, k) = probs(i, k) * draw.v_constants[k] - draw.d(k, i);
            }
        }

        ForgeResult result;
        result.forged = MiniBatch{x_forged, y_forged};
        result.forged.validate();
        result.grad_distance = weight_grad_distance(model, batch, result.forged);
        result.approx_error = result.grad_distance;
        result.method = "exact_error_matrix";
        result.seed = seed;
        result.resamples = attempt;
        return result;
    }
    throw std::runtime_error("error_matrix_forge: exhausted " + std::to_string(max_resamples) +
                             " resamples (" + last_failure + ")");
}

BigCount count_batches(std::size_t d, std::size_t n, std::size_t v_levels, std::size_t b) {
    Big universe;
    mpz_ui_pow_ui(universe.raw(), v_levels, d);
    mpz_mul_ui(universe.raw(), universe.raw(), n);
    Big total;
    mpz_bin_ui(total.raw(), universe.raw(), b);
    BigCount out;
    out.decimal = total.to_string();
    out.fits_u64 = total.fits_u64();
    if (out.fits_u64) out.as_u64 = total.to_u64();
    return out;
}

namespace {

struct ScanShared {
    const std::vector<Vector>* grads;  // per-example flattened gradients
    const Vector* target_mean;
    std::uint64_t universe;
    std::size_t b;
    double tol_sq;
    std::uint64_t skip_rank;  // rank of the original batch, or UINT64_MAX
    std::atomic<std::uint64_t> best_found{std::numeric_limits<std::uint64_t>::max()};
};

struct ScanResult {
    bool found = false;
    std::uint64_t found_rank = 0;
    std::vector<std::uint64_t> found_comb;
    double best_distance_sq = std::numeric_limits<double>::infinity();
};

ScanResult scan_range(ScanShared& shared, std::uint64_t begin_rank, std::uint64_t end_rank) {
    ScanResult result;
    if (begin_rank >= end_rank) return result;
    std::vector<std::uint64_t> comb =
        unrank_combination(shared.universe, shared.b, Big(begin_rank));
    const std::size_t p = shared.target_mean->size();
    const double inv_b = 1.0 / static_cast<double>(shared.b);
    Vector sums(p);

    for (std::uint64_t rank = begin_rank; rank < end_rank; ++rank) {
        if ((rank & 0xfff) == 0 &&
            shared.best_found.load(std::memory_order_relaxed) < rank) {
            break;  // a lower-ranked worker already found a match
        }
        if (rank != shared.skip_rank) {
            std::fill(sums.begin(), sums.end(), 0.0);
            for (std::uint64_t id : comb) {
                const Vector& g = (*shared.grads)[id];
                for (std::size_t t = 0; t < p; ++t) sums[t] += g[t];
            }
            double dist_sq = 0.0;
            for (std::size_t t = 0; t < p; ++t) {
                const double diff = sums[t] * inv_b - (*shared.target_mean)[t];
                dist_sq += diff * diff;
                if (dist_sq > shared.tol_sq && dist_sq > result.best_distance_sq) break;
            }
            result.best_distance_sq = std::min(result.best_distance_sq, dist_sq);
            if (dist_sq <= shared.tol_sq) {
                result.found = true;
                result.found_rank = rank;
                result.found_comb = comb;
                // publish so higher ranges can stop scanning
                std::uint64_t cur = shared.best_found.load();
                while (rank < cur && !shared.best_found.compare_exchange_weak(cur, rank)) {
                }
                break;
            }
        }
        if (!next_combination(comb, shared.universe)) break;
    }
    return result;
}

}  // namespace

BruteForceReport brute_force_search(std::size_t d, std::size_t n, std::size_t v_levels,
                                    std::size_t b, const nn::FcnParams& model,
                                    std::uint64_t seed, double tol,
                                    const BruteForceOptions& options) {
    if (b < 1) throw std::invalid_argument("brute force: b must be >= 1");
    if (model.weights.front().rows() != d || model.weights.back().cols() != n) {
        throw std::invalid_argument("brute force: model does not match (d, n)");
    }
    const Universe universe{d, n, v_levels};
    const std::uint64_t n_examples = universe.count();
    if (n_examples < b) throw std::invalid_argument("brute force: fewer examples than b");
    const std::size_t p = nn::param_count(model);
    if (n_examples > 5'000'000 || n_examples * p > 200'000'000ULL) {
        throw std::invalid_argument("brute force: universe too large to precompute");
    }

    BruteForceReport report;
    report.d = d;
    report.n = n;
    report.v_levels = v_levels;
    report.b = b;
    report.tol = tol;
    report.total_batches = count_batches(d, n, v_levels, b);

    // per-example gradients; a batch gradient is the mean over its members
    std::vector<Vector> grads;
    grads.reserve(n_examples);
    for (std::uint64_t id = 0; id < n_examples; ++id) {
        const data::Example e = universe.example(id);
        grads.push_back(nn::flatten(nn::grad_example(model, e.x, e.y)));
    }

    // sample the true batch as a uniform b-subset
    Rng rng = make_rng(mix_seed(seed, 0x62727574ULL));
    std::vector<std::uint64_t> original;
    while (original.size() < b) {
        std::uniform_int_distribution<std::uint64_t> pick(0, n_examples - 1);
        const std::uint64_t id = pick(rng);
        if (std::find(original.begin(), original.end(), id) == original.end()) {
            original.push_back(id);
        }
    }
    std::sort(original.begin(), original.end());

    Vector target_mean(p, 0.0);
    for (std::uint64_t id : original) {
        for (std::size_t t = 0; t < p; ++t) target_mean[t] += grads[id][t];
    }
    for (double& v : target_mean) v /= static_cast<double>(b);

    const Big original_rank = combination_rank(n_examples, original);

    // scope of the scan: the full space, or the first `budget` combinations
    std::uint64_t scan_count;
    if (report.total_batches.fits_u64 && report.total_batches.as_u64 <= options.budget) {
        scan_count = report.total_batches.as_u64;
        report.complete = true;
    } else {
        scan_count = options.budget;
        report.complete = false;
    }
    report.scanned = scan_count;

    ScanShared shared;
    shared.grads = &grads;
    shared.target_mean = &target_mean;
    shared.universe = n_examples;
    shared.b = b;
    shared.tol_sq = tol * tol;
    shared.skip_rank = original_rank.fits_u64() && original_rank.to_u64() < scan_count
                           ? original_rank.to_u64()
                           : std::numeric_limits<std::uint64_t>::max();

    std::size_t jobs = options.jobs ? options.jobs : std::thread::hardware_concurrency();
    jobs = std::max<std::size_t>(1, std::min<std::size_t>(jobs, scan_count ? scan_count : 1));

    std::vector<ScanResult> results(jobs);
    if (jobs == 1) {
        results[0] = scan_range(shared, 0, scan_count);
    } else {
        std::vector<std::thread> workers;
        const std::uint64_t chunk = (scan_count + jobs - 1) / jobs;
        for (std::size_t j = 0; j < jobs; ++j) {
            const std::uint64_t begin = j * chunk;
            const std::uint64_t end = std::min<std::uint64_t>(begin + chunk, scan_count);
            workers.emplace_back(
                [&shared, &results, j, begin, end] { results[j] = scan_range(shared, begin, end); });
        }
        for (auto& w : workers) w.join();
    }

    double best_sq = std::numeric_limits<double>::infinity();
    const ScanResult* hit = nullptr;
    for (const ScanResult& r : results) {
        best_sq = std::min(best_sq, r.best_distance_sq);
        if (r.found && (!hit || r.found_rank < hit->found_rank)) hit = &r;
    }
    report.best_distance = std::isinf(best_sq) ? best_sq : std::sqrt(best_sq);
    if (hit) {
        report.found = true;
        std::vector<data::Example> orig_examples, match_examples;
        for (std::uint64_t id : original) orig_examples.push_back(universe.example(id));
        for (std::uint64_t id : hit->found_comb) match_examples.push_back(universe.example(id));
        report.witness = {data::batch_from_examples(orig_examples),
                          data::batch_from_examples(match_examples)};
    }
    return report;
}

}  // namespace forgelab::exact
