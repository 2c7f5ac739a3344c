#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "forgelab/greedy.hpp"
#include "forgelab/nn.hpp"
#include "forgelab/rng.hpp"

namespace forgelab::exact {

using greedy::ForgeResult;

// Sufficient condition for a nontrivial input perturbation: d*b > d1*(d+b).
bool feasibility(std::size_t d, std::size_t d1, std::size_t b);

// The factored construction only needs null directions on both sides, which
// generically means d > d1 and b > d1 - a strictly weaker requirement.
bool factored_feasibility(std::size_t d, std::size_t d1, std::size_t b);

enum class BasisMethod { stacked_kron, factored };

// Spans the admissible perturbations P with P*D1 = 0 and W1^T*P = 0.
// stacked_kron materializes the (d*b) x k null-space basis of the stacked
// system; factored keeps the two orthonormal factors N (null of W1^T) and
// C (null of D1^T) and represents each basis vector c_j (x) n_i lazily,
// since materializing them all at image scale would need gigabytes.
struct PerturbationBasis {
    BasisMethod method = BasisMethod::factored;
    std::size_t d = 0;   // input features
    std::size_t d1 = 0;  // first hidden layer width
    std::size_t b = 0;   // batch size
    std::size_t k_rank = 0;

    linalg::Matrix basis_vectors;  // (d*b) x k_rank, stacked_kron only
    linalg::Matrix null_w;         // d x r1, factored only
    linalg::Matrix null_d;         // b x r2, factored only

    std::size_t dim() const { return k_rank; }
    linalg::Vector column(std::size_t idx) const;  // vec(P) of basis vector idx
    linalg::Matrix sample(Rng& rng) const;         // Gaussian combination, d x b
};

PerturbationBasis perturbation_basis(const nn::FcnParams& params, const data::MiniBatch& batch,
                                     BasisMethod method,
                                     const linalg::Tolerance& tol = {});

// Input-perturbation forging: B' = { (x^(k) + [P]^k, y^(k)) } with P drawn
// from the admissible basis and rescaled to Frobenius norm `scale`.
ForgeResult perturb_forge(const nn::FcnParams& params, const data::MiniBatch& batch, double scale,
                          std::uint64_t seed, BasisMethod method = BasisMethod::factored);

struct ErrorMatrixDraw {
    linalg::Matrix d;            // b x n, every row sums to zero
    linalg::Vector v_constants;  // v^(k) per example, all ones by default
};
ErrorMatrixDraw sample_error_matrix(Rng& rng, std::size_t b, std::size_t n);

// L=1 error-matrix forging: sample D with zero row sums and rank >= rank(G),
// solve X'D = bG, set Y' = f_W(X') diag(v) - D^T. Resamples D up to
// max_resamples times when a draw leads to an inconsistent system.
ForgeResult error_matrix_forge(const linalg::Matrix& w, const data::MiniBatch& batch,
                               std::uint64_t seed, std::size_t max_resamples);

// Exact count, possibly far beyond 64 bits (e.g. v = 256, d = 784).
struct BigCount {
    std::string decimal;
    bool fits_u64 = false;
    std::uint64_t as_u64 = 0;
};
BigCount count_batches(std::size_t d, std::size_t n, std::size_t v_levels, std::size_t b);

struct BruteForceOptions {
    std::uint64_t budget = 20'000'000;  // max combinations to scan
    std::size_t jobs = 1;
};

struct BruteForceReport {
    std::size_t d = 0, n = 0, v_levels = 0, b = 0;
    BigCount total_batches;
    bool found = false;
    bool complete = false;  // false when the budget capped the scan
    std::uint64_t scanned = 0;
    double tol = 0.0;
    // closest gradient among distinct batches; exhaustive only when nothing
    // was found (workers stop scanning once a lower-ranked hit is published)
    double best_distance = 0.0;
    std::optional<std::pair<data::MiniBatch, data::MiniBatch>> witness;  // (original, match)
};

// Enumerates mini-batches over the grid {q/(v-1)}^d x one-hot(n) in
// lexicographic combination order and searches for a distinct batch whose
// gradient matches the sampled one within tol. Streams, never materializes.
BruteForceReport brute_force_search(std::size_t d, std::size_t n, std::size_t v_levels,
                                    std::size_t b, const nn::FcnParams& model,
                                    std::uint64_t seed, double tol,
                                    const BruteForceOptions& options = {});

}  // namespace forgelab::exact
