#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forgelab/data.hpp"
#include "forgelab/trace.hpp"

namespace forgelab::greedy {

// A forging challenge: replace the examples of batch `step` that appear in
// `forbidden` (matched by value) with data drawn from the dataset minus
// `forbidden`. Holds non-owning views of the trace and dataset.
struct ForgeTask {
    const trace::ExecutionTrace* trace = nullptr;
    const data::Dataset* dataset = nullptr;
    std::size_t step = 0;
    std::vector<data::Example> forbidden;  // U
    data::Domain domain;
    double match_tol = data::kDefaultMatchTol;

    void validate() const;
};

struct ForgeResult {
    data::MiniBatch forged;
    // Primary error of the method: l2 between parameter updates for the
    // greedy attacks (eta-dependent), l2 between batch gradients for the
    // exact constructions (eta-free). grad_distance always carries the
    // gradient-space value.
    double approx_error = 0.0;
    double grad_distance = 0.0;
    std::string method;
    std::uint64_t seed = 0;
    std::size_t candidates_tried = 0;
    std::size_t resamples = 0;
};

// Greedy search: draw a pool of n_pool points from D \ U, then m_batches
// candidate fillings of the forbidden slots, and keep the one whose update
// lands closest to the recorded one.
ForgeResult greedy_search(const ForgeTask& task, std::size_t n_pool, std::size_t m_batches,
                          std::uint64_t seed);

// Replaces every forbidden example with its class-wise nearest neighbour
// from D \ U (ties broken by lowest dataset index).
ForgeResult nearest_neighbor_forge(const ForgeTask& task);

struct FractionRow {
    double fraction;
    std::size_t replaced;  // #(B cap U)
    double min_error;
    double median_error;
    double max_error;
    std::vector<double> errors;  // per seed
};

// Forges the middle checkpoint at each fraction over the given seeds.
std::vector<FractionRow> forging_fraction_sweep(const trace::ExecutionTrace& trace,
                                                const data::Dataset& ds,
                                                const std::vector<double>& fractions,
                                                const std::vector<std::uint64_t>& seeds,
                                                std::size_t n_pool, std::size_t m_batches);

struct LossCorrRow {
    std::size_t example_index;
    std::size_t step;
    double loss;
    double approx_error;
};

struct LossCorrTable {
    std::vector<LossCorrRow> rows;
    double spearman = 0.0;
    bool spearman_defined = false;
};

// Single-example forging across the trace: pairs the per-example loss at
// every stride-th checkpoint with the error of forging just that example.
LossCorrTable loss_correlation_experiment(const trace::ExecutionTrace& trace,
                                          const data::Dataset& ds, std::size_t n_examples,
                                          std::size_t stride, std::size_t n_pool,
                                          std::size_t m_batches, std::uint64_t seed);

// Spearman rank correlation with average ranks for ties; `defined` is false
// when either coordinate has zero variance.
double spearman_correlation(const std::vector<double>& xs, const std::vector<double>& ys,
                            bool& defined);

}  // namespace forgelab::greedy
