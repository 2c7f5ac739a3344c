#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forgelab/data.hpp"
#include "forgelab/nn.hpp"

namespace forgelab::trace {

struct TrainConfig {
    double lr = 0.01;
    std::size_t steps = 1;
    std::size_t batch_size = 1;
    std::uint64_t seed = 0;
    nn::FcnArchitecture arch;

    void validate() const;
};

// The sequence {(theta_i, B_i)}: checkpoints theta_0..theta_T and the batch
// that produced each transition. Batches are stored by value so a trace is
// self-contained evidence.
struct ExecutionTrace {
    std::vector<nn::FcnParams> checkpoints;  // T + 1
    std::vector<data::MiniBatch> batches;    // T
    TrainConfig config;

    std::size_t step_count() const { return batches.size(); }
};

// Uniform Glorot-style init: W ~ U(-s, s) with s = sqrt(6 / (din + dout)),
// biases zero. Deterministic per seed.
nn::FcnParams init_params(const nn::FcnArchitecture& arch, std::uint64_t seed);

nn::FcnParams sgd_step(const nn::FcnParams& params, const data::MiniBatch& batch, double lr);

ExecutionTrace train(const data::Dataset& ds, const TrainConfig& cfg);

// Trace files come in pairs: a JSON manifest at `path` (version, shapes,
// offsets, hyperparameters, SHA-256 of the blob) and raw little-endian
// float64 data at `path + ".blob"`. Round trips are bit-exact.
void save(const ExecutionTrace& trace, const std::string& path);
ExecutionTrace load(const std::string& path);

}  // namespace forgelab::trace
