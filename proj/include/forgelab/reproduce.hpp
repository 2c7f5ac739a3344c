#pragma once

#include <cstdint>
#include <vector>

#include "forgelab/nn.hpp"
#include "forgelab/trace.hpp"

namespace forgelab::reproduce {

// Dictates the order in which per-example gradients are summed, emulating
// the reduction-order changes behind benign reproduction error. With
// sequential_permuted and seed 0 the plan is the identity: it reproduces
// the canonical index-order accumulation of grad_batch bit-for-bit.
struct ReductionPlan {
    enum class Strategy { sequential_permuted, pairwise_tree };

    Strategy strategy = Strategy::sequential_permuted;
    std::uint64_t seed = 0;

    static ReductionPlan identity() { return {}; }
    bool is_identity() const {
        return strategy == Strategy::sequential_permuted && seed == 0;
    }
};

nn::Gradient grad_batch_with_plan(const nn::FcnParams& params, const data::MiniBatch& batch,
                                  const ReductionPlan& plan);

nn::FcnParams sgd_step_with_plan(const nn::FcnParams& params, const data::MiniBatch& batch,
                                 double lr, const ReductionPlan& plan);

struct ReproReport {
    std::vector<std::vector<double>> errors;  // [step][repeat]
    std::vector<double> per_step_errors;      // max over repeats, per step
    double eps_repr = 0.0;                    // max over everything
    std::size_t repeats = 0;
    ReductionPlan::Strategy strategy = ReductionPlan::Strategy::sequential_permuted;
};

// Recomputes every step of the trace `repeats` times under fresh plans and
// records the l2 deviation from the recorded checkpoint. A zero
// plan_seed_base gives every recomputation the seed-0 plan, which under the
// sequential strategy is the identity (the zero-noise control).
ReproReport measure_repr_error(
    const trace::ExecutionTrace& trace, std::size_t repeats, std::uint64_t plan_seed_base,
    ReductionPlan::Strategy strategy = ReductionPlan::Strategy::sequential_permuted);

}  // namespace forgelab::reproduce
