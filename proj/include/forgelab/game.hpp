#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "forgelab/data.hpp"
#include "forgelab/greedy.hpp"
#include "forgelab/reproduce.hpp"
#include "forgelab/trace.hpp"

namespace forgelab::game {

enum class Adversary {
    greedy,
    nearest_neighbor,
    exact_perturb,
    exact_error_matrix,
    honest_replay,
};

struct GameConfig {
    double eps = 0.0;  // verifier threshold
    data::Domain domain;
    std::uint64_t challenge_seed = 0;
    Adversary adversary = Adversary::honest_replay;

    // adversary knobs
    std::uint64_t adversary_seed = 0;
    std::size_t greedy_pool = 0;  // 0 -> 10 * batch size
    std::size_t greedy_batches = 100;
    double perturb_scale = 1.0;
    std::size_t max_resamples = 5;

    double check_tol = data::kDefaultMatchTol;  // distinctness and domain checks
};

enum class Verdict { ACCEPT, REJECT };
enum class RejectReason { not_distinct, out_of_domain, error_exceeds_eps };

struct GameOutcome {
    Verdict verdict = Verdict::REJECT;
    std::optional<RejectReason> reject_reason;
    double measured_error = std::numeric_limits<double>::quiet_NaN();  // eps_{t+1}
    std::size_t step = 0;
    std::optional<greedy::ForgeResult> forge_result;
    std::string diagnostics;
};

// One round of the forging game: the verifier challenges a uniformly random
// step, the configured adversary forges it, and the verifier checks
// distinctness, domain membership and the recomputation error under its own
// reduction plan.
GameOutcome play(const trace::ExecutionTrace& trace, const data::Dataset& ds,
                 const GameConfig& cfg, const reproduce::ReductionPlan& verifier_plan);

// eps = margin * eps_repr, the informed-verifier threshold rule.
double threshold_from_measurement(const reproduce::ReproReport& report, double margin = 1.0);

// Convenience PoL-style verifier: recompute every step under `plan` and
// compare each error against eps.
struct StepVerification {
    std::vector<double> per_step_errors;
    double max_error = 0.0;
    bool all_within = true;
};
StepVerification verify_all_steps(const trace::ExecutionTrace& trace,
                                  const reproduce::ReductionPlan& plan, double eps);

const char* to_string(Verdict v);
const char* to_string(RejectReason r);

}  // namespace forgelab::game
