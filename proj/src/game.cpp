#include "forgelab/game.hpp"

#include <stdexcept>

#include "forgelab/exact.hpp"
#include "forgelab/rng.hpp"

namespace forgelab::game {

namespace {

using data::MiniBatch;

greedy::ForgeTask deletion_task(const trace::ExecutionTrace& trace, const data::Dataset& ds,
                                std::size_t step, const data::Domain& domain, double tol) {
    // Algorithm 1 leaves U implicit; the replacement adversaries treat the
    // whole challenged batch as the set to delete, which forces a forgery
    // that is distinct in every example.
    greedy::ForgeTask task;
    task.trace = &trace;
    task.dataset = &ds;
    task.step = step;
    task.domain = domain;
    task.match_tol = tol;
    const MiniBatch& batch = trace.batches[step];
    for (std::size_t k = 0; k < batch.batch_size(); ++k) {
        task.forbidden.push_back({batch.x.col(k), batch.y.col(k)});
    }
    return task;
}

greedy::ForgeResult run_adversary(const trace::ExecutionTrace& trace, const data::Dataset& ds,
                                  const GameConfig& cfg, std::size_t step) {
    const MiniBatch& batch = trace.batches[step];
    const nn::FcnParams& params = trace.checkpoints[step];
    switch (cfg.adversary) {
        case Adversary::honest_replay: {
            greedy::ForgeResult result;
            result.forged = batch;
            result.method = "honest_replay";
            return result;
        }
        case Adversary::greedy: {
            const std::size_t pool =
                cfg.greedy_pool ? cfg.greedy_pool : 10 * batch.batch_size();
            return greedy::greedy_search(deletion_task(trace, ds, step, cfg.domain, cfg.check_tol),
                                         pool, cfg.greedy_batches, cfg.adversary_seed);
        }
        case Adversary::nearest_neighbor:
            return greedy::nearest_neighbor_forge(
                deletion_task(trace, ds, step, cfg.domain, cfg.check_tol));
        case Adversary::exact_perturb:
            return exact::perturb_forge(params, batch, cfg.perturb_scale, cfg.adversary_seed);
        case Adversary::exact_error_matrix: {
            if (params.depth() != 1) {
                throw std::runtime_error("error-matrix adversary needs an L=1 model");
            }
            return exact::error_matrix_forge(params.weights[0], batch, cfg.adversary_seed,
                                             cfg.max_resamples);
        }
    }
    throw std::logic_error("unknown adversary");
}

}  // namespace

GameOutcome play(const trace::ExecutionTrace& trace, const data::Dataset& ds,
                 const GameConfig& cfg, const reproduce::ReductionPlan& verifier_plan) {
    if (cfg.eps < 0.0) throw std::invalid_argument("game: eps must be >= 0");
    if (trace.step_count() == 0) throw std::invalid_argument("game: empty trace");

    GameOutcome outcome;
    Rng rng = make_rng(mix_seed(cfg.challenge_seed, 0x67616d65ULL));
    std::uniform_int_distribution<std::size_t> pick(0, trace.step_count() - 1);
    outcome.step = pick(rng);

    try {
        outcome.forge_result = run_adversary(trace, ds, cfg, outcome.step);
    } catch (const std::exception& e) {
        outcome.verdict = Verdict::REJECT;
        outcome.reject_reason = RejectReason::not_distinct;
        outcome.diagnostics = std::string("adversary failed: ") + e.what();
        return outcome;
    }

    const MiniBatch& original = trace.batches[outcome.step];
    const MiniBatch& forged = outcome.forge_result->forged;
    if (!data::distinct(forged, original, cfg.check_tol)) {
        outcome.verdict = Verdict::REJECT;
        outcome.reject_reason = RejectReason::not_distinct;
        return outcome;
    }
    if (!data::in_domain(forged, cfg.domain, cfg.check_tol)) {
        outcome.verdict = Verdict::REJECT;
        outcome.reject_reason = RejectReason::out_of_domain;
        return outcome;
    }

    const nn::FcnParams recomputed = reproduce::sgd_step_with_plan(
        trace.checkpoints[outcome.step], forged, trace.config.lr, verifier_plan);
    outcome.measured_error = nn::l2_distance(recomputed, trace.checkpoints[outcome.step + 1]);
    if (outcome.measured_error > cfg.eps) {
        outcome.verdict = Verdict::REJECT;
        outcome.reject_reason = RejectReason::error_exceeds_eps;
    } else {
        outcome.verdict = Verdict::ACCEPT;
    }
    return outcome;
}

double threshold_from_measurement(const reproduce::ReproReport& report, double margin) {
    if (report.per_step_errors.empty()) {
        throw std::invalid_argument("threshold: empty report");
    }
    return margin * report.eps_repr;
}

StepVerification verify_all_steps(const trace::ExecutionTrace& trace,
                                  const reproduce::ReductionPlan& plan, double eps) {
    StepVerification out;
    out.per_step_errors.reserve(trace.step_count());
    for (std::size_t i = 0; i < trace.step_count(); ++i) {
        const nn::FcnParams recomputed = reproduce::sgd_step_with_plan(
            trace.checkpoints[i], trace.batches[i], trace.config.lr, plan);
        const double err = nn::l2_distance(recomputed, trace.checkpoints[i + 1]);
        out.per_step_errors.push_back(err);
        out.max_error = std::max(out.max_error, err);
        if (err > eps) out.all_within = false;
    }
    return out;
}

const char* to_string(Verdict v) { return v == Verdict::ACCEPT ? "ACCEPT" : "REJECT"; }

const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::not_distinct: return "not_distinct";
        case RejectReason::out_of_domain: return "out_of_domain";
        case RejectReason::error_exceeds_eps: return "error_exceeds_eps";
    }
    return "unknown";
}

}  // namespace forgelab::game
