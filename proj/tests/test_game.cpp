#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "forgelab/game.hpp"
#include "test_helpers.hpp"

using namespace forgelab;
using game::Adversary;
using game::GameConfig;
using game::RejectReason;
using game::Verdict;
using reproduce::ReductionPlan;

namespace {

struct World {
    data::Dataset ds;
    trace::ExecutionTrace trace;
};

// d=24, d1=2, b=12 keeps the perturbation construction feasible: 288 > 72.
World perturbable_world(data::Domain dom = data::Domain::continuous_box(0.0, 1.0)) {
    World w;
    w.ds = data::gen_synthetic(77, 160, 24, 3, dom);
    trace::TrainConfig cfg;
    cfg.arch.layer_dims = {24, 2, 3};
    cfg.lr = 0.01;
    cfg.steps = 6;
    cfg.batch_size = 12;
    cfg.seed = 13;
    w.trace = trace::train(w.ds, cfg);
    return w;
}

GameConfig base_config() {
    GameConfig cfg;
    cfg.domain = data::Domain::continuous_box(-100.0, 100.0);
    cfg.challenge_seed = 3;
    return cfg;
}

}  // namespace

TEST_SUITE("game") {

TEST_CASE("honest replay is rejected as not distinct") {
    const World w = perturbable_world();
    GameConfig cfg = base_config();
    cfg.adversary = Adversary::honest_replay;
    cfg.eps = 1e9;  // even an absurdly lenient verifier rejects a replay
    const auto outcome = game::play(w.trace, w.ds, cfg, ReductionPlan::identity());
    CHECK(outcome.verdict == Verdict::REJECT);
    REQUIRE(outcome.reject_reason.has_value());
    CHECK(*outcome.reject_reason == RejectReason::not_distinct);
    CHECK(std::isnan(outcome.measured_error));
}

TEST_CASE("the perturbation adversary wins in a continuous domain") {
    const World w = perturbable_world();
    GameConfig cfg = base_config();
    cfg.adversary = Adversary::exact_perturb;
    cfg.perturb_scale = 0.5;
    cfg.eps = 1e-6;
    const auto outcome = game::play(w.trace, w.ds, cfg, ReductionPlan::identity());
    CHECK(outcome.verdict == Verdict::ACCEPT);
    CHECK_FALSE(outcome.reject_reason.has_value());
    CHECK(outcome.measured_error <= 1e-6);
    REQUIRE(outcome.forge_result.has_value());
    CHECK(data::distinct(outcome.forge_result->forged, w.trace.batches[outcome.step]));
}

TEST_CASE("the same adversary loses on the pixel grid") {
    const World w = perturbable_world(data::Domain::discrete_grid(256));
    GameConfig cfg = base_config();
    cfg.adversary = Adversary::exact_perturb;
    cfg.perturb_scale = 0.5;
    cfg.eps = 1e9;  // domain violations dominate any threshold
    cfg.domain = data::Domain::discrete_grid(256);
    const auto outcome = game::play(w.trace, w.ds, cfg, ReductionPlan::identity());
    CHECK(outcome.verdict == Verdict::REJECT);
    REQUIRE(outcome.reject_reason.has_value());
    CHECK(*outcome.reject_reason == RejectReason::out_of_domain);
}

TEST_CASE("greedy forging cannot beat a reproduction-error threshold") {
    const World w = perturbable_world();
    const auto report = reproduce::measure_repr_error(w.trace, 4, 17);
    GameConfig cfg = base_config();
    cfg.adversary = Adversary::greedy;
    cfg.greedy_batches = 40;
    cfg.eps = game::threshold_from_measurement(report);
    const auto outcome = game::play(w.trace, w.ds, cfg, ReductionPlan::identity());
    CHECK(outcome.verdict == Verdict::REJECT);
    REQUIRE(outcome.reject_reason.has_value());
    CHECK(*outcome.reject_reason == RejectReason::error_exceeds_eps);
    CHECK(outcome.measured_error > cfg.eps);
}

TEST_CASE("adversary failure surfaces as a not-distinct rejection") {
    // d1 = d makes null(W1^T) trivial, so no admissible perturbation exists
    World w;
    w.ds = data::gen_synthetic(78, 100, 4, 3, data::Domain::continuous_box(0.0, 1.0));
    trace::TrainConfig cfg_train;
    cfg_train.arch.layer_dims = {4, 4, 3};
    cfg_train.lr = 0.01;
    cfg_train.steps = 3;
    cfg_train.batch_size = 4;
    cfg_train.seed = 1;
    w.trace = trace::train(w.ds, cfg_train);

    GameConfig cfg = base_config();
    cfg.adversary = Adversary::exact_perturb;
    const auto outcome = game::play(w.trace, w.ds, cfg, ReductionPlan::identity());
    CHECK(outcome.verdict == Verdict::REJECT);
    CHECK(*outcome.reject_reason == RejectReason::not_distinct);
    CHECK_FALSE(outcome.diagnostics.empty());
}

TEST_CASE("error-matrix adversary needs an L=1 trace") {
    const World w = perturbable_world();  // L = 2
    GameConfig cfg = base_config();
    cfg.adversary = Adversary::exact_error_matrix;
    const auto outcome = game::play(w.trace, w.ds, cfg, ReductionPlan::identity());
    CHECK(outcome.verdict == Verdict::REJECT);
    CHECK(outcome.diagnostics.find("L=1") != std::string::npos);
}

TEST_CASE("error-matrix adversary matches weights but the bias update betrays it") {
    World w;
    w.ds = data::gen_synthetic(79, 120, 16, 3, data::Domain::continuous_box(0.0, 1.0));
    trace::TrainConfig cfg_train;
    cfg_train.arch.layer_dims = {16, 3};
    cfg_train.lr = 0.01;
    cfg_train.steps = 4;
    cfg_train.batch_size = 10;
    cfg_train.seed = 6;
    w.trace = trace::train(w.ds, cfg_train);

    GameConfig cfg = base_config();
    cfg.adversary = Adversary::exact_error_matrix;
    cfg.domain = data::Domain::continuous_box(-1000.0, 1000.0,
                                              data::Domain::LabelKind::real_vector);
    cfg.eps = 1e-6;
    const auto outcome = game::play(w.trace, w.ds, cfg, ReductionPlan::identity());
    CHECK(outcome.verdict == Verdict::REJECT);
    CHECK(*outcome.reject_reason == RejectReason::error_exceeds_eps);
    // the weight-gradient side of the forgery is still tight
    REQUIRE(outcome.forge_result.has_value());
    CHECK(outcome.forge_result->grad_distance <= 1e-6);
}

TEST_CASE("out-of-domain batches are never accepted, whatever eps") {
    const World w = perturbable_world(data::Domain::discrete_grid(16));
    GameConfig cfg = base_config();
    cfg.adversary = Adversary::exact_perturb;
    cfg.domain = data::Domain::discrete_grid(16);
    for (double eps : {0.0, 1e-3, 1e6}) {
        cfg.eps = eps;
        const auto outcome = game::play(w.trace, w.ds, cfg, ReductionPlan::identity());
        CHECK(outcome.verdict == Verdict::REJECT);
        CHECK(*outcome.reject_reason == RejectReason::out_of_domain);
    }
}

TEST_CASE("a strict verifier with a different reduction order rejects honest traces") {
    const World w = perturbable_world();
    const ReductionPlan shuffled{ReductionPlan::Strategy::sequential_permuted, 999};
    const auto strict = game::verify_all_steps(w.trace, shuffled, 0.0);
    CHECK_FALSE(strict.all_within);
    CHECK(strict.max_error > 0.0);

    const auto faithful = game::verify_all_steps(w.trace, ReductionPlan::identity(), 0.0);
    CHECK(faithful.all_within);
    CHECK(faithful.max_error == 0.0);
}

TEST_CASE("verdicts replay bit-identically") {
    const World w = perturbable_world();
    GameConfig cfg = base_config();
    cfg.adversary = Adversary::greedy;
    cfg.greedy_batches = 25;
    cfg.eps = 1e-4;
    const auto a = game::play(w.trace, w.ds, cfg, ReductionPlan::identity());
    const auto b = game::play(w.trace, w.ds, cfg, ReductionPlan::identity());
    CHECK(a.verdict == b.verdict);
    CHECK(a.step == b.step);
    CHECK(a.measured_error == b.measured_error);
}

TEST_CASE("threshold_from_measurement applies the margin") {
    const World w = perturbable_world();
    const auto shuffled = reproduce::measure_repr_error(w.trace, 3, 55);
    CHECK(game::threshold_from_measurement(shuffled) == shuffled.eps_repr);
    CHECK(game::threshold_from_measurement(shuffled, 10.0) ==
          doctest::Approx(10.0 * shuffled.eps_repr));

    const auto quiet = reproduce::measure_repr_error(w.trace, 3, 0);
    CHECK(game::threshold_from_measurement(quiet) == 0.0);  // the strict verifier
}

TEST_CASE("nearest-neighbour adversary plays a full deletion round") {
    const World w = perturbable_world();
    GameConfig cfg = base_config();
    cfg.adversary = Adversary::nearest_neighbor;
    cfg.eps = 1e-12;
    const auto outcome = game::play(w.trace, w.ds, cfg, ReductionPlan::identity());
    CHECK(outcome.verdict == Verdict::REJECT);
    CHECK(*outcome.reject_reason == RejectReason::error_exceeds_eps);
    REQUIRE(outcome.forge_result.has_value());
    CHECK(data::distinct(outcome.forge_result->forged, w.trace.batches[outcome.step]));
}

}  // TEST_SUITE
