#include "forgelab/reproduce.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "forgelab/rng.hpp"

namespace forgelab::reproduce {

namespace {

using linalg::Vector;

void add_into(Vector& acc, const Vector& term) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += term[i];
}

// Sums terms[lo..hi) by splitting in half, the shape of a parallel reduce.
Vector tree_sum(const std::vector<Vector>& terms, const std::vector<std::size_t>& order,
                std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return terms[order[lo]];
    const std::size_t mid = lo + (hi - lo) / 2;
    Vector left = tree_sum(terms, order, lo, mid);
    add_into(left, tree_sum(terms, order, mid, hi));
    return left;
}

}  // namespace

nn::Gradient grad_batch_with_plan(const nn::FcnParams& params, const data::MiniBatch& batch,
                                  const ReductionPlan& plan) {
    if (plan.is_identity()) return nn::grad_batch(params, batch);

    const std::size_t b = batch.batch_size();
    std::vector<Vector> per_example;
    per_example.reserve(b);
    for (std::size_t k = 0; k < b; ++k) {
        per_example.push_back(
            nn::flatten(nn::grad_example(params, batch.x.col(k), batch.y.col(k))));
    }

    std::vector<std::size_t> order(b);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(plan.seed, b));
    std::shuffle(order.begin(), order.end(), rng);

    Vector total;
    if (plan.strategy == ReductionPlan::Strategy::sequential_permuted) {
        total = per_example[order[0]];
        for (std::size_t k = 1; k < b; ++k) add_into(total, per_example[order[k]]);
    } else {
        total = tree_sum(per_example, order, 0, b);
    }
    const double inv_b = 1.0 / static_cast<double>(b);
    for (double& v : total) v *= inv_b;
    return nn::unflatten_gradient(params, total);
}

nn::FcnParams sgd_step_with_plan(const nn::FcnParams& params, const data::MiniBatch& batch,
                                 double lr, const ReductionPlan& plan) {
    const nn::Gradient g = grad_batch_with_plan(params, batch, plan);
    nn::FcnParams next = params;
    for (std::size_t i = 0; i < next.weights.size(); ++i) {
        for (std::size_t t = 0; t < next.weights[i].size(); ++t) {
            next.weights[i].data()[t] -= lr * g.d_weights[i].data()[t];
        }
        for (std::size_t t = 0; t < next.biases[i].size(); ++t) {
            next.biases[i][t] -= lr * g.d_biases[i][t];
        }
    }
    return next;
}

ReproReport measure_repr_error(const trace::ExecutionTrace& trace, std::size_t repeats,
                               std::uint64_t plan_seed_base,
                               ReductionPlan::Strategy strategy) {
    if (repeats < 2) throw std::invalid_argument("measure_repr_error: repeats must be >= 2");
    const std::size_t steps = trace.step_count();
    ReproReport report;
    report.repeats = repeats;
    report.strategy = strategy;
    report.errors.resize(steps);
    report.per_step_errors.assign(steps, 0.0);
    for (std::size_t i = 0; i < steps; ++i) {
        report.errors[i].resize(repeats);
        for (std::size_t r = 0; r < repeats; ++r) {
            ReductionPlan plan;
            plan.strategy = strategy;
            plan.seed = plan_seed_base == 0 ? 0 : mix_seed(plan_seed_base, i, r);
            const nn::FcnParams recomputed = sgd_step_with_plan(
                trace.checkpoints[i], trace.batches[i], trace.config.lr, plan);
            const double err = nn::l2_distance(recomputed, trace.checkpoints[i + 1]);
            report.errors[i][r] = err;
            report.per_step_errors[i] = std::max(report.per_step_errors[i], err);
        }
        report.eps_repr = std::max(report.eps_repr, report.per_step_errors[i]);
    }
    return report;
}

}  // namespace forgelab::reproduce
