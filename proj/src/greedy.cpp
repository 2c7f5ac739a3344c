#include "forgelab/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "forgelab/rng.hpp"

namespace forgelab::greedy {

namespace {

using data::Example;
using data::MiniBatch;
using linalg::Vector;

bool matches_forbidden(const Vector& x, const Vector& y, const std::vector<Example>& forbidden,
                       double tol) {
    for (const Example& u : forbidden) {
        if (data::examples_equal(x, y, u.x, u.y, tol)) return true;
    }
    return false;
}

std::vector<std::size_t> allowed_pool(const data::Dataset& ds,
                                      const std::vector<Example>& forbidden, double tol) {
    std::vector<std::size_t> pool;
    pool.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!matches_forbidden(ds.examples[i].x, ds.examples[i].y, forbidden, tol)) {
            pool.push_back(i);
        }
    }
    return pool;
}

std::vector<std::size_t> forbidden_slots(const MiniBatch& batch,
                                         const std::vector<Example>& forbidden, double tol) {
    std::vector<std::size_t> slots;
    for (std::size_t k = 0; k < batch.batch_size(); ++k) {
        if (matches_forbidden(batch.x.col(k), batch.y.col(k), forbidden, tol)) {
            slots.push_back(k);
        }
    }
    return slots;
}

// Draws `count` distinct entries of `pool` (dataset indices) using `rng`.
std::vector<std::size_t> draw_distinct(const std::vector<std::size_t>& pool, std::size_t count,
                                       Rng& rng) {
    std::vector<std::size_t> scratch = pool;
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, scratch.size() - 1);
        std::swap(scratch[i], scratch[pick(rng)]);
    }
    scratch.resize(count);
    return scratch;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Core of the greedy attack: fill `slots` of `base` from `pool` m times and
// keep the filling whose sgd update is nearest to the one produced by
// `base` itself. Candidate j is a prefix-stable function of the rng stream,
// so growing m never loses an earlier candidate.
struct ReplacementSearch {
    MiniBatch best;
    double update_error = 0.0;
    std::size_t best_index = 0;
};

ReplacementSearch search_replacements(const nn::FcnParams& params, double lr,
                                      const MiniBatch& base, const std::vector<std::size_t>& slots,
                                      const data::Dataset& ds,
                                      const std::vector<std::size_t>& pool, std::size_t m_batches,
                                      Rng& rng) {
    if (m_batches < 1) throw std::invalid_argument("greedy: need at least one candidate");
    if (pool.size() < slots.size()) throw std::runtime_error("greedy: candidate pool too small");

    const nn::FcnParams target = trace::sgd_step(params, base, lr);
    ReplacementSearch out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m_batches; ++j) {
        MiniBatch candidate = base;
        const std::vector<std::size_t> draw = draw_distinct(pool, slots.size(), rng);
        for (std::size_t s = 0; s < slots.size(); ++s) {
            candidate.x.set_col(slots[s], ds.examples[draw[s]].x);
            candidate.y.set_col(slots[s], ds.examples[draw[s]].y);
        }
        const double err = nn::l2_distance(trace::sgd_step(params, candidate, lr), target);
        if (err < best) {
            best = err;
            out.best = std::move(candidate);
            out.best_index = j;
        }
    }
    out.update_error = best;
    return out;
}

}  // namespace

void ForgeTask::validate() const {
    if (!trace || !dataset) throw std::invalid_argument("task: trace and dataset required");
    if (step >= trace->step_count()) throw std::invalid_argument("task: step out of range");
}

ForgeResult greedy_search(const ForgeTask& task, std::size_t n_pool, std::size_t m_batches,
                          std::uint64_t seed) {
    task.validate();
    const MiniBatch& original = task.trace->batches[task.step];
    const nn::FcnParams& params = task.trace->checkpoints[task.step];
    const double lr = task.trace->config.lr;
    const std::size_t b = original.batch_size();
    if (n_pool < b) throw std::invalid_argument("greedy: n_pool must be >= batch size");

    const std::vector<std::size_t> allowed = allowed_pool(*task.dataset, task.forbidden,
                                                          task.match_tol);
    if (allowed.size() < b) throw std::runtime_error("greedy: |D \\ U| smaller than batch size");

    Rng rng = make_rng(mix_seed(seed, 0x67726565ULL));
    const std::vector<std::size_t> pool =
        draw_distinct(allowed, std::min(n_pool, allowed.size()), rng);
    const std::vector<std::size_t> slots = forbidden_slots(original, task.forbidden,
                                                           task.match_tol);

    ReplacementSearch found =
        search_replacements(params, lr, original, slots, *task.dataset, pool, m_batches, rng);

    ForgeResult result;
    result.forged = std::move(found.best);
    result.approx_error = found.update_error;
    result.grad_distance =
        nn::l2_distance(nn::grad_batch(params, original), nn::grad_batch(params, result.forged));
    result.method = "greedy";
    result.seed = seed;
    result.candidates_tried = m_batches;
    return result;
}

ForgeResult nearest_neighbor_forge(const ForgeTask& task) {
    task.validate();
    const MiniBatch& original = task.trace->batches[task.step];
    const nn::FcnParams& params = task.trace->checkpoints[task.step];
    const double lr = task.trace->config.lr;

    const std::vector<std::size_t> slots = forbidden_slots(original, task.forbidden,
                                                           task.match_tol);
    MiniBatch forged = original;
    for (std::size_t slot : slots) {
        const Vector x = original.x.col(slot);
        const Vector y = original.y.col(slot);
        double best_dist = std::numeric_limits<double>::infinity();
        std::size_t best_idx = task.dataset->size();
        for (std::size_t i = 0; i < task.dataset->size(); ++i) {
            const Example& cand = task.dataset->examples[i];
            if (matches_forbidden(cand.x, cand.y, task.forbidden, task.match_tol)) continue;
            // class-wise: the label vector must match
            bool same_class = cand.y.size() == y.size();
            for (std::size_t j = 0; same_class && j < y.size(); ++j) {
                same_class = std::fabs(cand.y[j] - y[j]) <= task.match_tol;
            }
            if (!same_class) continue;
            const double dist = linalg::norm2(linalg::sub(cand.x, x));
            if (dist < best_dist) {  // strict: ties keep the lowest index
                best_dist = dist;
                best_idx = i;
            }
        }
        if (best_idx == task.dataset->size()) {
            throw std::runtime_error("nearest_neighbor: no same-class example outside U");
        }
        forged.x.set_col(slot, task.dataset->examples[best_idx].x);
        forged.y.set_col(slot, task.dataset->examples[best_idx].y);
    }

    ForgeResult result;
    result.approx_error =
        nn::l2_distance(trace::sgd_step(params, forged, lr), trace::sgd_step(params, original, lr));
    result.grad_distance =
        nn::l2_distance(nn::grad_batch(params, original), nn::grad_batch(params, forged));
    result.forged = std::move(forged);
    result.method = "nearest_neighbor";
    result.candidates_tried = slots.size();
    return result;
}

std::vector<FractionRow> forging_fraction_sweep(const trace::ExecutionTrace& trace,
                                                const data::Dataset& ds,
                                                const std::vector<double>& fractions,
                                                const std::vector<std::uint64_t>& seeds,
                                                std::size_t n_pool, std::size_t m_batches) {
    if (seeds.empty()) throw std::invalid_argument("sweep: need at least one seed");
    const std::size_t t = trace.step_count() / 2;  // the middle checkpoint
    const MiniBatch& batch = trace.batches[t];
    const std::size_t b = batch.batch_size();

    std::vector<FractionRow> rows;
    rows.reserve(fractions.size());
    for (double f : fractions) {
        const std::size_t k =
            std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(f * b)), 1, b);
        FractionRow row;
        row.fraction = f;
        row.replaced = k;
        for (std::uint64_t seed : seeds) {
            // pick which k batch examples form U for this seed
            Rng slot_rng = make_rng(mix_seed(seed, k, 0x736c6f74ULL));
            std::vector<std::size_t> all(b);
            std::iota(all.begin(), all.end(), 0);
            const std::vector<std::size_t> chosen = draw_distinct(all, k, slot_rng);

            ForgeTask task;
            task.trace = &trace;
            task.dataset = &ds;
            task.step = t;
            task.domain = ds.domain;
            for (std::size_t slot : chosen) {
                task.forbidden.push_back({batch.x.col(slot), batch.y.col(slot)});
            }
            row.errors.push_back(greedy_search(task, n_pool, m_batches, seed).approx_error);
        }
        row.min_error = *std::min_element(row.errors.begin(), row.errors.end());
        row.max_error = *std::max_element(row.errors.begin(), row.errors.end());
        row.median_error = median_of(row.errors);
        rows.push_back(std::move(row));
    }
    return rows;
}

LossCorrTable loss_correlation_experiment(const trace::ExecutionTrace& trace,
                                          const data::Dataset& ds, std::size_t n_examples,
                                          std::size_t stride, std::size_t n_pool,
                                          std::size_t m_batches, std::uint64_t seed) {
    if (stride < 1 || trace.step_count() < stride) {
        throw std::invalid_argument("loss_correlation: need trace length >= stride >= 1");
    }
    if (n_examples < 1 || n_examples > ds.size()) {
        throw std::invalid_argument("loss_correlation: bad example count");
    }

    Rng pick_rng = make_rng(mix_seed(seed, 0x6c6f7373ULL));
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), 0);
    const std::vector<std::size_t> probes = draw_distinct(all, n_examples, pick_rng);

    LossCorrTable table;
    for (std::size_t idx : probes) {
        const Example& probe = ds.examples[idx];
        const std::vector<Example> forbidden{probe};
        const std::vector<std::size_t> pool = allowed_pool(ds, forbidden, data::kDefaultMatchTol);
        for (std::size_t i = 0; i < trace.step_count(); i += stride) {
            const nn::FcnParams& params = trace.checkpoints[i];
            // embed the probe into the step's batch so exactly one example is forged
            MiniBatch base = trace.batches[i];
            base.x.set_col(0, probe.x);
            base.y.set_col(0, probe.y);
            Rng rng = make_rng(mix_seed(seed, idx, i));
            const std::vector<std::size_t> subpool =
                draw_distinct(pool, std::min(n_pool, pool.size()), rng);
            const ReplacementSearch found = search_replacements(
                params, trace.config.lr, base, {0}, ds, subpool, m_batches, rng);
            table.rows.push_back({idx, i, nn::example_loss(params, probe.x, probe.y),
                                  found.update_error});
        }
    }

    std::vector<double> losses, errors;
    losses.reserve(table.rows.size());
    errors.reserve(table.rows.size());
    for (const auto& r : table.rows) {
        losses.push_back(r.loss);
        errors.push_back(r.approx_error);
    }
    table.spearman = spearman_correlation(losses, errors, table.spearman_defined);
    return table;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_correlation(const std::vector<double>& xs, const std::vector<double>& ys,
                            bool& defined) {
    defined = false;
    if (xs.size() != ys.size() || xs.size() < 2) return 0.0;
    const std::vector<double> rx = average_ranks(xs);
    const std::vector<double> ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;  // constant input: undefined
    defined = true;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace forgelab::greedy
