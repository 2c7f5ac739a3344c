// forgelab: train / repr / game / sweep / brute experiment harness.
// Every command writes a run manifest (<out>.manifest.json) holding the full
// configuration; CSV outputs reference it in a leading comment line.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "forgelab/exact.hpp"
#include "forgelab/game.hpp"
#include "forgelab/greedy.hpp"
#include "forgelab/reproduce.hpp"
#include "forgelab/trace.hpp"

using namespace forgelab;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "forgelab 0.1.0";

std::uint64_t env_seed_fallback() {
    if (const char* env = std::getenv("FORGELAB_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0;
}

std::vector<std::size_t> parse_dims(const std::string& csv) {
    std::vector<std::size_t> dims;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) dims.push_back(std::stoull(item));
    return dims;
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

// --data synthetic | idx:<images>,<labels>
struct DataSpec {
    std::string kind = "synthetic";
    std::string images, labels;
    std::size_t count = 1000;
    std::uint64_t seed = 2024;
};

data::Dataset load_dataset(const DataSpec& spec, std::size_t d, std::size_t classes,
                           const data::Domain& dom) {
    if (spec.kind == "synthetic") {
        return data::gen_synthetic(spec.seed, spec.count, d, classes, dom);
    }
    data::Dataset ds = data::load_idx(spec.images, spec.labels);
    if (ds.input_dim() != d || ds.class_count != classes) {
        throw std::runtime_error("idx dataset does not match the requested architecture");
    }
    return ds;
}

void parse_data_flag(const std::string& value, DataSpec& spec) {
    if (value == "synthetic") {
        spec.kind = "synthetic";
        return;
    }
    if (value.rfind("idx:", 0) == 0) {
        const std::string rest = value.substr(4);
        const auto comma = rest.find(',');
        if (comma == std::string::npos) {
            throw CLI::ValidationError("--data", "idx form is idx:<images>,<labels>");
        }
        spec.kind = "idx";
        spec.images = rest.substr(0, comma);
        spec.labels = rest.substr(comma + 1);
        return;
    }
    throw CLI::ValidationError("--data", "expected 'synthetic' or 'idx:<images>,<labels>'");
}

data::Domain parse_domain(const std::string& value, const std::string& label_kind) {
    const data::Domain::LabelKind labels = label_kind == "real"
                                               ? data::Domain::LabelKind::real_vector
                                               : data::Domain::LabelKind::one_hot;
    if (value.rfind("grid:", 0) == 0) {
        return data::Domain::discrete_grid(std::stoull(value.substr(5)), labels);
    }
    if (value.rfind("box:", 0) == 0) {
        const auto parts = parse_doubles(value.substr(4));
        if (parts.size() != 2) throw CLI::ValidationError("--domain", "box form is box:lo,hi");
        return data::Domain::continuous_box(parts[0], parts[1], labels);
    }
    throw CLI::ValidationError("--domain", "expected box:lo,hi or grid:v");
}

struct ManifestWriter {
    std::string command;
    json config = json::object();
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    std::string path() const { return outputs.empty() ? command + ".manifest.json"
                                                      : outputs.front() + ".manifest.json"; }

    void write() const {
        json manifest{
            {"tool", kVersion},
            {"command", command},
            {"config", config},
            {"outputs", outputs},
            {"wall_clock_s",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
        };
        std::ofstream out(path(), std::ios::trunc);
        out << manifest.dump(2) << '\n';
        if (!out) throw std::runtime_error("cannot write manifest " + path());
    }
};

std::ofstream open_csv(const std::string& path, const std::string& manifest_path,
                       const std::string& header) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# manifest: " << manifest_path << "\n" << header << "\n";
    return out;
}

reproduce::ReductionPlan::Strategy parse_strategy(const std::string& name) {
    if (name == "sequential") return reproduce::ReductionPlan::Strategy::sequential_permuted;
    if (name == "tree") return reproduce::ReductionPlan::Strategy::pairwise_tree;
    throw CLI::ValidationError("--strategy", "expected 'sequential' or 'tree'");
}

// ------------------------------------------------------------------ train

int cmd_train(const std::string& arch_csv, const std::string& act, std::size_t batch,
              std::size_t steps, double lr, std::uint64_t seed, const DataSpec& dspec,
              const std::string& domain_flag, const std::string& out) {
    trace::TrainConfig cfg;
    cfg.arch.layer_dims = parse_dims(arch_csv);
    cfg.arch.activation = act == "identity" ? nn::Activation::identity : nn::Activation::relu;
    cfg.batch_size = batch;
    cfg.steps = steps;
    cfg.lr = lr;
    cfg.seed = seed;
    cfg.validate();
    if (lr == 0.0) {
        std::cerr << "warning: lr = 0 trains a constant trace\n";
    }

    const data::Domain dom = parse_domain(domain_flag, "onehot");
    const data::Dataset ds =
        load_dataset(dspec, cfg.arch.input_dim(), cfg.arch.class_count(), dom);

    ManifestWriter manifest;
    manifest.command = "train";
    manifest.outputs = {out, out + ".blob"};
    manifest.config = {{"arch", cfg.arch.layer_dims}, {"activation", act},
                       {"batch_size", batch},        {"steps", steps},
                       {"lr", lr},                   {"seed", seed},
                       {"data", dspec.kind},         {"data_count", dspec.count},
                       {"data_seed", dspec.seed},    {"domain", domain_flag}};

    const trace::ExecutionTrace result = trace::train(ds, cfg);
    trace::save(result, out);
    manifest.write();
    std::cerr << "trace with " << result.step_count() << " steps written to " << out << "\n";
    return 0;
}

// ------------------------------------------------------------------- repr

int cmd_repr(const std::string& trace_path, std::size_t repeats, std::uint64_t plan_seed,
             const std::string& strategy, const std::string& out) {
    const trace::ExecutionTrace t = trace::load(trace_path);
    const auto report =
        reproduce::measure_repr_error(t, repeats, plan_seed, parse_strategy(strategy));

    ManifestWriter manifest;
    manifest.command = "repr";
    manifest.outputs = {out};
    manifest.config = {{"trace", trace_path},
                       {"repeats", repeats},
                       {"plan_seed", plan_seed},
                       {"strategy", strategy},
                       {"eps_repr", report.eps_repr}};

    auto csv = open_csv(out, manifest.path(), "step,repeat,error_l2");
    csv.precision(17);
    for (std::size_t i = 0; i < report.errors.size(); ++i) {
        for (std::size_t r = 0; r < report.errors[i].size(); ++r) {
            csv << i << ',' << r << ',' << report.errors[i][r] << '\n';
        }
    }
    manifest.write();
    std::cerr << "eps_repr = " << report.eps_repr << " over " << report.errors.size()
              << " steps x " << repeats << " repeats\n";
    return 0;
}

// ------------------------------------------------------------------- game

int cmd_game(const std::string& trace_path, const DataSpec& dspec,
             const std::string& adversary_name, const std::string& eps_flag, double eps_margin,
             const std::string& domain_flag, const std::string& label_kind,
             std::uint64_t challenge_seed, std::uint64_t adversary_seed, double scale,
             std::size_t pool, std::size_t candidates, std::size_t max_resamples,
             std::uint64_t verifier_plan_seed, const std::string& out) {
    const trace::ExecutionTrace t = trace::load(trace_path);
    const data::Domain dom = parse_domain(domain_flag, label_kind);
    const data::Dataset ds = load_dataset(dspec, t.config.arch.input_dim(),
                                          t.config.arch.class_count(), dom);

    game::GameConfig cfg;
    cfg.domain = dom;
    cfg.challenge_seed = challenge_seed;
    cfg.adversary_seed = adversary_seed;
    cfg.perturb_scale = scale;
    cfg.greedy_pool = pool;
    cfg.greedy_batches = candidates;
    cfg.max_resamples = max_resamples;
    if (adversary_name == "honest") cfg.adversary = game::Adversary::honest_replay;
    else if (adversary_name == "greedy") cfg.adversary = game::Adversary::greedy;
    else if (adversary_name == "nearest-neighbor") cfg.adversary = game::Adversary::nearest_neighbor;
    else if (adversary_name == "exact-perturb") cfg.adversary = game::Adversary::exact_perturb;
    else if (adversary_name == "exact-error-matrix") cfg.adversary = game::Adversary::exact_error_matrix;
    else throw CLI::ValidationError("--adversary", "unknown adversary " + adversary_name);

    if (eps_flag == "auto") {
        const auto report = reproduce::measure_repr_error(t, 10, 424242);
        cfg.eps = game::threshold_from_measurement(report, eps_margin);
        std::cerr << "eps(auto) = " << cfg.eps << "\n";
    } else {
        cfg.eps = std::stod(eps_flag);
    }

    reproduce::ReductionPlan verifier_plan;
    verifier_plan.seed = verifier_plan_seed;

    const auto outcome = game::play(t, ds, cfg, verifier_plan);

    json result{
        {"verdict", game::to_string(outcome.verdict)},
        {"step", outcome.step},
        {"eps", cfg.eps},
        {"measured_error", outcome.measured_error},
    };
    if (outcome.reject_reason) result["reject_reason"] = game::to_string(*outcome.reject_reason);
    if (!outcome.diagnostics.empty()) result["diagnostics"] = outcome.diagnostics;
    if (outcome.forge_result) {
        result["adversary"] = {{"method", outcome.forge_result->method},
                               {"grad_distance", outcome.forge_result->grad_distance},
                               {"approx_error", outcome.forge_result->approx_error}};
    }
    std::cout << result.dump(2) << "\n";

    if (!out.empty()) {
        ManifestWriter manifest;
        manifest.command = "game";
        manifest.outputs = {out};
        result["manifest"] = manifest.path();
        manifest.config = {{"trace", trace_path},         {"adversary", adversary_name},
                           {"eps", cfg.eps},              {"domain", domain_flag},
                           {"challenge_seed", challenge_seed}, {"adversary_seed", adversary_seed},
                           {"scale", scale},              {"verifier_plan_seed", verifier_plan_seed}};
        std::ofstream f(out, std::ios::trunc);
        f << result.dump(2) << "\n";
        manifest.write();
    }
    return outcome.verdict == game::Verdict::ACCEPT ? 0 : 1;
}

// ------------------------------------------------------------------ sweep

int cmd_sweep(const std::string& trace_path, const DataSpec& dspec, const std::string& mode,
              std::string fractions_csv, std::size_t seeds, std::uint64_t seed_base,
              std::size_t examples, std::size_t stride, std::size_t pool,
              std::size_t candidates, const std::string& out) {
    const trace::ExecutionTrace t = trace::load(trace_path);
    const data::Dataset ds =
        load_dataset(dspec, t.config.arch.input_dim(), t.config.arch.class_count(),
                     data::Domain::continuous_box(0.0, 1.0));
    const std::size_t b = t.config.batch_size;
    if (pool == 0) pool = 10 * b;

    ManifestWriter manifest;
    manifest.command = "sweep";
    manifest.outputs = {out};
    manifest.config = {{"trace", trace_path}, {"mode", mode},   {"seeds", seeds},
                       {"seed_base", seed_base}, {"pool", pool}, {"candidates", candidates}};

    if (mode == "fraction") {
        if (fractions_csv.empty()) {
            std::ostringstream def;
            def << (1.0 / static_cast<double>(b)) << ",0.25,0.5,1";
            fractions_csv = def.str();
        }
        const std::vector<double> fractions = parse_doubles(fractions_csv);
        std::vector<std::uint64_t> seed_list(seeds);
        for (std::size_t i = 0; i < seeds; ++i) seed_list[i] = seed_base + i;
        const auto rows =
            greedy::forging_fraction_sweep(t, ds, fractions, seed_list, pool, candidates);

        manifest.config["fractions"] = fractions;
        auto csv = open_csv(out, manifest.path(),
                            "fraction,replaced,seeds,min_error,median_error,max_error");
        csv.precision(17);
        for (const auto& row : rows) {
            csv << row.fraction << ',' << row.replaced << ',' << row.errors.size() << ','
                << row.min_error << ',' << row.median_error << ',' << row.max_error << '\n';
        }
        manifest.write();
        return 0;
    }
    if (mode == "loss-corr") {
        const auto table = greedy::loss_correlation_experiment(t, ds, examples, stride, pool,
                                                               candidates, seed_base);
        manifest.config["examples"] = examples;
        manifest.config["stride"] = stride;
        manifest.config["spearman"] = table.spearman;
        manifest.config["spearman_defined"] = table.spearman_defined;
        auto csv = open_csv(out, manifest.path(), "example_index,step,loss,approx_error");
        csv.precision(17);
        for (const auto& row : table.rows) {
            csv << row.example_index << ',' << row.step << ',' << row.loss << ','
                << row.approx_error << '\n';
        }
        manifest.write();
        if (table.spearman_defined) {
            std::cerr << "spearman(loss, error) = " << table.spearman << "\n";
        } else {
            std::cerr << "spearman undefined (constant input)\n";
        }
        return 0;
    }
    throw CLI::ValidationError("--mode", "expected 'fraction' or 'loss-corr'");
}

// ------------------------------------------------------------------ brute

int cmd_brute(std::size_t d, std::size_t n, const std::string& v_csv, const std::string& b_csv,
              std::size_t hidden, std::uint64_t seed, double tol, std::uint64_t budget,
              std::size_t jobs, const std::string& out) {
    nn::FcnArchitecture arch;
    if (hidden == 0) {
        arch.layer_dims = {d, n};
    } else {
        arch.layer_dims = {d, hidden, n};
    }
    const nn::FcnParams model = trace::init_params(arch, seed);

    const auto v_list = parse_dims(v_csv);
    const auto b_list = parse_dims(b_csv);

    ManifestWriter manifest;
    manifest.command = "brute";
    manifest.outputs = {out};
    manifest.config = {{"d", d},     {"n", n},       {"v", v_list}, {"b", b_list},
                       {"hidden", hidden}, {"seed", seed}, {"tol", tol},  {"budget", budget}};

    std::ostringstream header;
    header << "v";
    for (std::size_t b : b_list) header << ",b=" << b;
    auto csv = open_csv(out, manifest.path(), header.str());

    exact::BruteForceOptions options;
    options.budget = budget;
    options.jobs = jobs;
    for (std::size_t v : v_list) {
        csv << v;
        for (std::size_t b : b_list) {
            const auto count = exact::count_batches(d, n, v, b);
            // cells beyond the budget are reported but not searched
            if (!count.fits_u64 || count.as_u64 > budget) {
                csv << ",?:" << count.decimal;
                std::cerr << "v=" << v << " b=" << b << ": skipped (" << count.decimal
                          << " batches)\n";
                continue;
            }
            const auto report = exact::brute_force_search(d, n, v, b, model, seed, tol, options);
            csv << ',' << (report.found ? "yes:" : "no:") << count.decimal;
            std::cerr << "v=" << v << " b=" << b << ": scanned " << report.scanned
                      << ", found=" << (report.found ? "yes" : "no") << ", closest gradient "
                      << report.best_distance << "\n";
        }
        csv << '\n';
    }
    manifest.write();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data forging laboratory: traces, attacks and the verifier game"};
    app.require_subcommand(1);

    // ---- train
    auto* train = app.add_subcommand("train", "Train an FCN and record its execution trace");
    std::string arch = "64,16,3", act = "relu", data_flag = "synthetic", domain_flag = "box:0,1";
    std::string out;
    std::size_t batch = 32, steps = 200;
    double lr = 0.01;
    std::uint64_t seed = env_seed_fallback();
    DataSpec dspec;
    train->add_option("--arch", arch, "layer dims d0,d1,...,dL")->capture_default_str();
    train->add_option("--act", act, "activation: relu|identity")->capture_default_str();
    train->add_option("--b", batch, "batch size")->capture_default_str();
    train->add_option("--steps", steps, "SGD steps T")->capture_default_str();
    train->add_option("--lr", lr, "learning rate eta")->capture_default_str();
    train->add_option("--seed", seed, "training seed (FORGELAB_SEED fallback)");
    train->add_option("--data", data_flag, "synthetic | idx:<images>,<labels>")
        ->capture_default_str();
    train->add_option("--data-n", dspec.count, "synthetic dataset size")->capture_default_str();
    train->add_option("--data-seed", dspec.seed, "synthetic dataset seed")->capture_default_str();
    train->add_option("--domain", domain_flag, "box:lo,hi | grid:v")->capture_default_str();
    train->add_option("--out", out, "trace output path")->required();

    // ---- repr
    auto* repr = app.add_subcommand(
        "repr",
        "Measure emulated reproduction error of a trace.\n"
        "CSV columns: step,repeat,error_l2 (one row per recomputation)");
    std::string trace_path, repr_out, strategy = "sequential";
    std::size_t repeats = 10;
    std::uint64_t plan_seed = 1;
    repr->add_option("--trace", trace_path, "trace manifest path")->required();
    repr->add_option("--repeats", repeats, "recomputations per step")->capture_default_str();
    repr->add_option("--plan-seed", plan_seed, "0 = identity plans (zero-noise control)")
        ->capture_default_str();
    repr->add_option("--strategy", strategy, "sequential | tree")->capture_default_str();
    repr->add_option("--out", repr_out, "CSV output path")->required();

    // ---- game
    auto* game_cmd = app.add_subcommand("game", "Play one round of the forging game");
    std::string game_trace, adversary = "honest", game_domain = "box:0,1", label_kind = "onehot";
    std::string game_out;
    DataSpec game_data;
    std::string game_data_flag = "synthetic";
    std::string eps_flag = "0";
    double eps_margin = 1.0, scale = 1.0;
    std::uint64_t challenge_seed = 0, adversary_seed = 0, verifier_plan_seed = 0;
    std::size_t pool = 0, candidates = 100, max_resamples = 5;
    game_cmd->add_option("--trace", game_trace, "trace manifest path")->required();
    game_cmd->add_option("--data", game_data_flag, "synthetic | idx:<images>,<labels>")
        ->capture_default_str();
    game_cmd->add_option("--data-n", game_data.count, "synthetic dataset size")
        ->capture_default_str();
    game_cmd->add_option("--data-seed", game_data.seed, "synthetic dataset seed")
        ->capture_default_str();
    game_cmd
        ->add_option("--adversary", adversary,
                     "honest|greedy|nearest-neighbor|exact-perturb|exact-error-matrix")
        ->capture_default_str();
    game_cmd
        ->add_option("--eps", eps_flag,
                     "verifier threshold, or 'auto' to derive it from measured "
                     "reproduction error")
        ->capture_default_str();
    game_cmd->add_option("--eps-margin", eps_margin, "margin applied by --eps auto")
        ->capture_default_str();
    game_cmd->add_option("--domain", game_domain, "box:lo,hi | grid:v")->capture_default_str();
    game_cmd->add_option("--labels", label_kind, "onehot | real")->capture_default_str();
    game_cmd->add_option("--challenge-seed", challenge_seed, "verifier step choice seed")
        ->capture_default_str();
    game_cmd->add_option("--adversary-seed", adversary_seed, "adversary rng seed")
        ->capture_default_str();
    game_cmd->add_option("--scale", scale, "perturbation Frobenius norm")->capture_default_str();
    game_cmd->add_option("--pool", pool, "greedy pool size (0 = 10*b)")->capture_default_str();
    game_cmd->add_option("--candidates", candidates, "greedy candidate batches")
        ->capture_default_str();
    game_cmd->add_option("--max-resamples", max_resamples, "error-matrix resample cap")
        ->capture_default_str();
    game_cmd->add_option("--verifier-plan-seed", verifier_plan_seed,
                         "verifier reduction plan seed (0 = identity)")
        ->capture_default_str();
    game_cmd->add_option("--out", game_out, "also write the outcome JSON here");

    // ---- sweep
    auto* sweep = app.add_subcommand(
        "sweep",
        "Forging-fraction or loss-correlation experiment.\n"
        "fraction CSV: fraction,replaced,seeds,min_error,median_error,max_error\n"
        "loss-corr CSV: example_index,step,loss,approx_error (Spearman on stderr)");
    std::string sweep_trace, sweep_mode = "fraction", fractions, sweep_out;
    DataSpec sweep_data;
    std::string sweep_data_flag = "synthetic";
    std::size_t sweep_seeds = 20, sweep_examples = 8, sweep_stride = 20, sweep_pool = 0,
                sweep_candidates = 100;
    std::uint64_t sweep_seed_base = 1000;
    sweep->add_option("--trace", sweep_trace, "trace manifest path")->required();
    sweep->add_option("--data", sweep_data_flag, "synthetic | idx:<images>,<labels>")
        ->capture_default_str();
    sweep->add_option("--data-n", sweep_data.count, "synthetic dataset size")
        ->capture_default_str();
    sweep->add_option("--data-seed", sweep_data.seed, "synthetic dataset seed")
        ->capture_default_str();
    sweep->add_option("--mode", sweep_mode, "fraction | loss-corr")->capture_default_str();
    sweep->add_option("--fractions", fractions, "comma list; default 1/b,0.25,0.5,1");
    sweep->add_option("--seeds", sweep_seeds, "seeds per fraction")->capture_default_str();
    sweep->add_option("--seed-base", sweep_seed_base, "first seed")->capture_default_str();
    sweep->add_option("--examples", sweep_examples, "probed examples (loss-corr)")
        ->capture_default_str();
    sweep->add_option("--stride", sweep_stride, "checkpoint stride (loss-corr)")
        ->capture_default_str();
    sweep->add_option("--pool", sweep_pool, "candidate pool size (0 = 10*b)")
        ->capture_default_str();
    sweep->add_option("--candidates", sweep_candidates, "greedy candidate batches")
        ->capture_default_str();
    sweep->add_option("--out", sweep_out, "CSV output path")->required();

    // ---- brute
    auto* brute = app.add_subcommand(
        "brute",
        "Exhaustive forgery search over a pixel grid.\n"
        "CSV: one row per v, one column per b; cells read yes:/no:/?:<exact count>\n"
        "(yes = forgery found, no = exhaustively ruled out, ? = beyond --budget)");
    std::string v_csv = "2,3,4,5,6", b_csv = "1,2,3,4,5", brute_out;
    std::size_t bd = 4, bn = 3, hidden = 0, jobs = 0;
    std::uint64_t brute_seed = env_seed_fallback(), budget = 20'000'000;
    double tol = 1e-10;
    brute->add_option("--d", bd, "input features")->capture_default_str();
    brute->add_option("--n", bn, "classes")->capture_default_str();
    brute->add_option("--v", v_csv, "pixel level counts")->capture_default_str();
    brute->add_option("--b", b_csv, "batch sizes")->capture_default_str();
    brute->add_option("--hidden", hidden, "hidden units (0 = single-layer model)")
        ->capture_default_str();
    brute->add_option("--seed", brute_seed, "model/batch seed");
    brute->add_option("--tol", tol, "gradient match tolerance")->capture_default_str();
    brute->add_option("--budget", budget, "max batches per cell; larger cells print '?'")
        ->capture_default_str();
    brute->add_option("--jobs", jobs, "worker threads (0 = hardware)")->capture_default_str();
    brute->add_option("--out", brute_out, "CSV output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            parse_data_flag(data_flag, dspec);
            return cmd_train(arch, act, batch, steps, lr, seed, dspec, domain_flag, out);
        }
        if (*repr) return cmd_repr(trace_path, repeats, plan_seed, strategy, repr_out);
        if (*game_cmd) {
            parse_data_flag(game_data_flag, game_data);
            return cmd_game(game_trace, game_data, adversary, eps_flag, eps_margin, game_domain,
                            label_kind, challenge_seed, adversary_seed, scale, pool, candidates,
                            max_resamples, verifier_plan_seed, game_out);
        }
        if (*sweep) {
            parse_data_flag(sweep_data_flag, sweep_data);
            return cmd_sweep(sweep_trace, sweep_data, sweep_mode, fractions, sweep_seeds,
                             sweep_seed_base, sweep_examples, sweep_stride, sweep_pool,
                             sweep_candidates, sweep_out);
        }
        if (*brute) {
            return cmd_brute(bd, bn, v_csv, b_csv, hidden, brute_seed, tol, budget, jobs,
                             brute_out);
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
