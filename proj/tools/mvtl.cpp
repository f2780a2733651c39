#include "mvtl/dataio.hpp"
#include "mvtl/experiment.hpp"
#include "mvtl/log.hpp"

#include <CLI11.hpp>

#include <deque>
#include <iostream>
#include <optional>

using namespace mvtl;
namespace ex = mvtl::experiment;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::string out;
};

// Command-line values that override keys of the config file.
struct Overrides {
    std::deque<std::pair<std::string, std::string>> values;
    std::vector<std::string> sets;

    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto* slot = &values.emplace_back(key, std::string{}).second;
        app->add_option(flag, *slot, help);
    }
};

KeyValues settings(const Globals& g, const Overrides& o) {
    KeyValues kv = g.config.empty() ? KeyValues{} : KeyValues::load(g.config);
    for (const auto& [key, value] : o.values)
        if (!value.empty()) kv.set(key, value);
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ex::UsageError("--set expects key=value, got '" + s + "'");
        kv.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (g.seed) kv.set("seed", std::to_string(*g.seed));
    if (g.threads) kv.set("threads", std::to_string(*g.threads));
    return kv;
}

void add_train_flags(CLI::App* app, Overrides& o) {
    o.add(app, "--features", "features_dir", "Directory of feature CSVs");
    o.add(app, "--tasks", "tasks", "Comma-separated SOURCE>TARGET pairs, or 'all'");
    o.add(app, "--method", "method", "mvtl or tsk (single-view baselines)");
    o.add(app, "-K,--rules", "K", "Fuzzy rules per view");
    o.add(app, "--m", "m", "View-weight fuzzy index");
    o.add(app, "--lambda-pg", "lambda_pg", "Consequent ridge weight");
    o.add(app, "--lambda-t", "lambda_t", "Knowledge-transfer weight (0 disables)");
    o.add(app, "--lambda-d", "lambda_d", "Distribution-matching weight (0 disables)");
    o.add(app, "--lambda-un", "lambda_un", "Cross-view consensus weight");
    o.add(app, "--iters", "max_iters", "Alternating-optimization sweeps");
    o.add(app, "--folds", "folds", "Cross-validation folds");
    o.add(app, "--label-fraction", "label_fraction", "Fraction of target training labels kept");
    app->add_option("--set", o.sets, "Extra config entries as key=value");
}

void print_written(const std::vector<std::string>& files) {
    for (const auto& f : files) std::cout << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-view transfer-learning TSK fuzzy classifier"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "key=value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "Output directory");

    Overrides o;

    auto* synth = app.add_subcommand("synth", "Write a synthetic two-domain EEG corpus (D1, D2)");
    double shift = 1.0;
    synth->add_option("--shift", shift, "Target domain shift magnitude");

    auto* extract = app.add_subcommand("extract", "Compute three-view features for every dataset directory");
    std::string raw_dir;
    double window_s = 1.0, overlap = 0.5, keep = 1.0;
    std::string boundary = "discard";
    extract->add_option("raw_dir", raw_dir, "Directory holding one subdirectory per dataset")->required();
    extract->add_option("--window", window_s, "Window length in seconds");
    extract->add_option("--overlap", overlap, "Window overlap inside seizures")->check(CLI::Range(0.0, 0.99));
    extract->add_option("--keep", keep, "Fraction of normal windows kept")->check(CLI::Range(0.0, 1.0));
    extract->add_option("--boundary", boundary, "discard or normal")->check(CLI::IsMember({"discard", "normal"}));

    auto* transfer = app.add_subcommand("transfer", "Cross-validated transfer runs");
    add_train_flags(transfer, o);

    auto* grid = app.add_subcommand("gridsearch", "Nested cross-validated grid search");
    add_train_flags(grid, o);

    auto* report = app.add_subcommand("report", "Summarize a results CSV");
    std::string results_path;
    report->add_option("results", results_path, "results.csv")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        const std::string out = g.out.empty() ? "." : g.out;
        if (*synth) {
            SynthSpec spec;
            spec.shift_magnitude = shift;
            print_written(ex::cmd_synth(out, spec, g.seed.value_or(42)));
        } else if (*extract) {
            FeatureConfig fc;
            fc.window.length_s = window_s;
            fc.window.overlap_frac = overlap;
            fc.window.negative_keep_frac = keep;
            fc.window.boundary = boundary == "normal" ? BoundaryPolicy::as_normal : BoundaryPolicy::discard;
            fc.seed = g.seed.value_or(42);
            print_written(ex::cmd_extract(raw_dir, out, fc));
        } else if (*transfer) {
            print_written(ex::cmd_transfer(ex::config_from(settings(g, o)), out));
        } else if (*grid) {
            print_written(ex::cmd_gridsearch(ex::config_from(settings(g, o)), out));
        } else if (*report) {
            std::string text;
            ex::cmd_report(results_path, out, &text);
            std::cout << text;
        }
    } catch (const ex::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
