// Command-line front end: phantom generation, training, evaluation, the
// property suites, and the four-way loss comparison.
//
// Exit codes: 0 success, 1 property or training failure, 2 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "labelset/checks.hpp"
#include "labelset/errors.hpp"
#include "labelset/experiment.hpp"

namespace {

using namespace labelset;

ExperimentConfig load_with_seed_override(const std::string& config_path, bool has_seed,
                                         std::uint64_t seed) {
    ExperimentConfig cfg = load_config(config_path);
    if (has_seed) {
        // Rebuild with the override so every derived stream follows it.
        std::ifstream in(config_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        auto j = nlohmann::json::parse(text);
        j["seed"] = seed;
        cfg = parse_config(j.dump());
    }
    return cfg;
}

const LossSpec& find_loss(const ExperimentConfig& cfg, const std::string& name) {
    if (name.empty()) return cfg.losses.front();
    const LossKind kind = loss_kind_from_name(name);
    for (const LossSpec& spec : cfg.losses) {
        if (spec.kind == kind) return spec;
    }
    raise(ErrorCode::ConfigInvalid, "loss not present in config: " + name);
}

int run_check(const std::string& suite) {
    std::vector<PropertyResult> results;
    if (suite == "axioms") {
        results = check_axioms();
    } else if (suite == "grad") {
        results = check_gradients();
    } else if (suite == "oracle") {
        results = check_oracle();
    } else {
        std::cerr << "unknown check suite: " << suite << " (expected axioms|grad|oracle)\n";
        return 2;
    }
    print_report(std::cout, results);
    if (!all_pass(results)) {
        for (const auto& r : results) {
            if (!r.pass) {
                std::cerr << "first failing property: " << r.name << "\n";
                break;
            }
        }
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"label-set loss experiment harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string loss_name;
    std::string suite;
    std::uint64_t seed = 0;
    bool has_seed = false;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config) {
            cmd->add_option("--config", config_path, "experiment config JSON")->required();
        }
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { has_seed = true; });
    };

    CLI::App* generate = app.add_subcommand("generate", "write phantom volumes and manifest");
    add_common(generate, true);

    CLI::App* train_cmd = app.add_subcommand("train", "train one model");
    add_common(train_cmd, true);
    train_cmd->add_option("--loss", loss_name, "loss kind to train (default: first in config)");

    CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a trained model on test cases");
    add_common(evaluate, true);
    evaluate->add_option("--loss", loss_name, "loss kind to evaluate (default: first in config)");

    CLI::App* check = app.add_subcommand("check", "run a property suite");
    check->add_option("suite", suite, "axioms | grad | oracle")->required();

    CLI::App* compare = app.add_subcommand("compare", "train and evaluate every configured loss");
    add_common(compare, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate->parsed()) {
            const auto cfg = load_with_seed_override(config_path, has_seed, seed);
            run_generate(cfg, out_dir);
            std::cout << "wrote " << cfg.volumes.size() << " cases to " << out_dir << "\n";
            return 0;
        }
        if (train_cmd->parsed()) {
            const auto cfg = load_with_seed_override(config_path, has_seed, seed);
            const LossSpec& spec = find_loss(cfg, loss_name);
            const TrainResult result = run_train(cfg, out_dir, spec);
            std::cout << "trained " << to_string(spec.kind) << ": best val loss "
                      << result.best_val_loss << " at epoch " << result.best_epoch << "\n";
            return 0;
        }
        if (evaluate->parsed()) {
            const auto cfg = load_with_seed_override(config_path, has_seed, seed);
            const LossSpec& spec = find_loss(cfg, loss_name);
            const auto rows = run_evaluate(cfg, out_dir, spec);
            std::cout << "wrote " << rows.size() << " metric rows for " << to_string(spec.kind)
                      << "\n";
            return 0;
        }
        if (check->parsed()) {
            return run_check(suite);
        }
        if (compare->parsed()) {
            const auto cfg = load_with_seed_override(config_path, has_seed, seed);
            const CompareSummary summary = run_compare(cfg, out_dir);
            std::cout << "compared " << cfg.losses.size() << " losses on "
                      << summary.num_test_cases << " test cases; summary in " << out_dir
                      << "/summary.json\n";
            return 0;
        }
    } catch (const labelset::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::ConfigInvalid ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
