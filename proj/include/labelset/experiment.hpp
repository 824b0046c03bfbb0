#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "labelset/labelspace.hpp"
#include "labelset/losses.hpp"
#include "labelset/metrics.hpp"
#include "labelset/phantom.hpp"
#include "labelset/trainer.hpp"
#include "labelset/volio.hpp"

namespace labelset {

struct VolumeSpec {
    std::string id;
    bool is_test = false;           // role: train or test
    std::uint64_t lprime_mask = 0;  // merged classes for this volume; 0 = fully annotated
    std::uint64_t seed = 0;         // derived from the global seed
};

// One JSON document binds the whole experiment: the label space, the phantom
// family, per-volume merged-class assignments, the loss list, and training
// hyperparameters.
struct ExperimentConfig {
    LabelSpace labels{{"a", "b"}};
    Dims dims;
    double noise_sigma = 0.0;
    std::vector<double> class_means;
    std::vector<double> shell_radii;
    Spacing spacing;
    std::uint64_t seed = 0;
    std::vector<VolumeSpec> volumes;
    std::vector<LossSpec> losses;
    TrainConfig train;

    PhantomConfig phantom_config(const VolumeSpec& volume) const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Writes <id>_features.lsv / <id>_truth.lsv / <id>_partial.lsv per case plus
// manifest.json. Deterministic given the config.
void run_generate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Reads one generated case back; MissingData when files are absent.
Phantom load_case(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                  const VolumeSpec& volume);

// Training volumes a loss kind may see: the fully supervised baseline only
// trains on fully annotated volumes, the label-set losses on all of them.
std::vector<VolumeSpec> training_subset(const ExperimentConfig& cfg, LossKind kind);

// Trains one model, writes model_<kind>.json and trainlog_<kind>.csv.
TrainResult run_train(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                      const LossSpec& loss);

// Evaluates model_<kind>.json on the test volumes, writes metrics_<kind>.csv.
std::vector<MetricsRow> run_evaluate(const ExperimentConfig& cfg,
                                     const std::filesystem::path& out_dir, const LossSpec& loss);

struct ClassStats {
    double dsc_mean = 0.0;
    double dsc_std = 0.0;
    std::optional<double> hd95_mean;  // over cases where it is defined
    std::optional<double> hd95_std;
    std::size_t hd95_defined = 0;
};

struct CompareSummary {
    // (loss kind name, class name) -> stats over test cases
    std::map<std::string, std::map<std::string, ClassStats>> per_loss_class;
    std::size_t num_test_cases = 0;
};

// Trains and evaluates every configured loss, writes per-loss CSVs and
// summary.json.
CompareSummary run_compare(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

std::string model_to_json(const Model& model);
Model model_from_json(const std::string& json_text);

}  // namespace labelset
