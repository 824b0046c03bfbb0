#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include <json.hpp>

#include "labelset/experiment.hpp"

using namespace labelset;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("labelset_exp_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

const char* kTinyConfig = R"json({
  "labels": ["background", "rim", "core"],
  "dims": [8, 8, 8],
  "noise_sigma": 0.05,
  "seed": 314,
  "volumes": [
    {"id": "t0", "role": "train"},
    {"id": "t1", "role": "train", "lprime": ["rim", "core"]},
    {"id": "t2", "role": "train"},
    {"id": "t3", "role": "train", "lprime": ["rim", "core"]},
    {"id": "e0", "role": "test"}
  ],
  "losses": [
    {"kind": "leaf_dice", "alpha": 2},
    {"kind": "mean_class_dice", "alpha": 2}
  ],
  "train": {"learning_rate": 0.02, "max_epochs": 25, "early_stop_patience": 25}
})json";

}  // namespace

TEST_CASE("config parsing binds labels, volumes, and losses") {
    const ExperimentConfig cfg = parse_config(kTinyConfig);
    CHECK(cfg.labels.num_labels() == 3);
    CHECK(cfg.dims == Dims{8, 8, 8});
    CHECK(cfg.volumes.size() == 5);
    CHECK(cfg.volumes[1].lprime_mask == 0b110);
    CHECK(cfg.volumes[4].is_test);
    CHECK_FALSE(cfg.volumes[0].is_test);
    CHECK(cfg.losses.size() == 2);
    CHECK(cfg.losses[0].kind == LossKind::LeafDice);
    CHECK(cfg.train.learning_rate == 0.02);
    CHECK(cfg.train.batch_size == 3);  // default preserved
    // Per-volume seeds are distinct and derived from the global seed.
    CHECK(cfg.volumes[0].seed != cfg.volumes[1].seed);
}

TEST_CASE("config errors") {
    SUBCASE("unknown label in lprime") {
        std::string bad = kTinyConfig;
        const auto pos = bad.find("\"rim\", \"core\"");
        bad.replace(pos, 13, "\"nothere\"");
        try {
            parse_config(bad);
            FAIL("expected ConfigInvalid");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ConfigInvalid);
        }
    }
    SUBCASE("lprime covering the whole space") {
        std::string bad = kTinyConfig;
        const auto pos = bad.find("[\"rim\", \"core\"]");
        bad.replace(pos, 15, "[\"background\", \"rim\", \"core\"]");
        CHECK_THROWS_AS(parse_config(bad), Error);
    }
    SUBCASE("duplicate ids") {
        std::string bad = kTinyConfig;
        const auto pos = bad.find("\"t1\"");
        bad.replace(pos, 4, "\"t0\"");
        CHECK_THROWS_AS(parse_config(bad), Error);
    }
    SUBCASE("unknown loss kind") {
        std::string bad = kTinyConfig;
        const auto pos = bad.find("leaf_dice");
        bad.replace(pos, 9, "nope_dice");
        CHECK_THROWS_AS(parse_config(bad), Error);
    }
    SUBCASE("not JSON at all") { CHECK_THROWS_AS(parse_config("not json"), Error); }
}

TEST_CASE("generate writes three volumes per case plus a manifest, deterministically") {
    const ExperimentConfig cfg = parse_config(kTinyConfig);
    TempDir tmp;
    run_generate(cfg, tmp.path);

    std::size_t lsv_count = 0;
    for (const auto& entry : fs::directory_iterator(tmp.path)) {
        if (entry.path().extension() == ".lsv") ++lsv_count;
    }
    CHECK(lsv_count == 3 * cfg.volumes.size());
    REQUIRE(fs::exists(tmp.path / "manifest.json"));

    const auto manifest = nlohmann::json::parse(read_bytes(tmp.path / "manifest.json"));
    CHECK(manifest.at("cases").size() == 5);
    CHECK(manifest.at("cases")[1].at("lprime") ==
          nlohmann::json(std::vector<std::string>{"rim", "core"}));
    CHECK(manifest.at("labels").size() == 3);

    // Regenerating produces bitwise identical files.
    const std::string before = read_bytes(tmp.path / "t1_features.lsv");
    TempDir tmp2;
    run_generate(cfg, tmp2.path);
    CHECK(read_bytes(tmp2.path / "t1_features.lsv") == before);
    CHECK(read_bytes(tmp2.path / "manifest.json") == read_bytes(tmp.path / "manifest.json"));
}

TEST_CASE("load_case round-trips phantoms and flags missing data") {
    const ExperimentConfig cfg = parse_config(kTinyConfig);
    TempDir tmp;
    run_generate(cfg, tmp.path);

    const Phantom direct = generate(cfg.phantom_config(cfg.volumes[1]), cfg.volumes[1].lprime_mask);
    const Phantom loaded = load_case(cfg, tmp.path, cfg.volumes[1]);
    CHECK(loaded.truth.voxels() == direct.truth.voxels());
    CHECK(loaded.partial.voxels() == direct.partial.voxels());
    // Features pass through an f32 container.
    for (std::size_t i = 0; i < loaded.features.values.size(); ++i) {
        CHECK(loaded.features.values[i] ==
              static_cast<double>(static_cast<float>(direct.features.values[i])));
    }

    try {
        load_case(cfg, tmp.path / "nowhere", cfg.volumes[0]);
        FAIL("expected MissingData");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingData);
    }
}

TEST_CASE("fully supervised baseline trains only on fully annotated volumes") {
    const ExperimentConfig cfg = parse_config(kTinyConfig);
    const auto full_only = training_subset(cfg, LossKind::MeanClassDice);
    CHECK(full_only.size() == 2);
    for (const auto& v : full_only) CHECK(v.lprime_mask == 0);

    const auto all_train = training_subset(cfg, LossKind::LeafDice);
    CHECK(all_train.size() == 4);

    // A config whose every training volume is partial starves the baseline.
    std::string bad = kTinyConfig;
    auto pos = bad.find("{\"id\": \"t0\", \"role\": \"train\"}");
    bad.replace(pos, 29, "{\"id\": \"t0\", \"role\": \"train\", \"lprime\": [\"rim\"]}");
    pos = bad.find("{\"id\": \"t2\", \"role\": \"train\"}");
    bad.replace(pos, 29, "{\"id\": \"t2\", \"role\": \"train\", \"lprime\": [\"rim\"]}");
    const ExperimentConfig starved = parse_config(bad);
    try {
        training_subset(starved, LossKind::MeanClassDice);
        FAIL("expected MissingData");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingData);
    }
}

TEST_CASE("model JSON round-trip") {
    Model m = zero_model(3, kFeatureChannels);
    m.weights[0] = 0.123456789012345;
    m.weights[7] = -2.5;
    m.bias[2] = 1e-9;
    const Model back = model_from_json(model_to_json(m));
    CHECK(back.weights == m.weights);
    CHECK(back.bias == m.bias);
    CHECK(back.num_labels == 3);
    CHECK_THROWS_AS(model_from_json("{}"), Error);
}

TEST_CASE("compare writes per-loss outputs and a summary with full coverage") {
    const ExperimentConfig cfg = parse_config(kTinyConfig);
    TempDir tmp;
    run_generate(cfg, tmp.path);
    const CompareSummary summary = run_compare(cfg, tmp.path);

    CHECK(summary.num_test_cases == 1);
    CHECK(summary.per_loss_class.size() == 2);
    for (const auto& [loss_name, per_class] : summary.per_loss_class) {
        CHECK(per_class.size() == 3);
        for (const auto& [cls, stats] : per_class) {
            CHECK(stats.dsc_mean >= 0.0);
            CHECK(stats.dsc_mean <= 1.0);
        }
    }

    for (const char* name : {"model_leaf_dice.json", "trainlog_leaf_dice.csv",
                             "metrics_leaf_dice.csv", "model_mean_class_dice.json",
                             "metrics_mean_class_dice.csv", "summary.json"}) {
        CHECK(fs::exists(tmp.path / name));
    }

    const auto summary_json = nlohmann::json::parse(read_bytes(tmp.path / "summary.json"));
    std::size_t mean_entries = 0;
    for (const auto& [loss_name, per_class] : summary_json.at("dsc_mean").items()) {
        mean_entries += per_class.size();
    }
    CHECK(mean_entries == cfg.losses.size() * cfg.labels.num_labels());

    // End-to-end determinism: a rerun reproduces the CSVs byte for byte.
    const std::string metrics_before = read_bytes(tmp.path / "metrics_leaf_dice.csv");
    const std::string summary_before = read_bytes(tmp.path / "summary.json");
    TempDir tmp2;
    run_generate(cfg, tmp2.path);
    run_compare(cfg, tmp2.path);
    CHECK(read_bytes(tmp2.path / "metrics_leaf_dice.csv") == metrics_before);
    CHECK(read_bytes(tmp2.path / "summary.json") == summary_before);
}

TEST_CASE("evaluate requires a trained model") {
    const ExperimentConfig cfg = parse_config(kTinyConfig);
    TempDir tmp;
    run_generate(cfg, tmp.path);
    try {
        run_evaluate(cfg, tmp.path, cfg.losses[0]);
        FAIL("expected MissingData");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingData);
    }
}
