#include "labelset/experiment.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "labelset/rng.hpp"

namespace labelset {

namespace {

using nlohmann::json;

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::IoError, "cannot open for writing: " + path.string());
    out << text;
    require(out.good(), ErrorCode::IoError, "write failed: " + path.string());
}

std::uint64_t lprime_mask_from_names(const json& names, const LabelSpace& labels) {
    std::uint64_t mask = 0;
    for (const auto& item : names) {
        require(item.is_string(), ErrorCode::ConfigInvalid, "lprime entries must be label names");
        try {
            mask |= std::uint64_t{1} << labels.index_of(item.get<std::string>());
        } catch (const Error&) {
            raise(ErrorCode::ConfigInvalid,
                  "lprime references unknown label: " + item.get<std::string>());
        }
    }
    return mask;
}

std::vector<std::string> lprime_names(std::uint64_t mask, const LabelSpace& labels) {
    std::vector<std::string> names;
    for (std::uint32_t c = 0; c < labels.num_labels(); ++c) {
        if ((mask >> c) & 1u) names.push_back(labels.name(c));
    }
    return names;
}

LossSpec loss_spec_from_json(const json& j) {
    require(j.contains("kind"), ErrorCode::ConfigInvalid, "loss entry needs a kind");
    LossSpec spec;
    spec.kind = loss_kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("alpha")) spec.alpha = j.at("alpha").get<int>();
    if (j.contains("epsilon")) spec.epsilon = j.at("epsilon").get<double>();
    if (j.contains("log_floor")) spec.log_floor = j.at("log_floor").get<double>();
    spec.validate();
    return spec;
}

std::filesystem::path case_path(const std::filesystem::path& dir, const std::string& id,
                                const char* suffix) {
    return dir / (id + "_" + suffix + ".lsv");
}

std::filesystem::path model_path(const std::filesystem::path& dir, LossKind kind) {
    return dir / ("model_" + std::string(to_string(kind)) + ".json");
}

double population_std(const std::vector<double>& values, double mean) {
    if (values.empty()) return 0.0;
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(values.size()));
}

}  // namespace

PhantomConfig ExperimentConfig::phantom_config(const VolumeSpec& volume) const {
    PhantomConfig pc;
    pc.dims = dims;
    pc.num_labels = labels.num_labels();
    pc.noise_sigma = noise_sigma;
    pc.class_means = class_means;
    pc.shell_radii = shell_radii;
    pc.seed = volume.seed;
    return pc;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        raise(ErrorCode::ConfigInvalid, std::string("JSON parse error: ") + e.what());
    }

    try {
        ExperimentConfig cfg;
        require(j.contains("labels"), ErrorCode::ConfigInvalid, "config needs a labels array");
        cfg.labels = LabelSpace(j.at("labels").get<std::vector<std::string>>());

        require(j.contains("dims"), ErrorCode::ConfigInvalid, "config needs dims");
        const auto dims = j.at("dims").get<std::vector<std::uint32_t>>();
        require(dims.size() == 3, ErrorCode::ConfigInvalid, "dims must have 3 entries");
        cfg.dims = Dims{dims[0], dims[1], dims[2]};

        cfg.noise_sigma = j.value("noise_sigma", 0.0);
        cfg.seed = j.value("seed", std::uint64_t{0});

        const std::uint32_t k = cfg.labels.num_labels();
        cfg.class_means = j.contains("class_means")
                              ? j.at("class_means").get<std::vector<double>>()
                              : default_class_means(k);
        cfg.shell_radii = j.contains("shell_radii")
                              ? j.at("shell_radii").get<std::vector<double>>()
                              : default_shell_radii(k);

        if (j.contains("spacing")) {
            const auto s = j.at("spacing").get<std::vector<double>>();
            require(s.size() == 3, ErrorCode::ConfigInvalid, "spacing must have 3 entries");
            cfg.spacing = Spacing{s[0], s[1], s[2]};
        }

        require(j.contains("volumes") && j.at("volumes").is_array() && !j.at("volumes").empty(),
                ErrorCode::ConfigInvalid, "config needs a non-empty volumes array");
        std::size_t index = 0;
        for (const auto& v : j.at("volumes")) {
            VolumeSpec spec;
            require(v.contains("id"), ErrorCode::ConfigInvalid, "volume entry needs an id");
            spec.id = v.at("id").get<std::string>();
            const std::string role = v.value("role", "train");
            require(role == "train" || role == "test", ErrorCode::ConfigInvalid,
                    "volume role must be train or test");
            spec.is_test = role == "test";
            if (v.contains("lprime")) {
                spec.lprime_mask = lprime_mask_from_names(v.at("lprime"), cfg.labels);
                require(spec.lprime_mask != cfg.labels.full_mask(), ErrorCode::ConfigInvalid,
                        "lprime must be a proper subset of the label space");
            }
            spec.seed = mix_seed(cfg.seed, index++);
            cfg.volumes.push_back(std::move(spec));
        }
        for (std::size_t a = 0; a < cfg.volumes.size(); ++a) {
            for (std::size_t b = a + 1; b < cfg.volumes.size(); ++b) {
                require(cfg.volumes[a].id != cfg.volumes[b].id, ErrorCode::ConfigInvalid,
                        "duplicate volume id: " + cfg.volumes[a].id);
            }
        }

        require(j.contains("losses") && j.at("losses").is_array() && !j.at("losses").empty(),
                ErrorCode::ConfigInvalid, "config needs a non-empty losses array");
        for (const auto& l : j.at("losses")) cfg.losses.push_back(loss_spec_from_json(l));

        if (j.contains("train")) {
            const auto& t = j.at("train");
            cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
            cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
            cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs);
            cfg.train.early_stop_patience =
                t.value("early_stop_patience", cfg.train.early_stop_patience);
            cfg.train.split_fraction = t.value("split_fraction", cfg.train.split_fraction);
        }
        cfg.train.seed = mix_seed(cfg.seed, 0xABCDEF);
        cfg.train.validate();

        // Surfaces bad means/radii at parse time rather than mid-run.
        if (!cfg.volumes.empty()) cfg.phantom_config(cfg.volumes.front()).validate();

        return cfg;
    } catch (const json::exception& e) {
        raise(ErrorCode::ConfigInvalid, std::string("config error: ") + e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::IoError, "cannot open config: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

void run_generate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    json manifest;
    manifest["labels"] = cfg.labels.names();
    manifest["dims"] = {cfg.dims.x, cfg.dims.y, cfg.dims.z};
    manifest["noise_sigma"] = cfg.noise_sigma;
    manifest["cases"] = json::array();

    for (const VolumeSpec& volume : cfg.volumes) {
        const Phantom phantom = generate(cfg.phantom_config(volume), volume.lprime_mask);
        write_volume(case_path(out_dir, volume.id, "features"),
                     feature_volume(phantom.dims, kFeatureChannels, phantom.features.values));
        write_volume(case_path(out_dir, volume.id, "truth"), to_volume(phantom.truth));
        write_volume(case_path(out_dir, volume.id, "partial"), to_volume(phantom.partial));

        json entry;
        entry["id"] = volume.id;
        entry["role"] = volume.is_test ? "test" : "train";
        entry["lprime"] = lprime_names(volume.lprime_mask, cfg.labels);
        entry["seed"] = volume.seed;
        manifest["cases"].push_back(entry);
    }

    write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

Phantom load_case(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                  const VolumeSpec& volume) {
    const auto features_path = case_path(out_dir, volume.id, "features");
    const auto truth_path = case_path(out_dir, volume.id, "truth");
    const auto partial_path = case_path(out_dir, volume.id, "partial");
    for (const auto& p : {features_path, truth_path, partial_path}) {
        require(std::filesystem::exists(p), ErrorCode::MissingData,
                "generated volume not found (run generate first): " + p.string());
    }

    const Volume features = read_volume(features_path);
    require(features.kind == VolumeKind::FeatureMap && features.dims == cfg.dims,
            ErrorCode::MissingData, "unexpected feature volume for case " + volume.id);

    Phantom phantom{cfg.dims,
                    FeatureMap{cfg.dims, features.channels, to_features(features)},
                    to_labelset_map(read_volume(truth_path)),
                    to_labelset_map(read_volume(partial_path)),
                    volume.lprime_mask};
    return phantom;
}

std::vector<VolumeSpec> training_subset(const ExperimentConfig& cfg, LossKind kind) {
    std::vector<VolumeSpec> subset;
    for (const VolumeSpec& v : cfg.volumes) {
        if (v.is_test) continue;
        if (kind == LossKind::MeanClassDice && v.lprime_mask != 0) continue;
        subset.push_back(v);
    }
    require(!subset.empty(), ErrorCode::MissingData,
            std::string("no training volumes available for ") + std::string(to_string(kind)));
    return subset;
}

TrainResult run_train(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                      const LossSpec& loss) {
    const std::vector<VolumeSpec> subset = training_subset(cfg, loss.kind);
    std::vector<Phantom> phantoms;
    phantoms.reserve(subset.size());
    for (const VolumeSpec& v : subset) phantoms.push_back(load_case(cfg, out_dir, v));

    // Every loss trains under the same seed, so the split and batch order are
    // identical across the comparison.
    const TrainResult result = train(phantoms, loss, cfg.train);

    write_text_file(model_path(out_dir, loss.kind), model_to_json(result.model));
    std::vector<TrainLogRow> rows;
    rows.reserve(result.log.size() * 2);
    for (const EpochLog& e : result.log) {
        rows.push_back(TrainLogRow{e.epoch, "train", e.train_loss});
        rows.push_back(TrainLogRow{e.epoch, "val", e.val_loss});
    }
    write_train_log_csv(out_dir / ("trainlog_" + std::string(to_string(loss.kind)) + ".csv"), rows);
    return result;
}

std::vector<MetricsRow> run_evaluate(const ExperimentConfig& cfg,
                                     const std::filesystem::path& out_dir, const LossSpec& loss) {
    const auto mpath = model_path(out_dir, loss.kind);
    require(std::filesystem::exists(mpath), ErrorCode::MissingData,
            "model not found (run train first): " + mpath.string());
    std::ifstream in(mpath);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const Model model = model_from_json(text);

    std::vector<MetricsRow> rows;
    for (const VolumeSpec& v : cfg.volumes) {
        if (!v.is_test) continue;
        const Phantom phantom = load_case(cfg, out_dir, v);
        const HardSeg predicted = argmax_seg(forward(model, phantom));
        const HardSeg truth = to_hard_seg(phantom.truth);
        const CaseMetrics metrics = evaluate_case(predicted, truth, cfg.spacing);
        for (std::uint32_t c = 0; c < cfg.labels.num_labels(); ++c) {
            rows.push_back(MetricsRow{v.id, cfg.labels.name(c), metrics.dsc[c], metrics.hd95[c]});
        }
    }
    require(!rows.empty(), ErrorCode::MissingData, "config has no test volumes");

    write_metrics_csv(out_dir / ("metrics_" + std::string(to_string(loss.kind)) + ".csv"), rows);
    return rows;
}

CompareSummary run_compare(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    CompareSummary summary;
    for (const VolumeSpec& v : cfg.volumes) summary.num_test_cases += v.is_test;

    json out_json;
    out_json["labels"] = cfg.labels.names();
    out_json["num_test_cases"] = summary.num_test_cases;
    out_json["losses"] = json::array();
    out_json["dsc_mean"] = json::object();
    out_json["dsc_std"] = json::object();
    out_json["hd95_mean"] = json::object();
    out_json["hd95_std"] = json::object();

    for (const LossSpec& loss : cfg.losses) {
        run_train(cfg, out_dir, loss);
        const std::vector<MetricsRow> rows = run_evaluate(cfg, out_dir, loss);

        const std::string kind_name{to_string(loss.kind)};
        out_json["losses"].push_back(kind_name);
        auto& per_class = summary.per_loss_class[kind_name];

        for (std::uint32_t c = 0; c < cfg.labels.num_labels(); ++c) {
            const std::string& cls = cfg.labels.name(c);
            std::vector<double> dsc;
            std::vector<double> hd;
            for (const MetricsRow& r : rows) {
                if (r.class_name != cls) continue;
                dsc.push_back(r.dsc);
                if (r.hd95.has_value()) hd.push_back(*r.hd95);
            }

            ClassStats stats;
            double mean = 0.0;
            for (double v : dsc) mean += v;
            mean /= static_cast<double>(dsc.size());
            stats.dsc_mean = mean;
            stats.dsc_std = population_std(dsc, mean);
            stats.hd95_defined = hd.size();
            if (!hd.empty()) {
                double hmean = 0.0;
                for (double v : hd) hmean += v;
                hmean /= static_cast<double>(hd.size());
                stats.hd95_mean = hmean;
                stats.hd95_std = population_std(hd, hmean);
            }
            per_class[cls] = stats;

            out_json["dsc_mean"][kind_name][cls] = stats.dsc_mean;
            out_json["dsc_std"][kind_name][cls] = stats.dsc_std;
            out_json["hd95_mean"][kind_name][cls] =
                stats.hd95_mean.has_value() ? json(*stats.hd95_mean) : json(nullptr);
            out_json["hd95_std"][kind_name][cls] =
                stats.hd95_std.has_value() ? json(*stats.hd95_std) : json(nullptr);
            out_json["hd95_defined"][kind_name][cls] = stats.hd95_defined;
        }
    }

    write_text_file(out_dir / "summary.json", out_json.dump(2) + "\n");
    return summary;
}

std::string model_to_json(const Model& model) {
    json j;
    j["num_labels"] = model.num_labels;
    j["feature_channels"] = model.feature_channels;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    return j.dump(2) + "\n";
}

Model model_from_json(const std::string& json_text) {
    try {
        const json j = json::parse(json_text);
        Model model;
        model.num_labels = j.at("num_labels").get<std::uint32_t>();
        model.feature_channels = j.at("feature_channels").get<std::uint32_t>();
        model.weights = j.at("weights").get<std::vector<double>>();
        model.bias = j.at("bias").get<std::vector<double>>();
        require(model.weights.size() ==
                        std::size_t(model.num_labels) * model.feature_channels &&
                    model.bias.size() == model.num_labels,
                ErrorCode::ConfigInvalid, "model arrays do not match the declared shape");
        return model;
    } catch (const json::exception& e) {
        raise(ErrorCode::ConfigInvalid, std::string("model JSON error: ") + e.what());
    }
}

}  // namespace labelset
