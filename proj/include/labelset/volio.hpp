#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "labelset/labelspace.hpp"

namespace labelset {

// LSV1 container: 19-byte header (magic "LSV1", kind u8, dims 3 x u32 LE,
// channels u16 LE) followed by the raw payload. Kind 0 stores one u64 LE
// bitmask per voxel; kinds 1-2 store channels x f32 LE per voxel,
// voxel-major. Row-major voxel order, x fastest.
enum class VolumeKind : std::uint8_t {
    LabelSetMap = 0,
    ProbMap = 1,
    FeatureMap = 2,
};

struct Volume {
    VolumeKind kind = VolumeKind::LabelSetMap;
    Dims dims;
    std::uint16_t channels = 0;
    std::vector<std::uint64_t> masks;  // kind 0
    std::vector<float> values;         // kinds 1-2
};

Volume to_volume(const LabelSetMap& map);
// Stored at 32-bit precision; computation stays 64-bit.
Volume to_volume(const ProbMap& map);
Volume feature_volume(Dims dims, std::uint16_t channels, const std::vector<double>& values);

LabelSetMap to_labelset_map(const Volume& v);
ProbMap to_probmap(const Volume& v);
std::vector<double> to_features(const Volume& v);

void write_volume(const std::filesystem::path& path, const Volume& v);
Volume read_volume(const std::filesystem::path& path);

struct MetricsRow {
    std::string case_id;
    std::string class_name;
    double dsc = 0.0;
    std::optional<double> hd95;  // empty CSV cell when undefined
};

// Header `case_id,class_name,dsc,hd95_vox`, 6 decimal places, LF endings.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);

struct TrainLogRow {
    std::size_t epoch = 0;
    std::string split;
    double loss = 0.0;
};

// Header `epoch,split,loss`.
void write_train_log_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& rows);

}  // namespace labelset
