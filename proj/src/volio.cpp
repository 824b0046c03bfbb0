#include "labelset/volio.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace labelset {

namespace {

constexpr char kMagic[4] = {'L', 'S', 'V', '1'};
constexpr std::size_t kHeaderSize = 19;

void put_u32(std::string& buf, std::uint32_t v) {
    buf.push_back(static_cast<char>(v & 0xFF));
    buf.push_back(static_cast<char>((v >> 8) & 0xFF));
    buf.push_back(static_cast<char>((v >> 16) & 0xFF));
    buf.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
    return v;
}

std::size_t payload_bytes(const Volume& v) {
    const std::size_t n = v.dims.voxel_count();
    return v.kind == VolumeKind::LabelSetMap ? n * 8 : n * v.channels * 4;
}

void check_volume(const Volume& v) {
    require(v.dims.x > 0 && v.dims.y > 0 && v.dims.z > 0, ErrorCode::InvalidHeader,
            "dims must be nonzero");
    require(v.channels >= 1, ErrorCode::InvalidHeader, "channels must be at least 1");
    const std::size_t n = v.dims.voxel_count();
    if (v.kind == VolumeKind::LabelSetMap) {
        require(v.masks.size() == n, ErrorCode::ShapeMismatch, "mask count does not match dims");
        require(v.channels <= kMaxLabels, ErrorCode::InvalidHeader,
                "label-set volumes are capped at 64 channels");
        const std::uint64_t valid =
            v.channels == kMaxLabels ? ~std::uint64_t{0} : (std::uint64_t{1} << v.channels) - 1;
        for (std::uint64_t mask : v.masks) {
            require((mask & ~valid) == 0, ErrorCode::InvalidBitmask,
                    "bitmask sets a bit at or above the channel count");
        }
    } else {
        require(v.values.size() == n * v.channels, ErrorCode::ShapeMismatch,
                "value count does not match dims x channels");
        for (float x : v.values) {
            require(std::isfinite(x), ErrorCode::NonFiniteValue, "payload value is not finite");
        }
    }
}

}  // namespace

Volume to_volume(const LabelSetMap& map) {
    Volume v;
    v.kind = VolumeKind::LabelSetMap;
    v.dims = map.dims();
    v.channels = static_cast<std::uint16_t>(map.num_labels());
    v.masks.reserve(map.size());
    for (const LabelSet& s : map.voxels()) v.masks.push_back(s.mask());
    return v;
}

Volume to_volume(const ProbMap& map) {
    Volume v;
    v.kind = VolumeKind::ProbMap;
    v.dims = map.dims();
    v.channels = static_cast<std::uint16_t>(map.num_labels());
    v.values.reserve(map.values().size());
    for (double x : map.values()) v.values.push_back(static_cast<float>(x));
    return v;
}

Volume feature_volume(Dims dims, std::uint16_t channels, const std::vector<double>& values) {
    Volume v;
    v.kind = VolumeKind::FeatureMap;
    v.dims = dims;
    v.channels = channels;
    v.values.reserve(values.size());
    for (double x : values) v.values.push_back(static_cast<float>(x));
    check_volume(v);
    return v;
}

LabelSetMap to_labelset_map(const Volume& v) {
    require(v.kind == VolumeKind::LabelSetMap, ErrorCode::InvalidArgument,
            "volume does not hold a label-set map");
    std::vector<LabelSet> voxels;
    voxels.reserve(v.masks.size());
    for (std::uint64_t mask : v.masks) voxels.push_back(LabelSet(mask));
    return LabelSetMap(v.dims, v.channels, std::move(voxels));
}

ProbMap to_probmap(const Volume& v) {
    require(v.kind == VolumeKind::ProbMap, ErrorCode::InvalidArgument,
            "volume does not hold a probability map");
    std::vector<double> values(v.values.begin(), v.values.end());
    return ProbMap(v.dims, v.channels, std::move(values));
}

std::vector<double> to_features(const Volume& v) {
    require(v.kind == VolumeKind::FeatureMap, ErrorCode::InvalidArgument,
            "volume does not hold a feature map");
    return std::vector<double>(v.values.begin(), v.values.end());
}

void write_volume(const std::filesystem::path& path, const Volume& v) {
    check_volume(v);

    std::string buf;
    buf.reserve(kHeaderSize + payload_bytes(v));
    buf.append(kMagic, 4);
    buf.push_back(static_cast<char>(v.kind));
    put_u32(buf, v.dims.x);
    put_u32(buf, v.dims.y);
    put_u32(buf, v.dims.z);
    buf.push_back(static_cast<char>(v.channels & 0xFF));
    buf.push_back(static_cast<char>((v.channels >> 8) & 0xFF));

    if (v.kind == VolumeKind::LabelSetMap) {
        for (std::uint64_t mask : v.masks) put_u64(buf, mask);
    } else {
        for (float x : v.values) {
            std::uint32_t bits;
            std::memcpy(&bits, &x, 4);
            put_u32(buf, bits);
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::IoError, "cannot open for writing: " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    require(out.good(), ErrorCode::IoError, "write failed: " + path.string());
}

Volume read_volume(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::IoError, "cannot open for reading: " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(in.good() || in.eof(), ErrorCode::IoError, "read failed: " + path.string());

    require(data.size() >= kHeaderSize, ErrorCode::TruncatedFile, "file shorter than the header");
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    require(std::memcmp(bytes, kMagic, 4) == 0, ErrorCode::BadMagic, "magic is not LSV1");

    Volume v;
    const std::uint8_t kind = bytes[4];
    require(kind <= 2, ErrorCode::InvalidHeader, "unknown volume kind");
    v.kind = static_cast<VolumeKind>(kind);
    v.dims = Dims{get_u32(bytes + 5), get_u32(bytes + 9), get_u32(bytes + 13)};
    v.channels = static_cast<std::uint16_t>(bytes[17] | (bytes[18] << 8));
    require(v.dims.x > 0 && v.dims.y > 0 && v.dims.z > 0, ErrorCode::InvalidHeader,
            "dims must be nonzero");
    require(v.channels >= 1, ErrorCode::InvalidHeader, "channels must be at least 1");

    const std::size_t expected = payload_bytes(v);
    require(data.size() - kHeaderSize >= expected, ErrorCode::TruncatedFile,
            "payload shorter than dims imply");
    require(data.size() - kHeaderSize == expected, ErrorCode::IoError,
            "unexpected trailing bytes after payload");

    const unsigned char* payload = bytes + kHeaderSize;
    const std::size_t n = v.dims.voxel_count();
    if (v.kind == VolumeKind::LabelSetMap) {
        v.masks.reserve(n);
        for (std::size_t i = 0; i < n; ++i) v.masks.push_back(get_u64(payload + i * 8));
    } else {
        v.values.reserve(n * v.channels);
        for (std::size_t i = 0; i < n * v.channels; ++i) {
            const std::uint32_t bits = get_u32(payload + i * 4);
            float x;
            std::memcpy(&x, &bits, 4);
            v.values.push_back(x);
        }
    }
    check_volume(v);
    return v;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::IoError, "cannot open for writing: " + path.string());
    out << "case_id,class_name,dsc,hd95_vox\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.case_id << ',' << r.class_name << ',';
        std::snprintf(buf, sizeof buf, "%.6f", r.dsc);
        out << buf << ',';
        if (r.hd95.has_value()) {
            std::snprintf(buf, sizeof buf, "%.6f", *r.hd95);
            out << buf;
        }
        out << '\n';
    }
    require(out.good(), ErrorCode::IoError, "write failed: " + path.string());
}

void write_train_log_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::IoError, "cannot open for writing: " + path.string());
    out << "epoch,split,loss\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.9f", r.loss);
        out << r.epoch << ',' << r.split << ',' << buf << '\n';
    }
    require(out.good(), ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace labelset
