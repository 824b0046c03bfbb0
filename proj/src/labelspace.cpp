#include "labelset/labelspace.hpp"

#include <cmath>
#include <unordered_set>

namespace labelset {

LabelSpace::LabelSpace(std::vector<std::string> names) : names_(std::move(names)) {
    require(names_.size() >= 2, ErrorCode::ConfigInvalid, "label space needs at least 2 labels");
    require(names_.size() <= kMaxLabels, ErrorCode::ConfigInvalid, "label space capped at 64 labels");
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
        require(!n.empty(), ErrorCode::ConfigInvalid, "label names must be non-empty");
        require(seen.insert(n).second, ErrorCode::ConfigInvalid, "duplicate label name: " + n);
    }
}

const std::string& LabelSpace::name(std::uint32_t label) const {
    require(label < num_labels(), ErrorCode::IndexOutOfRange, "label index out of range");
    return names_[label];
}

std::uint32_t LabelSpace::index_of(const std::string& name) const {
    for (std::uint32_t i = 0; i < num_labels(); ++i) {
        if (names_[i] == name) return i;
    }
    raise(ErrorCode::IndexOutOfRange, "unknown label name: " + name);
}

std::uint64_t LabelSpace::full_mask() const {
    const std::uint32_t k = num_labels();
    return k == kMaxLabels ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
}

LabelSetMap::LabelSetMap(Dims dims, std::uint32_t num_labels, std::vector<LabelSet> voxels)
    : dims_(dims), num_labels_(num_labels), voxels_(std::move(voxels)) {
    require(num_labels_ >= 2 && num_labels_ <= kMaxLabels, ErrorCode::ConfigInvalid,
            "num_labels must be in [2, 64]");
    require(dims_.voxel_count() >= 1, ErrorCode::EmptyVolume, "volume has zero voxels");
    require(voxels_.size() == dims_.voxel_count(), ErrorCode::ShapeMismatch,
            "voxel count does not match dims");

    const std::uint64_t valid = num_labels_ == kMaxLabels ? ~std::uint64_t{0}
                                                          : (std::uint64_t{1} << num_labels_) - 1;
    for (const auto& s : voxels_) {
        require((s.mask() & ~valid) == 0, ErrorCode::IndexOutOfRange,
                "label-set references a label outside the label space");
        bool known = false;
        for (const auto& d : distinct_sets_) {
            if (d == s) { known = true; break; }
        }
        if (!known) distinct_sets_.push_back(s);
    }

    is_leaf_partition_ = true;
    for (std::size_t a = 0; a < distinct_sets_.size() && is_leaf_partition_; ++a) {
        for (std::size_t b = a + 1; b < distinct_sets_.size(); ++b) {
            if (distinct_sets_[a].mask() & distinct_sets_[b].mask()) {
                is_leaf_partition_ = false;
                break;
            }
        }
    }
}

ProbMap::ProbMap(Dims dims, std::uint32_t num_labels, std::vector<double> values)
    : dims_(dims), num_labels_(num_labels), voxel_count_(dims.voxel_count()), values_(std::move(values)) {
    require(num_labels_ >= 2 && num_labels_ <= kMaxLabels, ErrorCode::ConfigInvalid,
            "num_labels must be in [2, 64]");
    require(voxel_count_ >= 1, ErrorCode::EmptyVolume, "volume has zero voxels");
    require(values_.size() == voxel_count_ * num_labels_, ErrorCode::ShapeMismatch,
            "value count does not match dims x num_labels");
}

void validate_probmap(const ProbMap& p) {
    const std::size_t n = p.size();
    const std::uint32_t k = p.num_labels();

    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t c = 0; c < k; ++c) {
            const double v = p(i, c);
            if (v < 0.0 || std::isnan(v)) {
                raise(ErrorCode::NegativeProbability,
                      "voxel " + std::to_string(i) + " class " + std::to_string(c) +
                          " has probability " + std::to_string(v));
            }
        }
    }

    double worst = 0.0;
    std::size_t worst_voxel = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::uint32_t c = 0; c < k; ++c) sum += p(i, c);
        const double dev = std::abs(sum - 1.0);
        if (dev > worst) {
            worst = dev;
            worst_voxel = i;
        }
    }
    if (worst > kRowSumTolerance) {
        raise(ErrorCode::RowSumViolation,
              "worst voxel " + std::to_string(worst_voxel) + " deviates from unit sum by " +
                  std::to_string(worst));
    }
}

LabelSetMap singleton_map(const std::vector<std::uint32_t>& labels, Dims dims, std::uint32_t num_labels) {
    require(dims.voxel_count() >= 1, ErrorCode::EmptyVolume, "volume has zero voxels");
    require(labels.size() == dims.voxel_count(), ErrorCode::ShapeMismatch,
            "label count does not match dims");
    std::vector<LabelSet> voxels;
    voxels.reserve(labels.size());
    for (const std::uint32_t c : labels) {
        require(c < num_labels, ErrorCode::IndexOutOfRange,
                "label index " + std::to_string(c) + " out of range");
        voxels.push_back(LabelSet::singleton(c));
    }
    return LabelSetMap(dims, num_labels, std::move(voxels));
}

ProbMap one_hot(const LabelSetMap& g) {
    const std::size_t n = g.size();
    const std::uint32_t k = g.num_labels();
    std::vector<double> values(n * k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        require(g[i].is_singleton(), ErrorCode::InvalidArgument,
                "one_hot requires an all-singleton annotation");
        values[i * k + g[i].sole_label()] = 1.0;
    }
    return ProbMap(g.dims(), k, std::move(values));
}

}  // namespace labelset
