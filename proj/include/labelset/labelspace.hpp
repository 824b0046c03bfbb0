#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "labelset/errors.hpp"
#include "labelset/grid.hpp"

namespace labelset {

inline constexpr std::uint32_t kMaxLabels = 64;
inline constexpr double kRowSumTolerance = 1e-6;

// The flat set of leaf-labels a segmentation task is defined over.
class LabelSpace {
public:
    explicit LabelSpace(std::vector<std::string> names);

    std::uint32_t num_labels() const { return static_cast<std::uint32_t>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(std::uint32_t label) const;
    std::uint32_t index_of(const std::string& name) const;
    std::uint64_t full_mask() const;

private:
    std::vector<std::string> names_;
};

// A non-empty subset of leaf-labels, stored as a bitmask over label indices.
class LabelSet {
public:
    explicit LabelSet(std::uint64_t mask) : mask_(mask) {
        require(mask != 0, ErrorCode::EmptyLabelSet, "label-set must contain at least one label");
    }

    static LabelSet singleton(std::uint32_t label) {
        require(label < kMaxLabels, ErrorCode::IndexOutOfRange, "label index exceeds bitmask width");
        return LabelSet(std::uint64_t{1} << label);
    }

    std::uint64_t mask() const { return mask_; }
    std::uint32_t size() const { return static_cast<std::uint32_t>(std::popcount(mask_)); }
    bool contains(std::uint32_t label) const { return label < kMaxLabels && (mask_ >> label) & 1u; }
    bool is_singleton() const { return std::has_single_bit(mask_); }

    // Lowest (and only) member; callers guarantee is_singleton().
    std::uint32_t sole_label() const { return static_cast<std::uint32_t>(std::countr_zero(mask_)); }

    bool operator==(const LabelSet&) const = default;

private:
    std::uint64_t mask_;
};

// Per-voxel label-set annotation over a voxel grid. Immutable once built.
class LabelSetMap {
public:
    LabelSetMap(Dims dims, std::uint32_t num_labels, std::vector<LabelSet> voxels);

    const Dims& dims() const { return dims_; }
    std::uint32_t num_labels() const { return num_labels_; }
    std::size_t size() const { return voxels_.size(); }
    const LabelSet& operator[](std::size_t voxel) const { return voxels_[voxel]; }
    const std::vector<LabelSet>& voxels() const { return voxels_; }

    // True when the distinct label-sets occurring in the map are pairwise
    // disjoint (the missing-labels annotation structure leaf-Dice needs).
    bool is_leaf_partition() const { return is_leaf_partition_; }
    const std::vector<LabelSet>& distinct_sets() const { return distinct_sets_; }

private:
    Dims dims_;
    std::uint32_t num_labels_ = 0;
    std::vector<LabelSet> voxels_;
    std::vector<LabelSet> distinct_sets_;
    bool is_leaf_partition_ = false;
};

// Per-voxel probability vectors over leaf-labels. The container fixes shapes
// only; simplex membership is the job of validate_probmap, so finite
// difference checks can hold perturbed, unnormalized values.
class ProbMap {
public:
    ProbMap(Dims dims, std::uint32_t num_labels, std::vector<double> values);

    const Dims& dims() const { return dims_; }
    std::uint32_t num_labels() const { return num_labels_; }
    std::size_t size() const { return voxel_count_; }
    const std::vector<double>& values() const { return values_; }

    double operator()(std::size_t voxel, std::uint32_t label) const {
        return values_[voxel * num_labels_ + label];
    }

private:
    Dims dims_;
    std::uint32_t num_labels_ = 0;
    std::size_t voxel_count_ = 0;
    std::vector<double> values_;
};

// Succeeds iff all entries are nonnegative and every row sums to 1 within
// kRowSumTolerance. Reports the worst offending voxel.
void validate_probmap(const ProbMap& p);

// Fully supervised annotation: every voxel gets the singleton of its label.
LabelSetMap singleton_map(const std::vector<std::uint32_t>& labels, Dims dims, std::uint32_t num_labels);

// One-hot embedding of an all-singleton annotation.
ProbMap one_hot(const LabelSetMap& g);

}  // namespace labelset
