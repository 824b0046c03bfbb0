#pragma once

#include <cstdint>
#include <vector>

#include "labelset/labelspace.hpp"

namespace labelset {

inline constexpr std::uint32_t kFeatureChannels = 5;

// Voxel-major feature array (channels contiguous per voxel).
struct FeatureMap {
    Dims dims;
    std::uint32_t channels = 0;
    std::vector<double> values;

    double at(std::size_t voxel, std::uint32_t channel) const {
        return values[voxel * channels + channel];
    }
};

struct PhantomConfig {
    Dims dims;
    std::uint32_t num_labels = 0;     // 2..8
    double noise_sigma = 0.0;          // intensity noise only, never labels
    std::vector<double> class_means;   // size num_labels, pairwise distinct
    std::vector<double> shell_radii;   // size num_labels - 1, strictly increasing in (0, 1)
    std::uint64_t seed = 0;

    void validate() const;
};

std::vector<double> default_class_means(std::uint32_t num_labels);
std::vector<double> default_shell_radii(std::uint32_t num_labels);

// Concentric ellipsoid shells in a unit cube. Class 0 is the outermost
// (background); higher classes are deeper shells. Features per voxel:
// intensity, centered x/y/z in (-1, 1), and the ellipsoid-normalized radius.
struct Phantom {
    Dims dims;
    FeatureMap features;
    LabelSetMap truth;              // all singletons
    LabelSetMap partial;            // simulated annotation; equals truth when fully annotated
    std::uint64_t lprime_mask = 0;  // merged (unannotated) classes; 0 = fully annotated
};

// Deterministic given cfg.seed. lprime_mask merges those classes in the
// partial view; 0 leaves the phantom fully annotated.
Phantom generate(const PhantomConfig& cfg, std::uint64_t lprime_mask = 0);

// Merges the classes of lprime_mask: voxels whose true class is in the mask
// get the whole mask as their label-set, others keep their singleton.
// lprime_mask of 0 returns the truth unchanged; the full label space is
// rejected.
LabelSetMap simulate_partial(const LabelSetMap& truth, std::uint64_t lprime_mask);

}  // namespace labelset
