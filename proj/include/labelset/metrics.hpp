#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "labelset/labelspace.hpp"

namespace labelset {

// Hard segmentation: one leaf-label index per voxel.
struct HardSeg {
    Dims dims;
    std::uint32_t num_labels = 0;
    std::vector<std::uint32_t> labels;
};

// Argmax over classes; ties go to the lowest index.
HardSeg argmax_seg(const ProbMap& p);

// Hard view of an all-singleton annotation.
HardSeg to_hard_seg(const LabelSetMap& g);

struct Spacing {
    double x = 1.0;
    double y = 1.0;
    double z = 1.0;
};

// 2|An B| / (|A| + |B|) over the voxel sets of class cls; 1 when both masks
// are empty.
double dice_score(const HardSeg& a, const HardSeg& b, std::uint32_t cls);

// 95th percentile (nearest rank) of the concatenated directed boundary
// distances between the two class masks. Boundary voxels have at least one
// of their 6 face neighbors outside the class (the volume border counts as
// outside). Undefined when either mask is empty.
std::optional<double> hd95(const HardSeg& a, const HardSeg& b, std::uint32_t cls,
                           Spacing spacing = {});

struct CaseMetrics {
    std::vector<double> dsc;                    // per class
    std::vector<std::optional<double>> hd95;    // per class, empty when undefined
};

CaseMetrics evaluate_case(const HardSeg& prediction, const HardSeg& truth, Spacing spacing = {});

}  // namespace labelset
