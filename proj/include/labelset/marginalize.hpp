#pragma once

#include <cstdint>

#include "labelset/labelspace.hpp"

namespace labelset {

// Marginalization: within each voxel's annotated label-set the predicted
// probabilities are replaced by their average; classes outside the set are
// copied through. Rows keep summing to 1.
ProbMap phi(const ProbMap& p, const LabelSetMap& g);

// Maximum-entropy soft segmentation of an annotation: uniform mass 1/|g_i|
// over each voxel's label-set, zero elsewhere.
ProbMap psi0(const LabelSetMap& g);

// A pair of probability maps with identical marginalization images for the
// same annotation.
struct EquivalenceSample {
    ProbMap base;
    ProbMap variant;
    LabelSetMap annotation;
};

// Builds an equivalent variant by redistributing each voxel's in-set mass
// with a seeded Dirichlet(1) draw. Entries outside g_i are copied, so
// phi(variant; g) == phi(base; g) up to rounding. Same seed, same variant.
EquivalenceSample sample_equivalent(const ProbMap& p, const LabelSetMap& g, std::uint64_t seed);

}  // namespace labelset
