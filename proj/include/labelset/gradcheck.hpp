#pragma once

#include <cstdint>
#include <functional>

#include "labelset/labelspace.hpp"
#include "labelset/losses.hpp"

namespace labelset {

struct GradReport {
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;
    std::size_t worst_voxel = 0;
    std::uint32_t worst_class = 0;
    std::size_t num_checked = 0;
};

using Objective = std::function<LossResult(const ProbMap&)>;

// Central finite differences against the objective's analytic gradient at
// `sample` seeded-random coordinates. Coordinates are perturbed without
// simplex renormalization; relative error uses max(|analytic|, 1e-8) as the
// denominator. Domain: h >= 1e-8, entries within [1e-3, 1 - 1e-3].
GradReport central_diff(const Objective& f, const ProbMap& p, double h, std::size_t sample,
                        std::uint64_t seed);

}  // namespace labelset
