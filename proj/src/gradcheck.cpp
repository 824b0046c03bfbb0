#include "labelset/gradcheck.hpp"

#include <cmath>

#include "labelset/rng.hpp"

namespace labelset {

GradReport central_diff(const Objective& f, const ProbMap& p, double h, std::size_t sample,
                        std::uint64_t seed) {
    require(h > 0.0 && h >= 1e-8, ErrorCode::StepTooSmall, "step must be at least 1e-8");
    const std::size_t n = p.size();
    const std::uint32_t k = p.num_labels();
    const std::size_t coords = n * k;
    require(sample >= 1 && sample <= coords, ErrorCode::InvalidArgument,
            "sample count must be in [1, N * num_labels]");
    for (double v : p.values()) {
        require(v >= 1e-3 && v <= 1.0 - 1e-3, ErrorCode::OutOfDomain,
                "entries must stay in [1e-3, 1 - 1e-3]");
    }

    const LossResult at_p = f(p);
    require(at_p.gradient.size() == coords, ErrorCode::ShapeMismatch,
            "objective gradient has the wrong shape");

    // Sample coordinates without replacement (partial Fisher-Yates).
    Rng rng(seed);
    std::vector<std::size_t> index(coords);
    for (std::size_t i = 0; i < coords; ++i) index[i] = i;
    for (std::size_t i = 0; i < sample; ++i) {
        const std::size_t j = i + rng.below(coords - i);
        std::swap(index[i], index[j]);
    }

    GradReport report;
    report.num_checked = sample;
    std::vector<double> values = p.values();
    for (std::size_t s = 0; s < sample; ++s) {
        const std::size_t c = index[s];
        const double saved = values[c];

        values[c] = saved + h;
        const double up = f(ProbMap(p.dims(), k, values)).value;
        values[c] = saved - h;
        const double down = f(ProbMap(p.dims(), k, values)).value;
        values[c] = saved;

        const double numeric = (up - down) / (2.0 * h);
        const double analytic = at_p.gradient[c];
        const double abs_err = std::abs(numeric - analytic);
        const double rel_err = abs_err / std::max(std::abs(analytic), 1e-8);
        if (abs_err > report.max_abs_error) report.max_abs_error = abs_err;
        if (rel_err > report.max_rel_error) {
            report.max_rel_error = rel_err;
            report.worst_voxel = c / k;
            report.worst_class = static_cast<std::uint32_t>(c % k);
        }
    }
    return report;
}

}  // namespace labelset
