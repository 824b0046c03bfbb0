#include "labelset/phantom.hpp"

#include <cmath>

#include "labelset/rng.hpp"

namespace labelset {

namespace {

// Distinct per-axis scales so no two axes are interchangeable.
constexpr double kAxisScaleX = 1.0;
constexpr double kAxisScaleY = 0.85;
constexpr double kAxisScaleZ = 0.7;

}  // namespace

void PhantomConfig::validate() const {
    require(dims.x > 0 && dims.y > 0 && dims.z > 0, ErrorCode::ConfigInvalid, "dims must be nonzero");
    require(num_labels >= 2 && num_labels <= 8, ErrorCode::ConfigInvalid,
            "num_labels must be in [2, 8]");
    require(noise_sigma >= 0.0, ErrorCode::ConfigInvalid, "noise_sigma must be nonnegative");
    require(class_means.size() == num_labels, ErrorCode::ConfigInvalid,
            "class_means must have one entry per label");
    for (std::size_t a = 0; a < class_means.size(); ++a) {
        for (std::size_t b = a + 1; b < class_means.size(); ++b) {
            require(class_means[a] != class_means[b], ErrorCode::ConfigInvalid,
                    "class means must be pairwise distinct");
        }
    }
    require(shell_radii.size() == num_labels - 1u, ErrorCode::ConfigInvalid,
            "shell_radii must have num_labels - 1 entries");
    double prev = 0.0;
    for (double r : shell_radii) {
        require(r > 0.0 && r < 1.0, ErrorCode::ConfigInvalid, "shell radii must lie in (0, 1)");
        require(r > prev, ErrorCode::ConfigInvalid, "shell radii must be strictly increasing");
        prev = r;
    }
}

std::vector<double> default_class_means(std::uint32_t num_labels) {
    std::vector<double> means(num_labels);
    for (std::uint32_t c = 0; c < num_labels; ++c) {
        means[c] = 0.15 + 0.8 * static_cast<double>(c) / (num_labels - 1);
    }
    return means;
}

std::vector<double> default_shell_radii(std::uint32_t num_labels) {
    // Innermost boundary at 0.35 keeps the deepest class non-empty down to
    // 8^3 grids; 0.9 leaves a solid background rim.
    std::vector<double> radii(num_labels - 1);
    if (num_labels == 2) {
        radii[0] = 0.7;
        return radii;
    }
    for (std::uint32_t j = 0; j + 1 < num_labels; ++j) {
        radii[j] = 0.35 + (0.9 - 0.35) * static_cast<double>(j) / (num_labels - 2);
    }
    return radii;
}

Phantom generate(const PhantomConfig& cfg, std::uint64_t lprime_mask) {
    cfg.validate();
    const std::size_t n = cfg.dims.voxel_count();
    const std::uint32_t k = cfg.num_labels;

    std::vector<double> features(n * kFeatureChannels);
    std::vector<std::uint32_t> classes(n);
    Rng rng(cfg.seed);

    for (std::uint32_t iz = 0; iz < cfg.dims.z; ++iz) {
        for (std::uint32_t iy = 0; iy < cfg.dims.y; ++iy) {
            for (std::uint32_t ix = 0; ix < cfg.dims.x; ++ix) {
                const std::size_t i = voxel_index(cfg.dims, ix, iy, iz);
                const double cx = 2.0 * (ix + 0.5) / cfg.dims.x - 1.0;
                const double cy = 2.0 * (iy + 0.5) / cfg.dims.y - 1.0;
                const double cz = 2.0 * (iz + 0.5) / cfg.dims.z - 1.0;
                const double ux = cx / kAxisScaleX;
                const double uy = cy / kAxisScaleY;
                const double uz = cz / kAxisScaleZ;
                const double radius = std::sqrt(ux * ux + uy * uy + uz * uz);

                // Deeper shells have higher class indices; outside all
                // shells is background class 0.
                std::uint32_t cls = 0;
                for (double r : cfg.shell_radii) {
                    if (radius < r) ++cls;
                }
                classes[i] = cls;

                double intensity = cfg.class_means[cls];
                if (cfg.noise_sigma > 0.0) intensity += cfg.noise_sigma * rng.gaussian();

                double* f = features.data() + i * kFeatureChannels;
                f[0] = intensity;
                f[1] = cx;
                f[2] = cy;
                f[3] = cz;
                f[4] = radius;
            }
        }
    }

    Phantom phantom{
        cfg.dims,
        FeatureMap{cfg.dims, kFeatureChannels, std::move(features)},
        singleton_map(classes, cfg.dims, k),
        singleton_map(classes, cfg.dims, k),
        lprime_mask,
    };
    if (lprime_mask != 0) {
        phantom.partial = simulate_partial(phantom.truth, lprime_mask);
    }
    return phantom;
}

LabelSetMap simulate_partial(const LabelSetMap& truth, std::uint64_t lprime_mask) {
    const std::uint32_t k = truth.num_labels();
    const std::uint64_t full = k == kMaxLabels ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
    require((lprime_mask & ~full) == 0, ErrorCode::IndexOutOfRange,
            "merged set references a label outside the label space");
    require(lprime_mask != full, ErrorCode::LPrimeIsFullSpace,
            "merged set must be a proper subset of the label space");

    std::vector<LabelSet> voxels;
    voxels.reserve(truth.size());
    for (const LabelSet& s : truth.voxels()) {
        require(s.is_singleton(), ErrorCode::InvalidArgument,
                "partial annotation is simulated from an all-singleton truth");
        if (lprime_mask != 0 && (s.mask() & lprime_mask)) {
            voxels.push_back(LabelSet(lprime_mask));
        } else {
            voxels.push_back(s);
        }
    }
    return LabelSetMap(truth.dims(), k, std::move(voxels));
}

}  // namespace labelset
