#include "labelset/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "labelset/parallel.hpp"

namespace labelset {

namespace {

void check_same_grid(const HardSeg& a, const HardSeg& b) {
    require(a.dims == b.dims && a.num_labels == b.num_labels, ErrorCode::DimsMismatch,
            "segmentations disagree on dims or label count");
}

// Boundary voxels of one class: 6-neighborhood, border counts as outside.
std::vector<std::array<std::int64_t, 3>> boundary_voxels(const HardSeg& seg, std::uint32_t cls) {
    std::vector<std::array<std::int64_t, 3>> out;
    const Dims& d = seg.dims;
    for (std::uint32_t z = 0; z < d.z; ++z) {
        for (std::uint32_t y = 0; y < d.y; ++y) {
            for (std::uint32_t x = 0; x < d.x; ++x) {
                if (seg.labels[voxel_index(d, x, y, z)] != cls) continue;
                const bool border = x == 0 || x + 1 == d.x || y == 0 || y + 1 == d.y || z == 0 ||
                                    z + 1 == d.z;
                bool is_boundary = border;
                if (!is_boundary) {
                    is_boundary = seg.labels[voxel_index(d, x - 1, y, z)] != cls ||
                                  seg.labels[voxel_index(d, x + 1, y, z)] != cls ||
                                  seg.labels[voxel_index(d, x, y - 1, z)] != cls ||
                                  seg.labels[voxel_index(d, x, y + 1, z)] != cls ||
                                  seg.labels[voxel_index(d, x, y, z - 1)] != cls ||
                                  seg.labels[voxel_index(d, x, y, z + 1)] != cls;
                }
                if (is_boundary) out.push_back({x, y, z});
            }
        }
    }
    return out;
}

void directed_distances(const std::vector<std::array<std::int64_t, 3>>& from,
                        const std::vector<std::array<std::int64_t, 3>>& to, Spacing s,
                        std::vector<double>& out) {
    const std::size_t base = out.size();
    out.resize(base + from.size());
    parallel_chunks(from.size(), 256, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& t : to) {
                const double dx = (from[i][0] - t[0]) * s.x;
                const double dy = (from[i][1] - t[1]) * s.y;
                const double dz = (from[i][2] - t[2]) * s.z;
                const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (dist < best) best = dist;
            }
            out[base + i] = best;
        }
    });
}

}  // namespace

HardSeg argmax_seg(const ProbMap& p) {
    HardSeg seg{p.dims(), p.num_labels(), std::vector<std::uint32_t>(p.size(), 0)};
    const std::uint32_t k = p.num_labels();
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::uint32_t best = 0;
        double best_value = p(i, 0);
        for (std::uint32_t c = 1; c < k; ++c) {
            if (p(i, c) > best_value) {
                best_value = p(i, c);
                best = c;
            }
        }
        seg.labels[i] = best;
    }
    return seg;
}

HardSeg to_hard_seg(const LabelSetMap& g) {
    HardSeg seg{g.dims(), g.num_labels(), std::vector<std::uint32_t>(g.size(), 0)};
    for (std::size_t i = 0; i < g.size(); ++i) {
        require(g[i].is_singleton(), ErrorCode::InvalidArgument,
                "hard view requires an all-singleton annotation");
        seg.labels[i] = g[i].sole_label();
    }
    return seg;
}

double dice_score(const HardSeg& a, const HardSeg& b, std::uint32_t cls) {
    check_same_grid(a, b);
    std::size_t in_a = 0, in_b = 0, in_both = 0;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        const bool pa = a.labels[i] == cls;
        const bool pb = b.labels[i] == cls;
        in_a += pa;
        in_b += pb;
        in_both += pa && pb;
    }
    if (in_a + in_b == 0) return 1.0;
    return 2.0 * static_cast<double>(in_both) / static_cast<double>(in_a + in_b);
}

std::optional<double> hd95(const HardSeg& a, const HardSeg& b, std::uint32_t cls, Spacing spacing) {
    check_same_grid(a, b);
    require(spacing.x > 0 && spacing.y > 0 && spacing.z > 0, ErrorCode::InvalidArgument,
            "spacing must be positive");

    bool a_empty = true, b_empty = true;
    for (std::size_t i = 0; i < a.labels.size() && (a_empty || b_empty); ++i) {
        if (a.labels[i] == cls) a_empty = false;
        if (b.labels[i] == cls) b_empty = false;
    }
    if (a_empty || b_empty) return std::nullopt;

    const auto boundary_a = boundary_voxels(a, cls);
    const auto boundary_b = boundary_voxels(b, cls);

    std::vector<double> distances;
    distances.reserve(boundary_a.size() + boundary_b.size());
    directed_distances(boundary_a, boundary_b, spacing, distances);
    directed_distances(boundary_b, boundary_a, spacing, distances);

    std::sort(distances.begin(), distances.end());
    const std::size_t n = distances.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
    if (rank < 1) rank = 1;
    return distances[rank - 1];
}

CaseMetrics evaluate_case(const HardSeg& prediction, const HardSeg& truth, Spacing spacing) {
    check_same_grid(prediction, truth);
    CaseMetrics metrics;
    metrics.dsc.reserve(truth.num_labels);
    metrics.hd95.reserve(truth.num_labels);
    for (std::uint32_t c = 0; c < truth.num_labels; ++c) {
        metrics.dsc.push_back(dice_score(prediction, truth, c));
        metrics.hd95.push_back(hd95(prediction, truth, c, spacing));
    }
    return metrics;
}

}  // namespace labelset
