#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace labelset::testing {

namespace {

struct Voxel {
    std::int64_t x, y, z;
};

// Independent boundary scan: class voxels with any 6-neighbor outside the
// class, treating the volume border as outside.
std::vector<Voxel> boundary(const HardSeg& seg, std::uint32_t cls) {
    std::vector<Voxel> out;
    const auto at = [&](std::int64_t x, std::int64_t y, std::int64_t z) -> bool {
        if (x < 0 || y < 0 || z < 0 || x >= seg.dims.x || y >= seg.dims.y || z >= seg.dims.z) {
            return false;
        }
        return seg.labels[voxel_index(seg.dims, static_cast<std::uint32_t>(x),
                                      static_cast<std::uint32_t>(y),
                                      static_cast<std::uint32_t>(z))] == cls;
    };
    for (std::int64_t z = 0; z < seg.dims.z; ++z) {
        for (std::int64_t y = 0; y < seg.dims.y; ++y) {
            for (std::int64_t x = 0; x < seg.dims.x; ++x) {
                if (!at(x, y, z)) continue;
                if (!at(x - 1, y, z) || !at(x + 1, y, z) || !at(x, y - 1, z) || !at(x, y + 1, z) ||
                    !at(x, y, z - 1) || !at(x, y, z + 1)) {
                    out.push_back(Voxel{x, y, z});
                }
            }
        }
    }
    return out;
}

std::vector<double> all_directed(const std::vector<Voxel>& from, const std::vector<Voxel>& to,
                                 Spacing s) {
    std::vector<double> result;
    result.reserve(from.size());
    for (const Voxel& a : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const Voxel& b : to) {
            const double dx = (a.x - b.x) * s.x;
            const double dy = (a.y - b.y) * s.y;
            const double dz = (a.z - b.z) * s.z;
            const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (d < best) best = d;
        }
        result.push_back(best);
    }
    return result;
}

bool class_present(const HardSeg& seg, std::uint32_t cls) {
    for (std::uint32_t v : seg.labels) {
        if (v == cls) return true;
    }
    return false;
}

}  // namespace

double brute_dice(const HardSeg& a, const HardSeg& b, std::uint32_t cls) {
    std::size_t na = 0, nb = 0, nboth = 0;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        if (a.labels[i] == cls) ++na;
        if (b.labels[i] == cls) ++nb;
        if (a.labels[i] == cls && b.labels[i] == cls) ++nboth;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(nboth) / static_cast<double>(na + nb);
}

std::optional<double> brute_hd95(const HardSeg& a, const HardSeg& b, std::uint32_t cls,
                                 Spacing spacing) {
    if (!class_present(a, cls) || !class_present(b, cls)) return std::nullopt;
    const auto ba = boundary(a, cls);
    const auto bb = boundary(b, cls);
    std::vector<double> d = all_directed(ba, bb, spacing);
    const std::vector<double> back = all_directed(bb, ba, spacing);
    d.insert(d.end(), back.begin(), back.end());
    std::sort(d.begin(), d.end());
    std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(d.size())));
    if (rank < 1) rank = 1;
    return d[rank - 1];
}

std::optional<double> brute_hausdorff(const HardSeg& a, const HardSeg& b, std::uint32_t cls,
                                      Spacing spacing) {
    if (!class_present(a, cls) || !class_present(b, cls)) return std::nullopt;
    const auto ba = boundary(a, cls);
    const auto bb = boundary(b, cls);
    double worst = 0.0;
    for (double v : all_directed(ba, bb, spacing)) worst = std::max(worst, v);
    for (double v : all_directed(bb, ba, spacing)) worst = std::max(worst, v);
    return worst;
}

}  // namespace labelset::testing
