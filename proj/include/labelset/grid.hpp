#pragma once

#include <cstddef>
#include <cstdint>

namespace labelset {

struct Dims {
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    std::uint32_t z = 0;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(x) * y * z;
    }

    bool operator==(const Dims&) const = default;
};

// Row-major, x fastest.
inline std::size_t voxel_index(const Dims& d, std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(d.x) * (static_cast<std::size_t>(iy) + static_cast<std::size_t>(d.y) * iz);
}

}  // namespace labelset
