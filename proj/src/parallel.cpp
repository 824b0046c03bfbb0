#include "labelset/parallel.hpp"

#include <cstdlib>
#include <string>

namespace labelset {

std::size_t max_threads() {
    static const std::size_t cached = [] {
        if (const char* env = std::getenv("LABELSET_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return static_cast<std::size_t>(v);
            return static_cast<std::size_t>(1);
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return static_cast<std::size_t>(hw > 0 ? hw : 1);
    }();
    return cached;
}

}  // namespace labelset
