#include "labelset/marginalize.hpp"

#include "labelset/parallel.hpp"
#include "labelset/rng.hpp"

namespace labelset {

namespace {

void check_same_shape(const ProbMap& p, const LabelSetMap& g) {
    require(p.dims() == g.dims() && p.num_labels() == g.num_labels(), ErrorCode::DimsMismatch,
            "probability map and annotation disagree on dims or label count");
}

constexpr std::size_t kChunk = 4096;

}  // namespace

ProbMap phi(const ProbMap& p, const LabelSetMap& g) {
    check_same_shape(p, g);
    const std::uint32_t k = p.num_labels();
    std::vector<double> out(p.values());

    parallel_chunks(p.size(), kChunk, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const LabelSet& set = g[i];
            if (set.is_singleton()) continue;
            double mass = 0.0;
            for (std::uint32_t c = 0; c < k; ++c) {
                if (set.contains(c)) mass += p(i, c);
            }
            const double share = mass / set.size();
            for (std::uint32_t c = 0; c < k; ++c) {
                if (set.contains(c)) out[i * k + c] = share;
            }
        }
    });

    return ProbMap(p.dims(), k, std::move(out));
}

ProbMap psi0(const LabelSetMap& g) {
    const std::uint32_t k = g.num_labels();
    std::vector<double> out(g.size() * k, 0.0);

    parallel_chunks(g.size(), kChunk, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const LabelSet& set = g[i];
            const double share = 1.0 / set.size();
            for (std::uint32_t c = 0; c < k; ++c) {
                if (set.contains(c)) out[i * k + c] = share;
            }
        }
    });

    return ProbMap(g.dims(), k, std::move(out));
}

EquivalenceSample sample_equivalent(const ProbMap& p, const LabelSetMap& g, std::uint64_t seed) {
    check_same_shape(p, g);
    const std::uint32_t k = p.num_labels();
    std::vector<double> out(p.values());
    Rng rng(seed);

    for (std::size_t i = 0; i < p.size(); ++i) {
        const LabelSet& set = g[i];
        if (set.is_singleton()) continue;

        double mass = 0.0;
        for (std::uint32_t c = 0; c < k; ++c) {
            if (set.contains(c)) mass += p(i, c);
        }

        double weights[kMaxLabels];
        double total = 0.0;
        std::uint32_t members = 0;
        for (std::uint32_t c = 0; c < k; ++c) {
            if (!set.contains(c)) continue;
            weights[members] = rng.exponential();
            total += weights[members];
            ++members;
        }
        if (total <= 0.0) total = 1.0;  // unreachable in practice

        std::uint32_t m = 0;
        for (std::uint32_t c = 0; c < k; ++c) {
            if (!set.contains(c)) continue;
            out[i * k + c] = mass * (weights[m] / total);
            ++m;
        }
    }

    return EquivalenceSample{p, ProbMap(p.dims(), k, std::move(out)), g};
}

}  // namespace labelset
