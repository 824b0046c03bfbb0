#include "labelset/losses.hpp"

#include <cmath>

#include "labelset/marginalize.hpp"

namespace labelset {

namespace {

void check_same_shape(const ProbMap& p, const LabelSetMap& g) {
    require(p.dims() == g.dims() && p.num_labels() == g.num_labels(), ErrorCode::DimsMismatch,
            "probability map and annotation disagree on dims or label count");
}

void check_same_shape(const ProbMap& p, const ProbMap& q) {
    require(p.dims() == q.dims() && p.num_labels() == q.num_labels(), ErrorCode::DimsMismatch,
            "prediction and target disagree on dims or label count");
}

double pow_alpha(double v, int alpha) { return alpha == 1 ? v : v * v; }

// d(v^alpha)/dv with the alpha=1 branch constant 1 even at v = 0.
double dpow_alpha(double v, int alpha) { return alpha == 1 ? 1.0 : 2.0 * v; }

// Shared Dice core over per-class numerators/denominators. target_at(i, c)
// supplies the soft or indicator ground truth.
template <typename TargetFn>
LossResult dice_family(const ProbMap& p, const TargetFn& target_at, const LossSpec& spec) {
    const std::size_t n = p.size();
    const std::uint32_t k = p.num_labels();
    const int alpha = spec.alpha;

    std::vector<double> num(k, 0.0);     // 2 * sum_i q p
    std::vector<double> den(k, spec.epsilon);  // sum_i q^a + sum_i p^a + eps
    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t c = 0; c < k; ++c) {
            const double q = target_at(i, c);
            const double pv = p(i, c);
            num[c] += 2.0 * q * pv;
            den[c] += pow_alpha(q, alpha) + pow_alpha(pv, alpha);
        }
    }

    double score = 0.0;
    for (std::uint32_t c = 0; c < k; ++c) {
        if (den[c] != 0.0) score += num[c] / den[c];
        // den == 0 only with eps == 0 and a class absent from both maps; the
        // 0/0 term counts as 0, i.e. fully wrong.
    }

    LossResult result;
    result.value = 1.0 - score / k;
    result.gradient.assign(n * k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t c = 0; c < k; ++c) {
            const double d = den[c];
            if (d == 0.0) continue;
            const double q = target_at(i, c);
            const double pv = p(i, c);
            result.gradient[i * k + c] =
                -(2.0 * q * d - num[c] * dpow_alpha(pv, alpha)) / (d * d) / k;
        }
    }
    return result;
}

}  // namespace

std::string_view to_string(LossKind kind) {
    switch (kind) {
        case LossKind::LeafDice:             return "leaf_dice";
        case LossKind::ConvertedDice:        return "converted_dice";
        case LossKind::MarginalCrossEntropy: return "marginal_cross_entropy";
        case LossKind::SoftTargetDice:       return "soft_target_dice";
        case LossKind::MeanClassDice:        return "mean_class_dice";
    }
    return "unknown";
}

LossKind loss_kind_from_name(std::string_view name) {
    if (name == "leaf_dice") return LossKind::LeafDice;
    if (name == "converted_dice") return LossKind::ConvertedDice;
    if (name == "marginal_cross_entropy") return LossKind::MarginalCrossEntropy;
    if (name == "soft_target_dice") return LossKind::SoftTargetDice;
    if (name == "mean_class_dice") return LossKind::MeanClassDice;
    raise(ErrorCode::ConfigInvalid, "unknown loss kind: " + std::string(name));
}

void LossSpec::validate() const {
    require(alpha == 1 || alpha == 2, ErrorCode::ConfigInvalid, "alpha must be 1 or 2");
    require(epsilon >= 0.0, ErrorCode::ConfigInvalid, "epsilon must be nonnegative");
    require(log_floor > 0.0, ErrorCode::ConfigInvalid, "log_floor must be positive");
}

LossResult leaf_dice(const ProbMap& p, const LabelSetMap& g, const LossSpec& spec) {
    spec.validate();
    check_same_shape(p, g);
    require(g.is_leaf_partition(), ErrorCode::NotLeafPartition,
            "leaf-Dice needs pairwise-disjoint label-sets");

    const LabelSet* voxels = g.voxels().data();
    return dice_family(
        p,
        [voxels](std::size_t i, std::uint32_t c) -> double {
            const LabelSet& s = voxels[i];
            return (s.is_singleton() && s.sole_label() == c) ? 1.0 : 0.0;
        },
        spec);
}

LossResult mean_class_dice(const ProbMap& p, const ProbMap& soft_truth, const LossSpec& spec) {
    spec.validate();
    check_same_shape(p, soft_truth);
    return dice_family(
        p, [&soft_truth](std::size_t i, std::uint32_t c) { return soft_truth(i, c); }, spec);
}

LossResult cross_entropy(const ProbMap& p, const ProbMap& soft_truth, const LossSpec& spec) {
    spec.validate();
    check_same_shape(p, soft_truth);
    const std::size_t n = p.size();
    const std::uint32_t k = p.num_labels();

    LossResult result;
    result.gradient.assign(n * k, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t c = 0; c < k; ++c) {
            const double q = soft_truth(i, c);
            if (q == 0.0) continue;
            const double pv = p(i, c);
            if (pv > spec.log_floor) {
                sum += q * std::log(pv);
                result.gradient[i * k + c] = -q / pv / n;
            } else {
                sum += q * std::log(spec.log_floor);
                ++result.floor_activations;
            }
        }
    }
    result.value = -sum / n;
    return result;
}

LossResult soft_target_dice(const ProbMap& p, const LabelSetMap& g, const LossSpec& spec) {
    check_same_shape(p, g);
    return mean_class_dice(p, psi0(g), spec);
}

LossResult marginal_cross_entropy(const ProbMap& p, const LabelSetMap& g, const LossSpec& spec) {
    spec.validate();
    check_same_shape(p, g);
    const std::size_t n = p.size();
    const std::uint32_t k = p.num_labels();

    LossResult result;
    result.gradient.assign(n * k, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const LabelSet& set = g[i];
        double mass = 0.0;
        for (std::uint32_t c = 0; c < k; ++c) {
            if (set.contains(c)) mass += p(i, c);
        }
        if (mass > spec.log_floor) {
            sum += std::log(mass);
            const double grad = -1.0 / mass / n;
            for (std::uint32_t c = 0; c < k; ++c) {
                if (set.contains(c)) result.gradient[i * k + c] = grad;
            }
        } else {
            sum += std::log(spec.log_floor);
            ++result.floor_activations;
        }
    }
    result.value = -sum / n;
    return result;
}

LossResult convert_fully_supervised(const FullyLoss& fully, const ProbMap& p, const LabelSetMap& g) {
    check_same_shape(p, g);
    const std::uint32_t k = p.num_labels();

    LossResult inner = fully(phi(p, g), psi0(g));

    LossResult result;
    result.value = inner.value;
    result.floor_activations = inner.floor_activations;
    result.gradient.assign(inner.gradient.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const LabelSet& set = g[i];
        double in_set = 0.0;
        for (std::uint32_t c = 0; c < k; ++c) {
            if (set.contains(c)) in_set += inner.gradient[i * k + c];
        }
        const double share = in_set / set.size();
        for (std::uint32_t c = 0; c < k; ++c) {
            result.gradient[i * k + c] = set.contains(c) ? share : inner.gradient[i * k + c];
        }
    }
    return result;
}

LossResult evaluate(const LossSpec& spec, const ProbMap& p, const LabelSetMap& g) {
    spec.validate();
    switch (spec.kind) {
        case LossKind::LeafDice:
            return leaf_dice(p, g, spec);
        case LossKind::ConvertedDice:
            return convert_fully_supervised(
                [&spec](const ProbMap& pred, const ProbMap& truth) {
                    return mean_class_dice(pred, truth, spec);
                },
                p, g);
        case LossKind::MarginalCrossEntropy:
            return marginal_cross_entropy(p, g, spec);
        case LossKind::SoftTargetDice:
            return soft_target_dice(p, g, spec);
        case LossKind::MeanClassDice:
            return mean_class_dice(p, psi0(g), spec);
    }
    raise(ErrorCode::InvalidArgument, "unhandled loss kind");
}

}  // namespace labelset
