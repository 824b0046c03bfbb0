#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "labelset/labelspace.hpp"

namespace labelset {

enum class LossKind {
    LeafDice,
    ConvertedDice,
    MarginalCrossEntropy,
    SoftTargetDice,
    MeanClassDice,
};

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_name(std::string_view name);

struct LossSpec {
    LossKind kind = LossKind::LeafDice;
    int alpha = 2;              // soft-Dice exponent, 1 or 2
    double epsilon = 1e-5;      // Dice denominator stabilizer (0 allowed for exact fixtures)
    double log_floor = 1e-12;   // cross-entropy clamp

    void validate() const;
};

struct LossResult {
    double value = 0.0;
    std::vector<double> gradient;       // d value / d p, voxel-major (N x num_labels)
    std::size_t floor_activations = 0;  // log-floor clamps hit (cross-entropy family)
};

// Dice generalized to missing-label annotations: numerators sum predicted
// mass only over singleton-annotated voxels, denominators keep the full
// prediction mass, so unannotated voxels still receive gradient. Requires
// the leaf-partition annotation structure.
LossResult leaf_dice(const ProbMap& p, const LabelSetMap& g, const LossSpec& spec);

// Fully supervised mean-class Dice against a soft ground truth.
LossResult mean_class_dice(const ProbMap& p, const ProbMap& soft_truth, const LossSpec& spec);

// Fully supervised cross entropy against a soft ground truth, averaged over
// voxels.
LossResult cross_entropy(const ProbMap& p, const ProbMap& soft_truth, const LossSpec& spec);

// The non-compliant baseline: mean-class Dice against psi0(g) without
// marginalizing the prediction first. Value depends on how in-set mass is
// distributed, so equal-marginalization predictions can score differently.
LossResult soft_target_dice(const ProbMap& p, const LabelSetMap& g, const LossSpec& spec);

// -(1/N) sum_i log(sum of predicted mass inside g_i), floored at log_floor.
LossResult marginal_cross_entropy(const ProbMap& p, const LabelSetMap& g, const LossSpec& spec);

using FullyLoss = std::function<LossResult(const ProbMap& prediction, const ProbMap& soft_truth)>;

// The unique axiom-compliant conversion of a fully supervised loss: evaluates
// fully(phi(p; g), psi0(g)) and pulls the gradient back through the (linear)
// marginalization, spreading each in-set entry's gradient as the in-set mean.
LossResult convert_fully_supervised(const FullyLoss& fully, const ProbMap& p, const LabelSetMap& g);

// Dispatch on spec.kind with the annotation bound. MeanClassDice uses
// psi0(g) as the target, i.e. plain fully supervised Dice whenever g is all
// singletons.
LossResult evaluate(const LossSpec& spec, const ProbMap& p, const LabelSetMap& g);

}  // namespace labelset
