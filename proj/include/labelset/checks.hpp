#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "labelset/labelspace.hpp"

namespace labelset {

inline constexpr std::uint64_t kCheckSeed = 0x5EEDC0DEull;  // committed so failures replay

struct PropertyResult {
    std::string name;
    std::size_t instances = 0;
    double worst = 0.0;       // worst deviation (or smallest margin for lower bounds)
    double tolerance = 0.0;
    bool lower_bound = false; // pass when worst >= tolerance instead of <=
    bool pass = false;
    std::string note;
};

// Marginalization identities plus the loss axiom: equal marginalization
// images must give equal loss values. Includes the soft-target Dice
// counterexample as a designed negative control.
std::vector<PropertyResult> check_axioms(std::uint64_t seed = kCheckSeed);

// Analytic gradients against central finite differences, for the five losses
// and the full model chain, plus the quadratic self-test that guards the
// finite-difference oracle itself.
std::vector<PropertyResult> check_gradients(std::uint64_t seed = kCheckSeed);

// Algebraic cross-checks: converted Dice against the direct marginal-Dice
// expression, singleton reductions, the cross-entropy additive constant, and
// the not-masking gradient contrast.
std::vector<PropertyResult> check_oracle(std::uint64_t seed = kCheckSeed);

bool all_pass(const std::vector<PropertyResult>& results);
void print_report(std::ostream& out, const std::vector<PropertyResult>& results);

// Direct marginal-Dice expression over the annotation's label-set blocks,
// computed from raw masses without the losses module. Matches the converted
// mean-class Dice (alpha = 1) whenever predictions are uniform within each
// block.
double marginal_dice_oracle(const ProbMap& p, const LabelSetMap& g, double epsilon);

// Averages predictions within every distinct label-set block at every voxel.
ProbMap block_uniform(const ProbMap& p, const LabelSetMap& g);

}  // namespace labelset
