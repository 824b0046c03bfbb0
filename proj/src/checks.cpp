#include "labelset/checks.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "labelset/gradcheck.hpp"
#include "labelset/losses.hpp"
#include "labelset/marginalize.hpp"
#include "labelset/phantom.hpp"
#include "labelset/rng.hpp"
#include "labelset/trainer.hpp"

namespace labelset {

namespace {

Dims random_dims(Rng& rng) {
    return Dims{static_cast<std::uint32_t>(1 + rng.below(4)),
                static_cast<std::uint32_t>(1 + rng.below(4)),
                static_cast<std::uint32_t>(1 + rng.below(4))};
}

ProbMap random_simplex(Dims dims, std::uint32_t k, Rng& rng) {
    const std::size_t n = dims.voxel_count();
    std::vector<double> values(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::uint32_t c = 0; c < k; ++c) {
            values[i * k + c] = rng.exponential();
            total += values[i * k + c];
        }
        for (std::uint32_t c = 0; c < k; ++c) values[i * k + c] /= total;
    }
    return ProbMap(dims, k, std::move(values));
}

// Random simplex rows pulled toward uniform so every entry stays inside
// [1e-3, 1 - 1e-3], the finite-difference domain.
ProbMap random_interior(Dims dims, std::uint32_t k, Rng& rng) {
    ProbMap p = random_simplex(dims, k, rng);
    const double blend = 0.05;
    std::vector<double> values = p.values();
    for (double& v : values) v = (1.0 - blend) * v + blend / k;
    return ProbMap(dims, k, std::move(values));
}

// Leaf-partition annotation: singleton truth with an optional merged subset.
LabelSetMap random_partition_annotation(Dims dims, std::uint32_t k, Rng& rng) {
    std::vector<std::uint32_t> classes(dims.voxel_count());
    for (auto& c : classes) c = static_cast<std::uint32_t>(rng.below(k));
    const LabelSetMap truth = singleton_map(classes, dims, k);

    if (k < 3 || rng.below(3) == 0) return truth;  // fully annotated
    const std::uint32_t merged = 2 + static_cast<std::uint32_t>(rng.below(k - 2));  // 2..k-1
    std::vector<std::uint32_t> pool(k);
    for (std::uint32_t c = 0; c < k; ++c) pool[c] = c;
    rng.shuffle(pool);
    std::uint64_t lprime = 0;
    for (std::uint32_t j = 0; j < merged; ++j) lprime |= std::uint64_t{1} << pool[j];
    return simulate_partial(truth, lprime);
}

// Arbitrary annotation: every voxel gets an independent non-empty subset.
LabelSetMap random_subset_annotation(Dims dims, std::uint32_t k, Rng& rng) {
    const std::uint64_t full = (std::uint64_t{1} << k) - 1;
    std::vector<LabelSet> voxels;
    voxels.reserve(dims.voxel_count());
    for (std::size_t i = 0; i < dims.voxel_count(); ++i) {
        voxels.push_back(LabelSet(1 + rng.below(full)));
    }
    return LabelSetMap(dims, k, std::move(voxels));
}

double max_abs_diff(const ProbMap& a, const ProbMap& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    }
    return worst;
}

PropertyResult make_upper(std::string name, std::size_t instances, double worst, double tol,
                          std::string note = {}) {
    return PropertyResult{std::move(name), instances, worst, tol, false, worst <= tol,
                          std::move(note)};
}

PropertyResult make_lower(std::string name, std::size_t instances, double value, double bound,
                          std::string note = {}) {
    return PropertyResult{std::move(name), instances, value, bound, true, value >= bound,
                          std::move(note)};
}

}  // namespace

ProbMap block_uniform(const ProbMap& p, const LabelSetMap& g) {
    require(p.dims() == g.dims() && p.num_labels() == g.num_labels(), ErrorCode::DimsMismatch,
            "probability map and annotation disagree on dims or label count");
    require(g.is_leaf_partition(), ErrorCode::NotLeafPartition,
            "block averaging needs pairwise-disjoint label-sets");
    const std::uint32_t k = p.num_labels();
    std::vector<double> out = p.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (const LabelSet& block : g.distinct_sets()) {
            if (block.is_singleton()) continue;
            double mass = 0.0;
            for (std::uint32_t c = 0; c < k; ++c) {
                if (block.contains(c)) mass += p(i, c);
            }
            const double share = mass / block.size();
            for (std::uint32_t c = 0; c < k; ++c) {
                if (block.contains(c)) out[i * k + c] = share;
            }
        }
    }
    return ProbMap(p.dims(), k, std::move(out));
}

double marginal_dice_oracle(const ProbMap& p, const LabelSetMap& g, double epsilon) {
    require(p.dims() == g.dims() && p.num_labels() == g.num_labels(), ErrorCode::DimsMismatch,
            "probability map and annotation disagree on dims or label count");
    require(g.is_leaf_partition(), ErrorCode::NotLeafPartition,
            "marginal Dice needs pairwise-disjoint label-sets");
    const std::uint32_t k = p.num_labels();

    double score = 0.0;
    for (const LabelSet& block : g.distinct_sets()) {
        double annotated = 0.0;       // #voxels carrying this block
        double annotated_mass = 0.0;  // in-block mass over those voxels
        double total_mass = 0.0;      // in-block mass over all voxels
        for (std::size_t i = 0; i < p.size(); ++i) {
            double in_block = 0.0;
            for (std::uint32_t c = 0; c < k; ++c) {
                if (block.contains(c)) in_block += p(i, c);
            }
            total_mass += in_block;
            if (g[i] == block) {
                annotated += 1.0;
                annotated_mass += in_block;
            }
        }
        const double den = annotated + total_mass + block.size() * epsilon;
        if (den != 0.0) score += 2.0 * annotated_mass / den;
    }
    return 1.0 - score / k;
}

std::vector<PropertyResult> check_axioms(std::uint64_t seed) {
    Rng rng(seed);
    constexpr std::size_t kInstances = 200;

    double worst_idempotent = 0.0;
    double worst_rowsum = 0.0;
    double worst_fixed_point = 0.0;
    double worst_support = 0.0;
    double worst_outside = 0.0;
    double worst_sampler = 0.0;
    double worst_leaf = 0.0;
    double worst_converted = 0.0;
    double worst_marginal_ce = 0.0;
    std::size_t leaf_instances = 0;

    for (std::size_t t = 0; t < kInstances; ++t) {
        const std::uint32_t k = static_cast<std::uint32_t>(2 + t % 7);
        const Dims dims = random_dims(rng);
        const LabelSetMap g = (t % 2 == 0) ? random_partition_annotation(dims, k, rng)
                                           : random_subset_annotation(dims, k, rng);
        const ProbMap p = random_simplex(dims, k, rng);

        const ProbMap marginalized = phi(p, g);
        worst_idempotent = std::max(worst_idempotent, max_abs_diff(phi(marginalized, g), marginalized));

        for (std::size_t i = 0; i < marginalized.size(); ++i) {
            double sum = 0.0;
            for (std::uint32_t c = 0; c < k; ++c) sum += marginalized(i, c);
            worst_rowsum = std::max(worst_rowsum, std::abs(sum - 1.0));
        }

        const ProbMap embedded = psi0(g);
        worst_fixed_point = std::max(worst_fixed_point, max_abs_diff(phi(embedded, g), embedded));
        for (std::size_t i = 0; i < embedded.size(); ++i) {
            for (std::uint32_t c = 0; c < k; ++c) {
                if (g[i].contains(c)) continue;
                worst_support = std::max(worst_support, std::abs(embedded(i, c)));
                worst_outside = std::max(worst_outside, std::abs(marginalized(i, c) - p(i, c)));
            }
        }

        const EquivalenceSample sample = sample_equivalent(p, g, mix_seed(seed, t));
        worst_sampler =
            std::max(worst_sampler, max_abs_diff(phi(sample.base, g), phi(sample.variant, g)));

        LossSpec spec;
        spec.alpha = (t % 3 == 0) ? 1 : 2;

        const auto axiom_gap = [&](LossKind kind) {
            spec.kind = kind;
            const double at_p = evaluate(spec, p, g).value;
            const double at_q = evaluate(spec, sample.variant, g).value;
            const double at_phi = evaluate(spec, marginalized, g).value;
            return std::max(std::abs(at_p - at_q), std::abs(at_p - at_phi));
        };

        if (g.is_leaf_partition()) {
            worst_leaf = std::max(worst_leaf, axiom_gap(LossKind::LeafDice));
            ++leaf_instances;
        }
        worst_converted = std::max(worst_converted, axiom_gap(LossKind::ConvertedDice));
        worst_marginal_ce = std::max(worst_marginal_ce, axiom_gap(LossKind::MarginalCrossEntropy));
    }

    // Fixed negative control: one voxel annotated {l1, l2}, committed to l1
    // versus hedged. Same marginalization image, different soft-target Dice.
    LossSpec soft{LossKind::SoftTargetDice, 1, 0.0, 1e-12};
    const Dims one{1, 1, 1};
    const LabelSetMap g_counter(one, 3, {LabelSet(0b011)});
    const ProbMap committed(one, 3, {1.0, 0.0, 0.0});
    const ProbMap hedged(one, 3, {0.5, 0.5, 0.0});
    const double counter_gap = std::abs(soft_target_dice(committed, g_counter, soft).value -
                                        soft_target_dice(hedged, g_counter, soft).value);

    std::vector<PropertyResult> results;
    results.push_back(make_upper("phi idempotent", kInstances, worst_idempotent, 1e-12));
    results.push_back(make_upper("phi preserves row sums", kInstances, worst_rowsum, 1e-9));
    results.push_back(make_upper("psi0 fixed point of phi", kInstances, worst_fixed_point, 1e-12));
    results.push_back(make_upper("psi0 zero outside label-set", kInstances, worst_support, 0.0));
    results.push_back(make_upper("phi untouched outside label-set", kInstances, worst_outside, 0.0));
    results.push_back(make_upper("equivalence sampler phi-match", kInstances, worst_sampler, 1e-12));
    results.push_back(make_upper("axiom: leaf_dice", leaf_instances, worst_leaf, 1e-9));
    results.push_back(make_upper("axiom: converted_dice", kInstances, worst_converted, 1e-9));
    results.push_back(
        make_upper("axiom: marginal_cross_entropy", kInstances, worst_marginal_ce, 1e-9));
    results.push_back(make_lower("soft_target_dice counterexample gap", 1, counter_gap, 0.1,
                                 "expected: this loss violates the axiom"));
    return results;
}

std::vector<PropertyResult> check_gradients(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<PropertyResult> results;

    // Guard the finite-difference oracle with a functional whose gradient is
    // known in closed form: f(p) = sum p^2, df/dp = 2p.
    {
        const Dims dims{3, 2, 2};
        const std::uint32_t k = 4;
        const ProbMap p = random_interior(dims, k, rng);
        const Objective quadratic = [](const ProbMap& q) {
            LossResult r;
            r.gradient.reserve(q.values().size());
            for (double v : q.values()) {
                r.value += v * v;
                r.gradient.push_back(2.0 * v);
            }
            return r;
        };
        const GradReport report = central_diff(quadratic, p, 1e-4, 48, mix_seed(seed, 9001));
        results.push_back(
            make_upper("gradcheck self-test (quadratic)", report.num_checked, report.max_rel_error, 1e-10));
    }

    const LossKind kinds[] = {LossKind::LeafDice, LossKind::ConvertedDice,
                              LossKind::MarginalCrossEntropy, LossKind::SoftTargetDice,
                              LossKind::MeanClassDice};
    for (const LossKind kind : kinds) {
        double worst = 0.0;
        std::size_t checked = 0;
        for (std::size_t t = 0; t < 6; ++t) {
            const std::uint32_t k = static_cast<std::uint32_t>(2 + rng.below(7));
            const Dims dims = random_dims(rng);
            const LabelSetMap g = random_partition_annotation(dims, k, rng);
            const ProbMap p = random_interior(dims, k, rng);

            LossSpec spec;
            spec.kind = kind;
            spec.alpha = (t % 2 == 0) ? 2 : 1;
            const Objective f = [&](const ProbMap& q) { return evaluate(spec, q, g); };
            const std::size_t coords = std::min<std::size_t>(48, p.values().size());
            const GradReport report = central_diff(f, p, 1e-4, coords, mix_seed(seed, t * 31 + 7));
            worst = std::max(worst, report.max_rel_error);
            checked += report.num_checked;
        }
        results.push_back(make_upper(std::string("gradient: ") + std::string(to_string(kind)),
                                     checked, worst, 1e-4));
    }

    // End-to-end chain: loss of softmax(linear(features)) against finite
    // differences over the model parameters.
    {
        PhantomConfig cfg;
        cfg.dims = Dims{6, 6, 6};
        cfg.num_labels = 3;
        cfg.noise_sigma = 0.02;
        cfg.class_means = default_class_means(3);
        cfg.shell_radii = default_shell_radii(3);
        cfg.seed = mix_seed(seed, 555);
        const Phantom phantom = generate(cfg, 0b110);

        Model model = zero_model(3, kFeatureChannels);
        Rng wrng(mix_seed(seed, 556));
        for (double& w : model.weights) w = 0.4 * (wrng.uniform() - 0.5);
        for (double& b : model.bias) b = 0.4 * (wrng.uniform() - 0.5);

        double worst = 0.0;
        std::size_t checked = 0;
        const double h = 1e-5;
        for (const LossKind kind : kinds) {
            LossSpec spec;
            spec.kind = kind;
            const ParamGrad analytic = model_gradient(model, phantom, spec);

            const auto value_at = [&](const Model& m) {
                return evaluate(spec, forward(m, phantom), phantom.partial).value;
            };
            const auto probe = [&](double* slot, double reference) {
                const double saved = *slot;
                *slot = saved + h;
                const double up = value_at(model);
                *slot = saved - h;
                const double down = value_at(model);
                *slot = saved;
                const double numeric = (up - down) / (2.0 * h);
                const double rel =
                    std::abs(numeric - reference) / std::max(std::abs(reference), 1e-8);
                worst = std::max(worst, rel);
                ++checked;
            };
            for (std::size_t j = 0; j < model.weights.size(); ++j) {
                probe(&model.weights[j], analytic.weights[j]);
            }
            for (std::size_t j = 0; j < model.bias.size(); ++j) {
                probe(&model.bias[j], analytic.bias[j]);
            }
        }
        results.push_back(make_upper("gradient: model chain (all losses)", checked, worst, 1e-3));
    }

    return results;
}

std::vector<PropertyResult> check_oracle(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<PropertyResult> results;

    // Converted mean-class Dice against the direct marginal-Dice expression,
    // on block-uniform predictions where the two routes coincide.
    {
        double worst = 0.0;
        constexpr std::size_t kInstances = 100;
        for (std::size_t t = 0; t < kInstances; ++t) {
            const std::uint32_t k = static_cast<std::uint32_t>(2 + t % 7);
            const Dims dims = random_dims(rng);
            const LabelSetMap g = random_partition_annotation(dims, k, rng);
            const ProbMap p = block_uniform(random_simplex(dims, k, rng), g);

            LossSpec spec{LossKind::ConvertedDice, 1, 1e-5, 1e-12};
            const double converted = evaluate(spec, p, g).value;
            const double direct = marginal_dice_oracle(p, g, spec.epsilon);
            worst = std::max(worst, std::abs(converted - direct));
        }
        results.push_back(make_upper("converted_dice vs marginal-dice oracle", kInstances, worst, 1e-9));
    }

    // With all-singleton annotations both label-set Dice losses reduce to
    // plain mean-class Dice against the one-hot truth.
    {
        double worst_leaf = 0.0;
        double worst_converted = 0.0;
        constexpr std::size_t kInstances = 100;
        for (std::size_t t = 0; t < kInstances; ++t) {
            const std::uint32_t k = static_cast<std::uint32_t>(2 + t % 7);
            const Dims dims = random_dims(rng);
            std::vector<std::uint32_t> classes(dims.voxel_count());
            for (auto& c : classes) c = static_cast<std::uint32_t>(rng.below(k));
            const LabelSetMap g = singleton_map(classes, dims, k);
            const ProbMap p = random_simplex(dims, k, rng);

            LossSpec spec;
            spec.alpha = (t % 2 == 0) ? 2 : 1;
            const LossResult reference = mean_class_dice(p, one_hot(g), spec);

            spec.kind = LossKind::LeafDice;
            worst_leaf =
                std::max(worst_leaf, std::abs(evaluate(spec, p, g).value - reference.value));
            spec.kind = LossKind::ConvertedDice;
            worst_converted =
                std::max(worst_converted, std::abs(evaluate(spec, p, g).value - reference.value));
        }
        results.push_back(
            make_upper("singleton reduction: leaf_dice", kInstances, worst_leaf, 1e-12));
        results.push_back(
            make_upper("singleton reduction: converted_dice", kInstances, worst_converted, 1e-12));
    }

    // Converted cross entropy differs from the marginal cross entropy by
    // exactly the mean log label-set size.
    {
        double worst = 0.0;
        constexpr std::size_t kInstances = 100;
        for (std::size_t t = 0; t < kInstances; ++t) {
            const std::uint32_t k = static_cast<std::uint32_t>(2 + t % 7);
            const Dims dims = random_dims(rng);
            const LabelSetMap g = random_subset_annotation(dims, k, rng);
            const ProbMap p = random_interior(dims, k, rng);

            LossSpec spec;
            const double converted =
                convert_fully_supervised(
                    [&spec](const ProbMap& pred, const ProbMap& truth) {
                        return cross_entropy(pred, truth, spec);
                    },
                    p, g)
                    .value;
            const double marginal = marginal_cross_entropy(p, g, spec).value;
            double mean_log_size = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) mean_log_size += std::log(double(g[i].size()));
            mean_log_size /= static_cast<double>(g.size());

            worst = std::max(worst, std::abs((converted - marginal) - mean_log_size));
        }
        results.push_back(
            make_upper("converted cross-entropy additive constant", kInstances, worst, 1e-12));
    }

    // Not-masking contrast: leaf-Dice pushes mass away from non-merged
    // classes at merged voxels, while Dice restricted to annotated voxels has
    // exactly zero gradient there.
    {
        const Dims dims{4, 1, 1};
        const std::uint32_t k = 3;
        const LabelSetMap truth = singleton_map({0, 1, 2, 2}, dims, k);
        const LabelSetMap g = simulate_partial(truth, 0b110);  // classes 1, 2 merged
        const ProbMap p(dims, k,
                        {0.70, 0.20, 0.10,   // singleton {0}
                         0.25, 0.60, 0.15,   // merged
                         0.30, 0.30, 0.40,   // merged
                         0.20, 0.25, 0.55}); // merged

        LossSpec spec{LossKind::LeafDice, 2, 1e-5, 1e-12};
        const LossResult full = leaf_dice(p, g, spec);

        // Masked Dice oracle: the same expression with every sum restricted
        // to singleton-annotated voxels, differentiated directly.
        std::vector<double> num(k, 0.0), den(k, spec.epsilon);
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!g[i].is_singleton()) continue;
            const std::uint32_t label = g[i].sole_label();
            for (std::uint32_t c = 0; c < k; ++c) {
                num[c] += 2.0 * (label == c ? p(i, c) : 0.0);
                den[c] += (label == c ? 1.0 : 0.0) + p(i, c) * p(i, c);
            }
        }
        std::vector<double> masked_grad(p.values().size(), 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!g[i].is_singleton()) continue;  // the expression never sees other voxels
            const std::uint32_t label = g[i].sole_label();
            for (std::uint32_t c = 0; c < k; ++c) {
                const double indicator = (label == c) ? 1.0 : 0.0;
                masked_grad[i * k + c] =
                    -(2.0 * indicator * den[c] - num[c] * 2.0 * p(i, c)) / (den[c] * den[c]) / k;
            }
        }

        double masked_grad_at_merged = 0.0;  // exact zero expected
        double min_full_grad = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (g[i].is_singleton()) continue;
            for (std::uint32_t c = 0; c < k; ++c) {
                masked_grad_at_merged =
                    std::max(masked_grad_at_merged, std::abs(masked_grad[i * k + c]));
                if (g[i].contains(c)) continue;  // outside the merged set
                min_full_grad = std::min(min_full_grad, std::abs(full.gradient[i * k + c]));
            }
        }

        results.push_back(make_lower("leaf_dice gradient reaches merged voxels", 1, min_full_grad,
                                     1e-6, "masked-Dice gradient there is identically zero"));
        results.push_back(make_upper("masked-dice oracle gradient at merged voxels", 1,
                                     masked_grad_at_merged, 0.0));
    }

    return results;
}

bool all_pass(const std::vector<PropertyResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const PropertyResult& r) { return r.pass; });
}

void print_report(std::ostream& out, const std::vector<PropertyResult>& results) {
    for (const auto& r : results) {
        out << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  instances=" << r.instances
            << (r.lower_bound ? "  value=" : "  worst=") << r.worst
            << (r.lower_bound ? "  bound>=" : "  tol<=") << r.tolerance;
        if (!r.note.empty()) out << "  (" << r.note << ")";
        out << "\n";
    }
}

}  // namespace labelset
