// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "labelset/checks.hpp"
#include "labelset/experiment.hpp"
#include "labelset/gradcheck.hpp"
#include "labelset/losses.hpp"
#include "labelset/marginalize.hpp"
#include "labelset/metrics.hpp"
#include "labelset/rng.hpp"
#include "labelset/volio.hpp"
#include "oracles.hpp"

using namespace labelset;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    bool pass = false;
    std::string detail;
};

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const PropertyResult& find_row(const std::vector<PropertyResult>& rows, const std::string& name) {
    for (const auto& r : rows) {
        if (r.name == name) return r;
    }
    throw std::runtime_error("missing property row: " + name);
}

std::string format_worst(const std::vector<const PropertyResult*>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i) out << ", ";
        out << rows[i]->name << "=" << rows[i]->worst;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// 1. Axiom suite for the three compliant losses, 200 instances, < 10 s.
Criterion criterion_axioms(const std::vector<PropertyResult>& axioms, double elapsed) {
    const auto& leaf = find_row(axioms, "axiom: leaf_dice");
    const auto& converted = find_row(axioms, "axiom: converted_dice");
    const auto& mce = find_row(axioms, "axiom: marginal_cross_entropy");

    Criterion c;
    c.pass = leaf.pass && converted.pass && mce.pass && elapsed < 10.0;
    std::ostringstream out;
    out << format_worst({&leaf, &converted, &mce}) << "  tol<=1e-9  runtime=" << elapsed << "s";
    c.detail = out.str();
    return c;
}

// 2. Fixed soft-target Dice counterexample: values 7/9 vs 2/3, gap >= 0.1.
Criterion criterion_negative_control() {
    const Dims one{1, 1, 1};
    const LabelSetMap g(one, 3, {LabelSet(0b011)});
    const ProbMap committed(one, 3, {1.0, 0.0, 0.0});
    const ProbMap hedged(one, 3, {0.5, 0.5, 0.0});
    const LossSpec spec{LossKind::SoftTargetDice, 1, 0.0, 1e-12};

    const double a = soft_target_dice(committed, g, spec).value;
    const double b = soft_target_dice(hedged, g, spec).value;
    double phi_gap = 0.0;
    const ProbMap pa = phi(committed, g);
    const ProbMap pb = phi(hedged, g);
    for (std::size_t i = 0; i < pa.values().size(); ++i) {
        phi_gap = std::max(phi_gap, std::abs(pa.values()[i] - pb.values()[i]));
    }

    Criterion c;
    const bool values_ok =
        std::abs(a - 7.0 / 9.0) <= 1e-12 && std::abs(b - 2.0 / 3.0) <= 1e-12;
    c.pass = values_ok && phi_gap == 0.0 && std::abs(a - b) >= 0.1;
    std::ostringstream out;
    out << "values " << a << " vs " << b << ", gap=" << std::abs(a - b)
        << " (>=0.1), identical phi images";
    c.detail = out.str();
    return c;
}

// 3. Idempotence and psi0 fixed point, exact within 1e-12 over 200 instances.
Criterion criterion_idempotence(const std::vector<PropertyResult>& axioms) {
    const auto& idem = find_row(axioms, "phi idempotent");
    const auto& fixed = find_row(axioms, "psi0 fixed point of phi");
    Criterion c;
    c.pass = idem.pass && fixed.pass;
    c.detail = format_worst({&idem, &fixed}) + "  tol<=1e-12";
    return c;
}

// 4. Singleton reduction to mean-class Dice within 1e-12 over 100 instances.
Criterion criterion_reduction(const std::vector<PropertyResult>& oracle) {
    const auto& leaf = find_row(oracle, "singleton reduction: leaf_dice");
    const auto& converted = find_row(oracle, "singleton reduction: converted_dice");
    Criterion c;
    c.pass = leaf.pass && converted.pass;
    c.detail = format_worst({&leaf, &converted}) + "  tol<=1e-12";
    return c;
}

// 5. Converted Dice (alpha=1) vs the direct marginal-Dice oracle, 1e-9.
Criterion criterion_marginal_oracle(const std::vector<PropertyResult>& oracle) {
    const auto& row = find_row(oracle, "converted_dice vs marginal-dice oracle");
    Criterion c;
    c.pass = row.pass;
    c.detail = format_worst({&row}) + "  tol<=1e-9";
    return c;
}

// 6. Gradient checks: five losses <= 1e-4, model chain <= 1e-3, < 30 s.
Criterion criterion_gradients(const std::vector<PropertyResult>& grads, double elapsed) {
    Criterion c;
    c.pass = elapsed < 30.0;
    std::vector<const PropertyResult*> rows;
    for (const auto& r : grads) {
        if (r.name.rfind("gradient: ", 0) == 0) {
            rows.push_back(&r);
            c.pass = c.pass && r.pass;
        }
    }
    c.pass = c.pass && find_row(grads, "gradcheck self-test (quadratic)").pass;
    c.detail = format_worst(rows) + "  runtime=" + std::to_string(elapsed) + "s";
    return c;
}

// 7. Not-masking: leaf-Dice gradient reaches merged voxels, masked oracle
// gradient there is exactly zero.
Criterion criterion_not_masking(const std::vector<PropertyResult>& oracle) {
    const auto& reach = find_row(oracle, "leaf_dice gradient reaches merged voxels");
    const auto& masked = find_row(oracle, "masked-dice oracle gradient at merged voxels");
    Criterion c;
    c.pass = reach.pass && masked.pass;
    std::ostringstream out;
    out << "min |grad|=" << reach.worst << " (>0), masked grad=" << masked.worst << " (==0)";
    c.detail = out.str();
    return c;
}

// 8. Synthetic four-way comparison at 24^3, K=5.
Criterion criterion_four_way() {
    const auto start = std::chrono::steady_clock::now();
    // mid_b is a thin shell: its singleton supervision is scarce, which is
    // where hedged soft targets hurt the most.
    const char* config_text = R"json({
      "labels": ["background", "outer", "mid_a", "mid_b", "core"],
      "dims": [24, 24, 24],
      "noise_sigma": 0.05,
      "shell_radii": [0.30, 0.42, 0.78, 0.90],
      "seed": 20210901,
      "volumes": [
        {"id": "f0", "role": "train"},
        {"id": "f1", "role": "train"},
        {"id": "f2", "role": "train"},
        {"id": "f3", "role": "train"},
        {"id": "p0", "role": "train", "lprime": ["mid_a", "mid_b"]},
        {"id": "p1", "role": "train", "lprime": ["mid_a", "mid_b"]},
        {"id": "p2", "role": "train", "lprime": ["mid_a", "mid_b"]},
        {"id": "p3", "role": "train", "lprime": ["mid_a", "mid_b"]},
        {"id": "p4", "role": "train", "lprime": ["mid_a", "mid_b"]},
        {"id": "p5", "role": "train", "lprime": ["mid_a", "mid_b"]},
        {"id": "e0", "role": "test"},
        {"id": "e1", "role": "test"},
        {"id": "e2", "role": "test"},
        {"id": "e3", "role": "test"}
      ],
      "losses": [
        {"kind": "mean_class_dice", "alpha": 2},
        {"kind": "soft_target_dice", "alpha": 2},
        {"kind": "converted_dice", "alpha": 2},
        {"kind": "leaf_dice", "alpha": 2}
      ],
      "train": {"learning_rate": 0.01, "batch_size": 3, "max_epochs": 1500,
                "early_stop_patience": 1500, "split_fraction": 0.9}
    })json";

    const ExperimentConfig cfg = parse_config(config_text);
    const fs::path out_dir =
        fs::temp_directory_path() / ("labelset_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(out_dir);

    Criterion c;
    try {
        run_generate(cfg, out_dir);
        const CompareSummary summary = run_compare(cfg, out_dir);

        const auto merged_mean = [&](const std::string& loss_name) {
            const auto& per_class = summary.per_loss_class.at(loss_name);
            return 0.5 * (per_class.at("mid_a").dsc_mean + per_class.at("mid_b").dsc_mean);
        };
        const double leaf = merged_mean("leaf_dice");
        const double soft = merged_mean("soft_target_dice");
        const double converted = merged_mean("converted_dice");
        const double fully = merged_mean("mean_class_dice");
        const double elapsed = seconds_since(start);

        c.pass = leaf >= 0.80 && leaf > soft && elapsed < 600.0;
        std::ostringstream out;
        out << "merged-class mean DSC: leaf=" << leaf << " (>=0.80), soft=" << soft
            << " (< leaf), converted=" << converted << ", fully=" << fully
            << "  runtime=" << elapsed << "s";
        c.detail = out.str();
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail = std::string("exception: ") + e.what();
    }
    fs::remove_all(out_dir);
    return c;
}

// 9. DSC and HD95 against exhaustive oracles, exact, 50 instances <= 10^3.
Criterion criterion_metrics_oracle() {
    Rng rng(77001);
    double worst = 0.0;
    bool defined_mismatch = false;
    for (int t = 0; t < 50; ++t) {
        const Dims dims{static_cast<std::uint32_t>(2 + rng.below(9)),
                        static_cast<std::uint32_t>(2 + rng.below(9)),
                        static_cast<std::uint32_t>(2 + rng.below(9))};
        const std::uint32_t k = static_cast<std::uint32_t>(2 + rng.below(3));
        HardSeg a{dims, k, std::vector<std::uint32_t>(dims.voxel_count())};
        HardSeg b{dims, k, std::vector<std::uint32_t>(dims.voxel_count())};
        for (auto& v : a.labels) v = static_cast<std::uint32_t>(rng.below(k));
        for (auto& v : b.labels) v = static_cast<std::uint32_t>(rng.below(k));
        const Spacing s{0.5 + rng.uniform(), 0.5 + rng.uniform(), 0.5 + rng.uniform()};

        for (std::uint32_t cls = 0; cls < k; ++cls) {
            worst = std::max(worst,
                             std::abs(dice_score(a, b, cls) - testing::brute_dice(a, b, cls)));
            const auto ours = hd95(a, b, cls, s);
            const auto oracle = testing::brute_hd95(a, b, cls, s);
            if (ours.has_value() != oracle.has_value()) defined_mismatch = true;
            if (ours && oracle) worst = std::max(worst, std::abs(*ours - *oracle));
        }
    }
    Criterion c;
    c.pass = worst == 0.0 && !defined_mismatch;
    std::ostringstream out;
    out << "max |impl - oracle| = " << worst << " over 50 instances (exact match required)";
    c.detail = out.str();
    return c;
}

// 10. LSV1 round-trip bitwise identity plus malformed-header fixtures.
Criterion criterion_io_roundtrip() {
    const fs::path dir =
        fs::temp_directory_path() / ("labelset_acceptance_io_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    Rng rng(88002);

    Criterion c;
    c.pass = true;
    std::size_t round_trips = 0;
    try {
        for (int t = 0; t < 100; ++t) {
            Volume v;
            v.kind = static_cast<VolumeKind>(t % 3);
            v.dims = Dims{static_cast<std::uint32_t>(1 + rng.below(5)),
                          static_cast<std::uint32_t>(1 + rng.below(5)),
                          static_cast<std::uint32_t>(1 + rng.below(5))};
            const std::size_t n = v.dims.voxel_count();
            if (v.kind == VolumeKind::LabelSetMap) {
                v.channels = static_cast<std::uint16_t>(2 + rng.below(7));
                const std::uint64_t full = (std::uint64_t{1} << v.channels) - 1;
                for (std::size_t i = 0; i < n; ++i) v.masks.push_back(1 + rng.below(full));
            } else {
                v.channels = static_cast<std::uint16_t>(1 + rng.below(6));
                for (std::size_t i = 0; i < n * v.channels; ++i) {
                    v.values.push_back(static_cast<float>(rng.uniform() * 2.0 - 1.0));
                }
            }
            const fs::path file = dir / ("rt" + std::to_string(t) + ".lsv");
            write_volume(file, v);
            const Volume back = read_volume(file);
            bool same = back.kind == v.kind && back.dims == v.dims &&
                        back.channels == v.channels && back.masks == v.masks &&
                        back.values.size() == v.values.size();
            for (std::size_t i = 0; same && i < v.values.size(); ++i) {
                std::uint32_t x, y;
                std::memcpy(&x, &v.values[i], 4);
                std::memcpy(&y, &back.values[i], 4);
                same = x == y;
            }
            if (!same) {
                c.pass = false;
                break;
            }
            ++round_trips;
        }

        // Malformed fixtures must raise the specified errors.
        const fs::path good = dir / "fixture.lsv";
        const LabelSetMap map(Dims{1, 1, 1}, 3, {LabelSet(0b001)});
        write_volume(good, to_volume(map));
        std::ifstream in(good, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

        const auto expect_error = [&](std::string mutated, ErrorCode code) {
            const fs::path f = dir / "mutant.lsv";
            std::ofstream out(f, std::ios::binary | std::ios::trunc);
            out.write(mutated.data(), static_cast<std::streamsize>(mutated.size()));
            out.close();
            try {
                read_volume(f);
                return false;
            } catch (const Error& e) {
                return e.code() == code;
            }
        };

        std::string bad_magic = bytes;
        bad_magic[3] = '0';
        std::string bad_mask = bytes;
        bad_mask[19] = 0x20;
        c.pass = c.pass && expect_error(bad_magic, ErrorCode::BadMagic) &&
                 expect_error(bytes.substr(0, 12), ErrorCode::TruncatedFile) &&
                 expect_error(bytes.substr(0, bytes.size() - 2), ErrorCode::TruncatedFile) &&
                 expect_error(bad_mask, ErrorCode::InvalidBitmask);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail = std::string("exception: ") + e.what();
    }
    fs::remove_all(dir);
    if (c.detail.empty()) {
        c.detail = std::to_string(round_trips) +
                   "/100 volumes bitwise identical; malformed fixtures raise "
                   "BadMagic/TruncatedFile/InvalidBitmask";
    }
    return c;
}

}  // namespace

int main() {
    std::cout.precision(10);

    auto start_axioms = std::chrono::steady_clock::now();
    const std::vector<PropertyResult> axioms = check_axioms();
    const double axioms_elapsed = seconds_since(start_axioms);

    auto start_grads = std::chrono::steady_clock::now();
    const std::vector<PropertyResult> grads = check_gradients();
    const double grads_elapsed = seconds_since(start_grads);

    const std::vector<PropertyResult> oracle = check_oracle();

    struct Entry {
        const char* name;
        Criterion result;
    };
    const Entry entries[] = {
        {"axiom suite (3 compliant losses, 200 instances)",
         criterion_axioms(axioms, axioms_elapsed)},
        {"negative control (soft-target Dice counterexample)", criterion_negative_control()},
        {"idempotence and psi0 fixed point (1e-12, 200 instances)",
         criterion_idempotence(axioms)},
        {"singleton reduction to mean-class Dice (1e-12, 100 instances)",
         criterion_reduction(oracle)},
        {"converted Dice vs marginal-Dice oracle (1e-9, 100 instances)",
         criterion_marginal_oracle(oracle)},
        {"gradient checks (losses 1e-4, model chain 1e-3)",
         criterion_gradients(grads, grads_elapsed)},
        {"not-masking gradient property", criterion_not_masking(oracle)},
        {"synthetic four-way comparison (K=5, 24^3)", criterion_four_way()},
        {"metrics vs exhaustive oracles (exact, 50 instances)", criterion_metrics_oracle()},
        {"LSV1 round-trip and malformed-header fixtures", criterion_io_roundtrip()},
    };

    bool all = true;
    int index = 1;
    for (const Entry& e : entries) {
        std::cout << "[" << index << "/10] " << (e.result.pass ? "PASS" : "FAIL") << "  "
                  << e.name << "\n        " << e.result.detail << "\n";
        all = all && e.result.pass;
        ++index;
    }
    std::cout << (all ? "ACCEPTANCE: all criteria passed" : "ACCEPTANCE: FAILURES PRESENT")
              << "\n";
    return all ? 0 : 1;
}
