#pragma once

#include "pafp/model.hpp"

#include <cstdint>
#include <optional>
#include <utility>

namespace pafp {

enum class PaVariant { Exact, RegularizedC };

struct PaConfig {
    PaVariant variant = PaVariant::Exact;
    double c = 1.0; // aggressiveness cap, RegularizedC only
};

struct SgdConfig {
    double learning_rate = 0.01;
    int steps_per_correction = 1;
};

enum class Verdict { Applied, Passive, Audit };

// One corrective update. weight_delta_norm is |tau|*||x||_2 by construction;
// an Applied Exact update has margin_after = 1 up to rounding.
struct PatchRecord {
    double tau = 0.0;
    double margin_before = 0.0;
    double margin_after = 0.0;
    double weight_delta_norm = 0.0;
    std::optional<double> estimated_auc_impact;
    Verdict verdict = Verdict::Passive;
};

// max(0, 1 - margin)
double hinge_loss(double margin);

// Margin-1 correction at the 0 level-set. Passive (model returned unchanged,
// bitwise) when the hinge loss is already 0; otherwise moves w the minimum
// distance that puts y*w'.x at 1 (Exact) or caps the step size at c
// (RegularizedC). The threshold is carried through untouched.
std::pair<LinearModel, PatchRecord> pa_update(const LinearModel& m, const LabeledExample& ex,
                                              const PaConfig& cfg = {});

// Baseline: steps_per_correction hinge-subgradient steps w += lr*y*x, each
// taken only while the hinge loss is still positive.
std::pair<LinearModel, PatchRecord> sgd_update(const LinearModel& m, const LabeledExample& ex,
                                               const SgdConfig& cfg = {});

// Epoch loop: reshuffle per epoch with a deterministic generator seeded by
// rng_seed, apply the configured update to every example in order.
LinearModel train_online(const LinearModel& init, const Dataset& data, int epochs,
                         const PaConfig& cfg, std::uint64_t rng_seed);
LinearModel train_online(const LinearModel& init, const Dataset& data, int epochs,
                         const SgdConfig& cfg, std::uint64_t rng_seed);

} // namespace pafp
