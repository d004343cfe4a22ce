#pragma once

#include "pafp/impact.hpp"
#include "pafp/metrics.hpp"
#include "pafp/model.hpp"
#include "pafp/pa.hpp"
#include "pafp/synth.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace pafp {

using UpdateRule = std::variant<PaConfig, SgdConfig>;

// One point of the per-step trajectory, measured on the held-out test set.
struct StepRow {
    double accuracy = 0.0;
    double auc = 0.0;
    double pauc = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    double est_impact = 0.0; // estimate_auc(current) - estimate_auc(original)
};

struct AdaptiveReport {
    std::vector<int> errors_per_trial;
    double mean_errors = 0.0;
    double stddev_errors = 0.0;
    int min_errors = 0;
    int max_errors = 0;
    StepRow pre;                  // metrics before any presentation
    std::vector<StepRow> mean_traj; // length n_hard, one row per presentation
    std::vector<StepRow> std_traj;
    int uncorrectable_events = 0;   // alert fired but hinge loss was already 0
    int correction_regressions = 0; // corrected FP still flagged right after its update
    double fpr_limit = 0.0;
};

struct FlipPair {
    double estimated = 0.0;
    double actual = 0.0;
};

struct CalibrationReport {
    std::vector<FlipPair> pairs;
    bool correlation_defined = false; // false when < 2 pairs or zero variance
    double pearson_r = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
};

// Fixed scenario: metrics at the model's stored threshold, no calibration.
EvalReport eval_fixed(const LinearModel& model, const Dataset& test, double fpr_limit = 0.001);

// Adaptive scenario: per trial, present the hard FPs in a per-trial random
// order; an error is an alert at the deployed theta; on error apply the
// configured update (correction targets margin 1 at the 0 level-set).
// Metrics after each presentation are on `test`; estimated impact is always
// against the original model. Trials aggregate by index (mean/stddev).
AdaptiveReport eval_adaptive(const LinearModel& model, const Dataset& hard_fps,
                             const Dataset& test, int trials, const UpdateRule& rule,
                             const SummarySet& summaries, std::uint64_t seed,
                             double fpr_limit = 0.001);

// Label-flip experiment: sample n_flips training examples without
// replacement, flip each label, and compare the estimated impact against the
// actual test AUC delta of the would-be patched model. Both vs the original.
CalibrationReport impact_calibration(const LinearModel& model, const Dataset& train,
                                     const Dataset& test, const SummarySet& summaries,
                                     std::size_t n_flips, std::uint64_t seed,
                                     const PaConfig& cfg = {});

// Scores of every example in d under m, in dataset order.
std::vector<double> score_all(const LinearModel& m, const Dataset& d);

std::vector<int> labels_of(const Dataset& d);

} // namespace pafp
