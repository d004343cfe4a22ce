#pragma once

#include <cstddef>
#include <vector>

namespace pafp {

struct Rates {
    double tpr = 0.0;
    double fpr = 0.0;
    double accuracy = 0.0;
};

// One scenario-step report. pauc_norm is the mean TPR over FPR in
// [0, fpr_limit]; n_pos/n_neg are the class counts behind auc.
struct EvalReport {
    double accuracy = 0.0;
    double auc = 0.0;
    double pauc_norm = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    double threshold = 0.0;
    double fpr_limit = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

// Probability a uniformly random positive outranks a uniformly random
// negative, ties counted 1/2; equals the trapezoidal area under the
// tie-grouped ROC. Throws MetricUndefined on single-class input.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Area under the tie-grouped ROC restricted to FPR in [0, fpr_limit], with
// linear interpolation at the right edge, divided by fpr_limit.
double partial_auc(const std::vector<double>& scores, const std::vector<int>& labels,
                   double fpr_limit);

// tpr = P(score >= theta | pos), fpr = P(score >= theta | neg); ties alert.
Rates rates_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                         double theta);

// Smallest theta (up to the midpoint convention) with empirical FPR on the
// benign scores <= target_fpr. Midpoint between adjacent order statistics;
// for target 0 (or whenever no alert is allowed) a hair above the maximum.
double calibrate_threshold(const std::vector<double>& benign_scores, double target_fpr);

} // namespace pafp
