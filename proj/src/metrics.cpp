#include "pafp/metrics.hpp"

#include "pafp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pafp {

namespace {

struct ClassCounts {
    std::size_t pos = 0;
    std::size_t neg = 0;
};

ClassCounts check_two_class(const std::vector<double>& scores, const std::vector<int>& labels,
                            const char* who) {
    if (scores.size() != labels.size())
        throw InvalidInput(std::string(who) + ": scores/labels length mismatch");
    ClassCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!std::isfinite(scores[i]))
            throw InvalidInput(std::string(who) + ": non-finite score");
        if (labels[i] == +1)
            ++c.pos;
        else if (labels[i] == -1)
            ++c.neg;
        else
            throw InvalidInput(std::string(who) + ": label must be -1 or +1");
    }
    if (c.pos == 0 || c.neg == 0)
        throw MetricUndefined(std::string(who) + ": needs at least one example of each label");
    return c;
}

// Tie groups in descending score order: (positives, negatives) per group.
std::vector<std::pair<std::size_t, std::size_t>> tie_groups(const std::vector<double>& scores,
                                                            const std::vector<int>& labels) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<std::pair<std::size_t, std::size_t>> groups;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        std::size_t p = 0, n = 0;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
            (labels[idx[j]] == +1 ? p : n) += 1;
            ++j;
        }
        groups.emplace_back(p, n);
        i = j;
    }
    return groups;
}

} // namespace

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    const ClassCounts c = check_two_class(scores, labels, "roc_auc");
    // Pair count: for each tie group, its positives beat every strictly-lower
    // negative and split the in-group negatives. Identical to the trapezoid
    // sum over the tie-grouped ROC.
    double won = 0.0;
    std::size_t negs_below = c.neg;
    for (const auto& [p, n] : tie_groups(scores, labels)) {
        negs_below -= n;
        won += double(p) * (double(negs_below) + 0.5 * double(n));
    }
    return won / (double(c.pos) * double(c.neg));
}

double partial_auc(const std::vector<double>& scores, const std::vector<int>& labels,
                   double fpr_limit) {
    if (!(fpr_limit > 0.0) || fpr_limit > 1.0)
        throw InvalidInput("partial_auc: fpr_limit must be in (0, 1]");
    const ClassCounts c = check_two_class(scores, labels, "partial_auc");

    // Walk the ROC polyline (each tie group is one segment) and integrate
    // TPR d(FPR) up to fpr_limit, clipping the last segment linearly.
    double area = 0.0;
    double fpr = 0.0, tpr = 0.0;
    for (const auto& [p, n] : tie_groups(scores, labels)) {
        const double nfpr = fpr + double(n) / double(c.neg);
        const double ntpr = tpr + double(p) / double(c.pos);
        if (nfpr <= fpr_limit) {
            area += (nfpr - fpr) * 0.5 * (tpr + ntpr);
        } else if (fpr < fpr_limit) {
            const double t = (fpr_limit - fpr) / (nfpr - fpr);
            const double cut_tpr = tpr + t * (ntpr - tpr);
            area += (fpr_limit - fpr) * 0.5 * (tpr + cut_tpr);
        }
        fpr = nfpr;
        tpr = ntpr;
        if (fpr >= fpr_limit) break;
    }
    return area / fpr_limit;
}

Rates rates_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                         double theta) {
    const ClassCounts c = check_two_class(scores, labels, "rates_at_threshold");
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] >= theta) (labels[i] == +1 ? tp : fp) += 1;
    }
    Rates r;
    r.tpr = double(tp) / double(c.pos);
    r.fpr = double(fp) / double(c.neg);
    r.accuracy = (double(tp) + double(c.neg - fp)) / double(scores.size());
    return r;
}

double calibrate_threshold(const std::vector<double>& benign_scores, double target_fpr) {
    if (benign_scores.empty())
        throw InvalidInput("calibrate_threshold: empty benign set");
    if (!(target_fpr >= 0.0) || target_fpr >= 1.0)
        throw InvalidInput("calibrate_threshold: target_fpr must be in [0, 1)");
    for (double s : benign_scores)
        if (!std::isfinite(s)) throw InvalidInput("calibrate_threshold: non-finite score");

    std::vector<double> s = benign_scores;
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    // Largest alert count the target allows; the tiny nudge keeps exact
    // products like 0.3*10 from flooring to 2.
    const auto allowed = std::size_t(std::floor(target_fpr * double(n) + 1e-9));

    // Everything at or below this value must stay under theta. Ties count as
    // alerts, so theta has to clear every copy of it.
    const double cut = s[n - 1 - allowed];
    const auto above = std::upper_bound(s.begin(), s.end(), cut);
    if (above != s.end()) return cut + (*above - cut) / 2.0;

    // No score exceeds the cut (target 0 or a tie block at the top): step an
    // epsilon of the score range above the maximum.
    const double range = s.back() - s.front();
    const double scale = std::max({range, std::abs(s.back()), 1.0});
    double theta = s.back() + scale * 4.0 * std::numeric_limits<double>::epsilon();
    if (theta <= s.back())
        theta = std::nextafter(s.back(), std::numeric_limits<double>::infinity());
    return theta;
}

} // namespace pafp
