#include "pafp/harness.hpp"

#include "pafp/errors.hpp"
#include "pafp/kernels.hpp"
#include "pafp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace pafp {

std::vector<double> score_all(const LinearModel& m, const Dataset& d) {
    std::vector<double> s(d.examples.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = kern::dot(m.w.data(), d.examples[i].x.data(), m.w.size());
    return s;
}

std::vector<int> labels_of(const Dataset& d) {
    std::vector<int> y(d.examples.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = d.examples[i].y;
    return y;
}

namespace {

EvalReport report_from_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                              double theta, double fpr_limit) {
    EvalReport r;
    r.threshold = theta;
    r.fpr_limit = fpr_limit;
    r.auc = roc_auc(scores, labels);
    r.pauc_norm = partial_auc(scores, labels, fpr_limit);
    const Rates rates = rates_at_threshold(scores, labels, theta);
    r.tpr = rates.tpr;
    r.fpr = rates.fpr;
    r.accuracy = rates.accuracy;
    for (int y : labels) (y == +1 ? r.n_pos : r.n_neg) += 1;
    return r;
}

StepRow step_from_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                         double theta, double fpr_limit, double est_impact) {
    StepRow row;
    row.auc = roc_auc(scores, labels);
    row.pauc = partial_auc(scores, labels, fpr_limit);
    const Rates rates = rates_at_threshold(scores, labels, theta);
    row.tpr = rates.tpr;
    row.fpr = rates.fpr;
    row.accuracy = rates.accuracy;
    row.est_impact = est_impact;
    return row;
}

} // namespace

EvalReport eval_fixed(const LinearModel& model, const Dataset& test, double fpr_limit) {
    if (test.dim != model.w.size())
        throw InvalidInput("eval_fixed: dataset dim does not match model dim");
    return report_from_scores(score_all(model, test), labels_of(test), model.threshold, fpr_limit);
}

AdaptiveReport eval_adaptive(const LinearModel& model, const Dataset& hard_fps,
                             const Dataset& test, int trials, const UpdateRule& rule,
                             const SummarySet& summaries, std::uint64_t seed, double fpr_limit) {
    if (trials < 1) throw InvalidInput("eval_adaptive: trials must be >= 1");
    if (hard_fps.examples.empty()) throw InvalidInput("eval_adaptive: no hard FPs");
    if (hard_fps.dim != model.w.size() || test.dim != model.w.size())
        throw InvalidInput("eval_adaptive: dimension mismatch");
    for (const auto& ex : hard_fps.examples)
        if (ex.y != -1) throw InvalidInput("eval_adaptive: hard FPs must all be labeled -1");

    const std::size_t n_steps = hard_fps.examples.size();
    const std::vector<int> test_labels = labels_of(test);
    const double base_est = estimate_auc(model.w, summaries);

    AdaptiveReport rep;
    rep.fpr_limit = fpr_limit;
    rep.pre = step_from_scores(score_all(model, test), test_labels, model.threshold, fpr_limit, 0.0);

    std::vector<std::vector<StepRow>> rows(trials);
    rep.errors_per_trial.resize(trials);

    std::vector<std::size_t> order(n_steps);
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(mix_seed(seed, std::uint64_t(t)));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);

        LinearModel m = model;
        int errors = 0;
        StepRow current = rep.pre;
        rows[t].reserve(n_steps);

        for (std::size_t step = 0; step < n_steps; ++step) {
            const LabeledExample& ex = hard_fps.examples[order[step]];
            const double s = kern::dot(m.w.data(), ex.x.data(), m.w.size());
            if (s >= m.threshold) {
                ++errors;
                bool updated = false;
                if (std::holds_alternative<PaConfig>(rule)) {
                    auto [next, rec] = pa_update(m, ex, std::get<PaConfig>(rule));
                    if (rec.verdict == Verdict::Applied) {
                        m = std::move(next);
                        updated = true;
                    } else {
                        ++rep.uncorrectable_events;
                    }
                } else {
                    auto [next, rec] = sgd_update(m, ex, std::get<SgdConfig>(rule));
                    if (rec.verdict == Verdict::Applied) {
                        m = std::move(next);
                        updated = true;
                    } else {
                        ++rep.uncorrectable_events;
                    }
                }
                if (updated) {
                    if (m.threshold >= 0.0 && classify(m, ex.x) == +1)
                        ++rep.correction_regressions;
                    current = step_from_scores(score_all(m, test), test_labels, m.threshold,
                                               fpr_limit,
                                               estimate_auc(m.w, summaries) - base_est);
                }
            }
            // Model unchanged since the last row when no update fired, so the
            // metrics carry over as-is.
            rows[t].push_back(current);
        }
        rep.errors_per_trial[t] = errors;
    }

    double sum = 0.0, sumsq = 0.0;
    rep.min_errors = rep.errors_per_trial[0];
    rep.max_errors = rep.errors_per_trial[0];
    for (int e : rep.errors_per_trial) {
        sum += e;
        sumsq += double(e) * e;
        rep.min_errors = std::min(rep.min_errors, e);
        rep.max_errors = std::max(rep.max_errors, e);
    }
    rep.mean_errors = sum / trials;
    rep.stddev_errors =
        trials > 1 ? std::sqrt(std::max(0.0, (sumsq - sum * sum / trials) / (trials - 1))) : 0.0;

    rep.mean_traj.resize(n_steps);
    rep.std_traj.resize(n_steps);
    auto fields = {&StepRow::accuracy, &StepRow::auc, &StepRow::pauc,
                   &StepRow::tpr,      &StepRow::fpr, &StepRow::est_impact};
    for (std::size_t step = 0; step < n_steps; ++step) {
        for (double StepRow::*f : fields) {
            double s1 = 0.0, s2 = 0.0;
            for (int t = 0; t < trials; ++t) {
                const double v = rows[t][step].*f;
                s1 += v;
                s2 += v * v;
            }
            const double mean = s1 / trials;
            rep.mean_traj[step].*f = mean;
            rep.std_traj[step].*f =
                trials > 1 ? std::sqrt(std::max(0.0, (s2 - s1 * s1 / trials) / (trials - 1)))
                           : 0.0;
        }
    }
    return rep;
}

CalibrationReport impact_calibration(const LinearModel& model, const Dataset& train,
                                     const Dataset& test, const SummarySet& summaries,
                                     std::size_t n_flips, std::uint64_t seed,
                                     const PaConfig& cfg) {
    if (n_flips > train.examples.size())
        throw InvalidInput("impact_calibration: n_flips exceeds training set size");
    if (train.dim != model.w.size() || test.dim != model.w.size())
        throw InvalidInput("impact_calibration: dimension mismatch");

    CalibrationReport rep;
    if (n_flips == 0) return rep;

    // Partial Fisher-Yates: the first n_flips entries are a uniform sample
    // without replacement.
    std::vector<std::size_t> idx(train.examples.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n_flips; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }

    const std::vector<int> test_labels = labels_of(test);
    const double base_auc = roc_auc(score_all(model, test), test_labels);

    rep.pairs.reserve(n_flips);
    for (std::size_t i = 0; i < n_flips; ++i) {
        LabeledExample flipped = train.examples[idx[i]];
        flipped.y = -flipped.y;
        auto [est, rec] = estimate_impact(model, flipped, cfg, summaries);
        const auto [patched, rec2] = pa_update(model, flipped, cfg);
        const double actual = roc_auc(score_all(patched, test), test_labels) - base_auc;
        rep.pairs.push_back({est, actual});
    }

    if (rep.pairs.size() >= 2) {
        double sx = 0, sy = 0;
        for (const auto& p : rep.pairs) {
            sx += p.estimated;
            sy += p.actual;
        }
        const double mx = sx / rep.pairs.size(), my = sy / rep.pairs.size();
        double sxx = 0, syy = 0, sxy = 0;
        for (const auto& p : rep.pairs) {
            sxx += (p.estimated - mx) * (p.estimated - mx);
            syy += (p.actual - my) * (p.actual - my);
            sxy += (p.estimated - mx) * (p.actual - my);
        }
        if (sxx > 0.0 && syy > 0.0) {
            rep.correlation_defined = true;
            rep.pearson_r = sxy / std::sqrt(sxx * syy);
            rep.slope = sxy / sxx;
            rep.intercept = my - rep.slope * mx;
        }
    }
    return rep;
}

} // namespace pafp
