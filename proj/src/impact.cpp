#include "pafp/impact.hpp"

#include "pafp/errors.hpp"
#include "pafp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace pafp {

namespace {

// Squared distance from every point to its nearest chosen center so far;
// used by the D^2-weighted k-means++ draw.
void refresh_best(const Dataset& data, const FeatureVector& center, std::vector<double>& best) {
    for (std::size_t i = 0; i < data.examples.size(); ++i) {
        const double d = kern::sqdist(data.examples[i].x.data(), center.data(), data.dim);
        if (d < best[i]) best[i] = d;
    }
}

std::vector<FeatureVector> kmeanspp_init(const Dataset& data, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = data.examples.size();
    std::vector<FeatureVector> centers;
    centers.reserve(k);

    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    centers.push_back(data.examples[first(rng)].x);

    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    while (centers.size() < k) {
        refresh_best(data, centers.back(), best);
        double total = 0.0;
        for (double d : best) total += d;
        if (total == 0.0) {
            // All remaining points coincide with chosen centers; any pick is
            // as good as any other, take the lowest unused-distance index.
            centers.push_back(data.examples[0].x);
            continue;
        }
        std::uniform_real_distribution<double> u(0.0, total);
        double r = u(rng);
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            r -= best[i];
            if (r <= 0.0) {
                pick = i;
                break;
            }
        }
        centers.push_back(data.examples[pick].x);
    }
    return centers;
}

} // namespace

SummarySet build_summaries(const Dataset& data, std::size_t k, std::uint64_t seed, int max_iters) {
    validate(data);
    const std::size_t n = data.examples.size();
    if (n == 0) throw InvalidInput("build_summaries: empty dataset");
    if (k == 0) throw InvalidInput("build_summaries: k must be >= 1");
    if (k > n) throw InvalidInput("build_summaries: k exceeds dataset size");
    if (max_iters < 1) throw InvalidInput("build_summaries: max_iters must be >= 1");

    std::mt19937_64 rng(seed);
    std::vector<FeatureVector> centers = kmeanspp_init(data, k, rng);
    std::vector<std::size_t> assign(n, k); // k = unassigned sentinel

    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t bestc = 0;
            double bestd = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = kern::sqdist(data.examples[i].x.data(), centers[c].data(), data.dim);
                if (d < bestd) {
                    bestd = d;
                    bestc = c;
                }
            }
            if (assign[i] != bestc) {
                assign[i] = bestc;
                changed = true;
            }
        }

        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t a : assign) ++sizes[a];

        // Reseed each empty cluster to the point farthest from its stale
        // center (lowest index on ties) before recomputing means.
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] != 0) continue;
            std::size_t far = 0;
            double fard = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = kern::sqdist(data.examples[i].x.data(), centers[c].data(), data.dim);
                if (d > fard && sizes[assign[i]] > 1) {
                    fard = d;
                    far = i;
                }
            }
            --sizes[assign[far]];
            assign[far] = c;
            sizes[c] = 1;
            changed = true;
        }

        for (std::size_t c = 0; c < k; ++c)
            std::fill(centers[c].begin(), centers[c].end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            kern::axpy(1.0, data.examples[i].x.data(), centers[assign[i]].data(), data.dim);
        for (std::size_t c = 0; c < k; ++c)
            for (double& v : centers[c]) v /= double(sizes[c]);

        if (!changed) break;
    }

    SummarySet out;
    out.dim = data.dim;
    out.seed = seed;
    out.clusters.resize(k);
    std::vector<std::size_t> sizes(k, 0), mal(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++sizes[assign[i]];
        if (data.examples[i].y == +1) ++mal[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        out.clusters[c].center = centers[c];
        out.clusters[c].size = sizes[c];
        out.clusters[c].malicious_fraction = double(mal[c]) / double(sizes[c]);
    }
    return out;
}

double estimate_auc(const FeatureVector& w, const SummarySet& summaries) {
    if (summaries.clusters.empty())
        throw InvalidInput("estimate_auc: empty summary set");
    if (w.size() != summaries.dim)
        throw InvalidInput("estimate_auc: weight length " + std::to_string(w.size()) +
                           " does not match summary dim " + std::to_string(summaries.dim));
    double alpha = 0.0, mass = 0.0;
    for (const auto& c : summaries.clusters) {
        if (c.size == 0) throw InvalidInput("estimate_auc: zero-size cluster");
        const double yhat = kern::dot(w.data(), c.center.data(), w.size());
        alpha += double(c.size) *
                 (yhat >= 0.0 ? c.malicious_fraction : 1.0 - c.malicious_fraction);
        mass += double(c.size);
    }
    return alpha / mass;
}

std::pair<double, PatchRecord> estimate_impact(const LinearModel& model, const LabeledExample& ex,
                                               const PaConfig& cfg, const SummarySet& summaries) {
    auto [candidate, rec] = pa_update(model, ex, cfg);
    double impact = 0.0;
    if (rec.verdict == Verdict::Applied)
        impact = estimate_auc(candidate.w, summaries) - estimate_auc(model.w, summaries);
    rec.estimated_auc_impact = impact;
    return {impact, rec};
}

Verdict gate_patch(double impact, double max_drop) {
    if (!(max_drop >= 0.0)) throw InvalidInput("gate_patch: max_drop must be >= 0");
    return impact < -max_drop ? Verdict::Audit : Verdict::Applied;
}

} // namespace pafp
