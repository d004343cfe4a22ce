#pragma once

#include "pafp/model.hpp"
#include "pafp/pa.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace pafp {

// Privacy-preserving stand-in for one cluster of training data: only the
// center, the member count and the malicious fraction ever leave.
struct ClusterSummary {
    FeatureVector center;
    std::size_t size = 0;
    double malicious_fraction = 0.0;
};

struct SummarySet {
    std::size_t dim = 0;
    std::uint64_t seed = 0;
    std::vector<ClusterSummary> clusters;
};

// k-means++ seeding then Lloyd iterations (squared Euclidean) until the
// assignment stops changing or max_iters passes; empty clusters are reseeded
// to the point farthest from their stale center. Deterministic per seed.
SummarySet build_summaries(const Dataset& data, std::size_t k, std::uint64_t seed,
                           int max_iters = 50);

// Cluster-weighted accuracy of sign(w.c) at threshold 0: clusters scored
// malicious contribute size*frac, clusters scored benign size*(1-frac),
// normalized by total mass. In [0,1].
double estimate_auc(const FeatureVector& w, const SummarySet& summaries);

// Candidate weights via pa_update semantics (passive patch => candidate
// equals w and impact is exactly 0), then
//   impact = estimate_auc(candidate) - estimate_auc(w).
// Callers keep `model` fixed at the original global model. The returned
// record carries the impact and the would-be update's tau/margins.
std::pair<double, PatchRecord> estimate_impact(const LinearModel& model, const LabeledExample& ex,
                                               const PaConfig& cfg, const SummarySet& summaries);

// Audit iff impact < -max_drop (boundary applies).
Verdict gate_patch(double impact, double max_drop);

} // namespace pafp
