#pragma once

#include "pafp/model.hpp"

#include <cstdint>
#include <cstddef>

namespace pafp {

// Synthetic corpus geometry. Along the unit diagonal direction g there are a
// benign blob at -blob_sep and a malicious blob at +blob_sep; a boundary slab
// mixes both labels with malicious probability rising linearly across it.
//
// Two structured populations share a pair of fixed directions p1, p2
// orthogonal to g:
//   - a small malicious "packed" population (train and test) at
//     pack_u*g + pack_perp_norm*p; fitting it forces the trained weights to
//     take positive components along p1 and p2;
//   - a benign "niche" population in two tight clusters at niche_u*g +
//     niche_perp_norm*p, present only where niche_*_frac says so. By default
//     it appears in the test split but never in training, so the model has
//     no way to learn it and - because of the packed population - scores it
//     well above the alert threshold.
// The hard FPs are drawn from those same niche clusters, pushed hard_extra_u
// deeper along g. Defaults are tuned so that:
//   - a 5-epoch margin-1 model calibrated to 0.1% FPR on training benign
//     flags every hard FP;
//   - one exact correction collapses a whole niche cluster (the step is
//     dominated by the p direction, so blob scores barely move);
//   - lr=0.01 subgradient steps need ~20 corrections per cluster.
struct SyntheticSpec {
    std::size_t dim = 32;
    std::size_t n_train = 20000;
    std::size_t n_test = 5000;
    std::size_t n_hard = 58;
    double benign_frac = 0.592;
    std::uint64_t seed = 1;

    double blob_sep = 0.85;
    double blob_sigma = 0.2;
    double slab_frac = 0.08;
    double slab_halfwidth = 0.6;
    double slab_g_jitter = 0.06;
    double slab_perp_sigma = 0.12;
    double niche_train_frac = 0.0;
    double niche_test_frac = 0.008;
    double niche_u1 = 0.48;
    double niche_u2 = 0.52;
    double niche_perp_norm = 1.8;
    double niche_sigma = 0.03;
    double pack_frac = 0.01;
    double pack_u = 0.45;
    double pack_perp_norm = 1.2;
    double pack_sigma = 0.05;
    double hard_extra_u = 0.13;
    double hard_split = 0.6; // share of hard FPs in cluster 1
};

struct SyntheticData {
    Dataset train;
    Dataset test;
    Dataset hard_fps; // labels all -1
    FeatureVector bayes_weights; // the generator's true separating direction
};

// Deterministic per spec+seed.
SyntheticData generate(const SyntheticSpec& spec);

} // namespace pafp
