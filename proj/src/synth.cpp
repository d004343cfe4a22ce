#include "pafp/synth.hpp"

#include "pafp/errors.hpp"
#include "pafp/kernels.hpp"
#include "pafp/rng.hpp"

#include <cmath>
#include <random>

namespace pafp {

namespace {

// Benign share of the blob population needed so the whole split hits
// benign_frac in expectation: niche is all benign, the slab is half benign,
// the packed population is all malicious.
double blob_benign_share(const SyntheticSpec& s, double niche_frac) {
    const double blob_share = 1.0 - niche_frac - s.slab_frac - s.pack_frac;
    if (!(blob_share > 0.0)) throw InvalidInput("generate: mixture fractions exceed 1");
    const double share = (s.benign_frac - niche_frac - 0.5 * s.slab_frac) / blob_share;
    if (!(share > 0.0 && share < 1.0))
        throw InvalidInput("generate: benign_frac unreachable with these mixture fractions");
    return share;
}

void check(const SyntheticSpec& s) {
    if (s.dim < 2) throw InvalidInput("generate: dim must be >= 2");
    if (s.n_train == 0 || s.n_test == 0) throw InvalidInput("generate: empty split");
    if (s.n_hard < 1) throw InvalidInput("generate: n_hard must be >= 1");
    if (!(s.benign_frac > 0.0 && s.benign_frac < 1.0))
        throw InvalidInput("generate: benign_frac must be in (0,1)");
    if (s.slab_frac < 0.0 || s.pack_frac < 0.0 || s.niche_train_frac < 0.0 ||
        s.niche_test_frac < 0.0)
        throw InvalidInput("generate: mixture fractions must be >= 0");
    if (!(s.blob_sigma > 0.0) || !(s.slab_halfwidth > 0.0) || !(s.niche_sigma > 0.0) ||
        !(s.pack_sigma > 0.0))
        throw InvalidInput("generate: spreads must be positive");
    if (!(s.hard_split >= 0.0 && s.hard_split <= 1.0))
        throw InvalidInput("generate: hard_split must be in [0,1]");
    blob_benign_share(s, s.niche_train_frac);
    blob_benign_share(s, s.niche_test_frac);
}

struct Geometry {
    FeatureVector g;      // unit diagonal direction
    FeatureVector c1, c2; // niche cluster centers
    FeatureVector m1, m2; // packed-malware cluster centers
};

Geometry make_geometry(const SyntheticSpec& s) {
    Geometry geo;
    geo.g.assign(s.dim, 1.0 / std::sqrt(double(s.dim)));

    // Two fixed offsets orthogonal to g (and, when dim % 4 == 0, to each
    // other): alternating-sign patterns whose entries sum to zero.
    FeatureVector p1(s.dim), p2(s.dim);
    const double unit = 1.0 / std::sqrt(double(s.dim));
    for (std::size_t i = 0; i < s.dim; ++i) {
        p1[i] = (i % 2 == 0 ? unit : -unit);
        p2[i] = (i % 4 < 2 ? unit : -unit);
    }
    geo.c1 = geo.c2 = geo.m1 = geo.m2 = FeatureVector(s.dim, 0.0);
    kern::axpy(s.niche_u1, geo.g.data(), geo.c1.data(), s.dim);
    kern::axpy(s.niche_perp_norm, p1.data(), geo.c1.data(), s.dim);
    kern::axpy(s.niche_u2, geo.g.data(), geo.c2.data(), s.dim);
    kern::axpy(s.niche_perp_norm, p2.data(), geo.c2.data(), s.dim);
    kern::axpy(s.pack_u, geo.g.data(), geo.m1.data(), s.dim);
    kern::axpy(s.pack_perp_norm, p1.data(), geo.m1.data(), s.dim);
    kern::axpy(s.pack_u, geo.g.data(), geo.m2.data(), s.dim);
    kern::axpy(s.pack_perp_norm, p2.data(), geo.m2.data(), s.dim);
    return geo;
}

Dataset draw_split(const SyntheticSpec& s, const Geometry& geo, std::size_t n, double niche_frac,
                   std::uint64_t seed) {
    Dataset out;
    out.dim = s.dim;
    out.examples.resize(n);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double blob_benign = blob_benign_share(s, niche_frac);

    for (auto& ex : out.examples) {
        ex.x.assign(s.dim, 0.0);
        const double kind = u01(rng);
        if (kind < niche_frac) {
            const FeatureVector& c = u01(rng) < s.hard_split ? geo.c1 : geo.c2;
            for (std::size_t i = 0; i < s.dim; ++i) ex.x[i] = c[i] + s.niche_sigma * gauss(rng);
            ex.y = -1;
        } else if (kind < niche_frac + s.pack_frac) {
            const FeatureVector& c = u01(rng) < 0.5 ? geo.m1 : geo.m2;
            for (std::size_t i = 0; i < s.dim; ++i) ex.x[i] = c[i] + s.pack_sigma * gauss(rng);
            ex.y = +1;
        } else if (kind < niche_frac + s.pack_frac + s.slab_frac) {
            const double u = (2.0 * u01(rng) - 1.0) * s.slab_halfwidth;
            const double p_mal = (u + s.slab_halfwidth) / (2.0 * s.slab_halfwidth);
            ex.y = u01(rng) < p_mal ? +1 : -1;
            // Slab: offset u along g with a small jitter, spread only in the
            // orthogonal complement.
            double eps_g = 0.0;
            for (std::size_t i = 0; i < s.dim; ++i) {
                ex.x[i] = s.slab_perp_sigma * gauss(rng);
                eps_g += ex.x[i] * geo.g[i];
            }
            const double z = gauss(rng);
            const double along = u + s.slab_g_jitter * z - eps_g;
            kern::axpy(along, geo.g.data(), ex.x.data(), s.dim);
        } else {
            ex.y = u01(rng) < blob_benign ? -1 : +1;
            const double center = ex.y > 0 ? s.blob_sep : -s.blob_sep;
            for (std::size_t i = 0; i < s.dim; ++i)
                ex.x[i] = center * geo.g[i] + s.blob_sigma * gauss(rng);
        }
    }
    return out;
}

Dataset draw_hard(const SyntheticSpec& s, const Geometry& geo, std::uint64_t seed) {
    Dataset out;
    out.dim = s.dim;
    out.examples.resize(s.n_hard);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto n1 = std::size_t(std::round(s.hard_split * double(s.n_hard)));

    for (std::size_t j = 0; j < s.n_hard; ++j) {
        auto& ex = out.examples[j];
        const FeatureVector& c = j < n1 ? geo.c1 : geo.c2;
        ex.x.assign(s.dim, 0.0);
        for (std::size_t i = 0; i < s.dim; ++i) ex.x[i] = c[i] + s.niche_sigma * gauss(rng);
        kern::axpy(s.hard_extra_u, geo.g.data(), ex.x.data(), s.dim);
        ex.y = -1;
    }
    return out;
}

} // namespace

SyntheticData generate(const SyntheticSpec& spec) {
    check(spec);
    const Geometry geo = make_geometry(spec);

    SyntheticData out;
    out.bayes_weights = geo.g;
    out.train = draw_split(spec, geo, spec.n_train, spec.niche_train_frac, mix_seed(spec.seed, 1));
    out.test = draw_split(spec, geo, spec.n_test, spec.niche_test_frac, mix_seed(spec.seed, 2));
    out.hard_fps = draw_hard(spec, geo, mix_seed(spec.seed, 3));
    return out;
}

} // namespace pafp
