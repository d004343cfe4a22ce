#include "pafp/rff.hpp"

#include "pafp/errors.hpp"
#include "pafp/kernels.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace pafp {

RffMap build_rff(std::size_t dim, std::size_t out_dim, double gamma, std::uint64_t seed) {
    if (dim < 1 || out_dim < 1)
        throw InvalidInput("build_rff: dim and out_dim must be >= 1");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw InvalidInput("build_rff: gamma must be a positive finite real");

    RffMap map;
    map.in_dim = dim;
    map.out_dim = out_dim;
    map.gamma = gamma;
    map.seed = seed;
    map.projection.resize(out_dim * dim);
    map.phases.resize(out_dim);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> freq(0.0, std::sqrt(2.0 * gamma));
    for (double& v : map.projection) v = freq(rng);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (double& v : map.phases) v = phase(rng);
    return map;
}

FeatureVector transform(const RffMap& map, const FeatureVector& x) {
    if (x.size() != map.in_dim)
        throw InvalidInput("transform: feature length " + std::to_string(x.size()) +
                           " does not match map input dim " + std::to_string(map.in_dim));
    FeatureVector z(map.out_dim);
    const double scale = std::sqrt(2.0 / double(map.out_dim));
    for (std::size_t j = 0; j < map.out_dim; ++j) {
        const double* row = map.projection.data() + j * map.in_dim;
        z[j] = scale * std::cos(kern::dot(row, x.data(), map.in_dim) + map.phases[j]);
    }
    return z;
}

std::vector<double> gamma_grid() { return {0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0}; }

} // namespace pafp
