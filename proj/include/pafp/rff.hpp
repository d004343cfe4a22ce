#pragma once

#include "pafp/model.hpp"

#include <cstdint>
#include <vector>

namespace pafp {

// Random Fourier map z(x), dim d -> D, approximating the RBF kernel
// K(x,x') = exp(-gamma*||x-x'||^2). Frequencies are N(0, 2*gamma) because
// that kernel is exp(-d^2/(2*sigma^2)) with sigma^2 = 1/(2*gamma).
struct RffMap {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> projection; // row-major, out_dim x in_dim
    std::vector<double> phases;     // length out_dim, in [0, 2*pi)
};

// Deterministic per (dim, out_dim, gamma, seed).
RffMap build_rff(std::size_t dim, std::size_t out_dim, double gamma, std::uint64_t seed);

// z_j = sqrt(2/D) * cos(projection_j . x + phase_j)
FeatureVector transform(const RffMap& map, const FeatureVector& x);

// The gamma grid used for kernel model selection.
std::vector<double> gamma_grid();

} // namespace pafp
