#pragma once

#include <cstddef>
#include <string>

// Dense double-precision kernels used by the scorer, the online updates,
// the summary builder and the random-feature transform.
//
// Scalar reference implementations are always compiled and define the
// semantics. Vectorized variants (AVX2/FMA on x86-64, NEON on aarch64) are
// selected once at startup when the CPU supports them; they may reassociate
// the accumulation, so equality with the reference is only up to rounding.
// PAFP_KERNEL=scalar|avx2|neon|auto overrides the choice, as does force().

namespace pafp::kern {

enum class Backend { Scalar, Avx2, Neon };

// Active backend; resolved on first use.
Backend active();

// Force a backend. Throws std::invalid_argument if unsupported on this CPU.
void force(Backend b);

const char* name(Backend b);

// dot(a, b) = sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

// sqdist(a, b) = sum_i (a[i]-b[i])^2
double sqdist(const double* a, const double* b, std::size_t n);

// Reference implementations, kept callable for equivalence tests.
double dot_ref(const double* a, const double* b, std::size_t n);
void axpy_ref(double alpha, const double* x, double* y, std::size_t n);
double sqdist_ref(const double* a, const double* b, std::size_t n);

} // namespace pafp::kern
