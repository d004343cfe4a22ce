#include "pafp/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace pafp::kern {

double dot_ref(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_ref(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sqdist_ref(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

#if defined(__x86_64__) || defined(_M_X64)
#define PAFP_HAVE_AVX2_TU 1
// Implemented in kernels_avx2.cpp, compiled for avx2+fma via target attributes.
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
double sqdist_avx2(const double* a, const double* b, std::size_t n);
#endif

#if defined(__aarch64__)

static double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

static void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

static double sqdist_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

#endif // __aarch64__

namespace {

struct Vtable {
    Backend backend;
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*sqdist)(const double*, const double*, std::size_t);
};

constexpr Vtable kScalar{Backend::Scalar, dot_ref, axpy_ref, sqdist_ref};

bool supported(Backend b) {
    switch (b) {
    case Backend::Scalar:
        return true;
    case Backend::Avx2:
#if defined(PAFP_HAVE_AVX2_TU)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
        return true;
#else
        return false;
#endif
    }
    return false;
}

Vtable make(Backend b) {
    switch (b) {
#if defined(PAFP_HAVE_AVX2_TU)
    case Backend::Avx2:
        return {Backend::Avx2, dot_avx2, axpy_avx2, sqdist_avx2};
#endif
#if defined(__aarch64__)
    case Backend::Neon:
        return {Backend::Neon, dot_neon, axpy_neon, sqdist_neon};
#endif
    default:
        return kScalar;
    }
}

Backend pick_default() {
    if (const char* env = std::getenv("PAFP_KERNEL")) {
        const std::string v = env;
        if (v == "scalar") return Backend::Scalar;
        if (v == "avx2" && supported(Backend::Avx2)) return Backend::Avx2;
        if (v == "neon" && supported(Backend::Neon)) return Backend::Neon;
        // "auto" or anything unusable falls through to detection.
    }
    if (supported(Backend::Avx2)) return Backend::Avx2;
    if (supported(Backend::Neon)) return Backend::Neon;
    return Backend::Scalar;
}

Vtable g_vt = make(pick_default());

} // namespace

Backend active() { return g_vt.backend; }

void force(Backend b) {
    if (!supported(b))
        throw std::invalid_argument(std::string("kernel backend unsupported on this cpu: ") + name(b));
    g_vt = make(b);
}

const char* name(Backend b) {
    switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
    }
    return "?";
}

double dot(const double* a, const double* b, std::size_t n) { return g_vt.dot(a, b, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) { g_vt.axpy(alpha, x, y, n); }

double sqdist(const double* a, const double* b, std::size_t n) { return g_vt.sqdist(a, b, n); }

} // namespace pafp::kern
