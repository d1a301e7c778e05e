// AVX2/FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma on x86-64 only; availability is still checked at runtime
// before the table is handed out.

#include "conflictlens/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace conflictlens::kernels {
namespace avx2 {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

// exp(x) for x in [-709, 0], Cephes rational approximation. Accuracy is
// within ~1 ulp of libm, which the equivalence tests bound explicitly.
inline __m256d exp_nonpos(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d half = _mm256_set1_pd(0.5);

    x = _mm256_max_pd(x, _mm256_set1_pd(-708.396418532264106224));

    // n = floor(x * log2e + 0.5)
    __m256d n = _mm256_floor_pd(_mm256_fmadd_pd(x, log2e, half));
    // r = x - n * ln2, split into hi/lo parts for accuracy
    __m256d r = _mm256_fnmadd_pd(n, c1, x);
    r = _mm256_fnmadd_pd(n, c2, r);
    const __m256d r2 = _mm256_mul_pd(r, r);

    __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
    p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(3.02994407707441961300e-2));
    p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(9.99999999999999999910e-1));
    p = _mm256_mul_pd(p, r);

    __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
    q = _mm256_fmadd_pd(q, r2, _mm256_set1_pd(2.52448340349684104192e-3));
    q = _mm256_fmadd_pd(q, r2, _mm256_set1_pd(2.27265548208155028766e-1));
    q = _mm256_fmadd_pd(q, r2, _mm256_set1_pd(2.00000000000000000005e0));

    __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), one);

    // e *= 2^n via exponent-bit construction; n in [-1023, 1] here.
    const __m256i bias = _mm256_set1_epi64x(1023);
    __m256i ni = _mm256_add_epi64(_mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n)), bias);
    const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(ni, 52));
    return _mm256_mul_pd(e, scale);
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    // unfused mul+add keeps results bit-identical to the scalar reference
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double sq_dist(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void sigmoid(const double* z, double* p, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vz = _mm256_loadu_pd(z + i);
        // e = exp(-|z|);  z >= 0: 1/(1+e);  z < 0: e/(1+e)
        const __m256d neg_abs = _mm256_min_pd(vz, _mm256_sub_pd(zero, vz));
        const __m256d e = exp_nonpos(neg_abs);
        const __m256d denom = _mm256_add_pd(one, e);
        const __m256d pos = _mm256_div_pd(one, denom);
        const __m256d neg = _mm256_div_pd(e, denom);
        const __m256d nonneg = _mm256_cmp_pd(vz, zero, _CMP_GE_OQ);
        _mm256_storeu_pd(p + i, _mm256_blendv_pd(neg, pos, nonneg));
    }
    for (; i < n; ++i) p[i] = sigmoid1(z[i]);
}

void logloss_grad_hess(const double* p, const double* y, const double* w,
                       double* g, double* h, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vp = _mm256_loadu_pd(p + i);
        const __m256d vw = _mm256_loadu_pd(w + i);
        // same operation order as the scalar reference, so results are
        // bit-identical
        _mm256_storeu_pd(g + i, _mm256_mul_pd(vw, _mm256_sub_pd(vp, _mm256_loadu_pd(y + i))));
        _mm256_storeu_pd(h + i, _mm256_mul_pd(_mm256_mul_pd(vw, vp), _mm256_sub_pd(one, vp)));
    }
    for (; i < n; ++i) {
        g[i] = w[i] * (p[i] - y[i]);
        h[i] = w[i] * p[i] * (1.0 - p[i]);
    }
}

}  // namespace avx2

const Ops* avx2_ops() {
    static const Ops ops = {
        "avx2",
        avx2::dot,
        avx2::axpy,
        avx2::sum,
        avx2::sq_dist,
        avx2::sigmoid,
        avx2::logloss_grad_hess,
    };
    static const bool supported =
        __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &ops : nullptr;
}

}  // namespace conflictlens::kernels

#else

namespace conflictlens::kernels {

const Ops* avx2_ops() { return nullptr; }

}  // namespace conflictlens::kernels

#endif
