#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel arithmetic kernels used by the model fitting loops: dense
// dot/axpy for the reweighted least squares updates, batched sigmoid and
// log-loss gradient/curvature for boosting, squared distances for the
// nearest-neighbour searches. Each kernel has a scalar reference
// implementation and, on x86-64, an AVX2 variant; the active table is
// selected once at startup from CPU capabilities. Set CONFLICTLENS_SIMD to
// "scalar" or "avx2" to force a path.

namespace conflictlens::kernels {

struct Ops {
    const char* name;

    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // sum_i x[i]
    double (*sum)(const double* x, std::size_t n);
    // sum_i (a[i] - b[i])^2
    double (*sq_dist)(const double* a, const double* b, std::size_t n);
    // p[i] = 1 / (1 + exp(-z[i])), numerically stable for large |z|
    void (*sigmoid)(const double* z, double* p, std::size_t n);
    // g[i] = w[i] * (p[i] - y[i]);  h[i] = w[i] * p[i] * (1 - p[i])
    void (*logloss_grad_hess)(const double* p, const double* y, const double* w,
                              double* g, double* h, std::size_t n);
};

// Reference implementation; always available.
const Ops& scalar_ops();

// AVX2 implementation, or nullptr when the binary or CPU lacks support.
const Ops* avx2_ops();

// The table selected at startup (honours CONFLICTLENS_SIMD).
const Ops& active_ops();

// Convenience forwarders through the active table.
inline double dot(std::span<const double> a, std::span<const double> b) {
    return active_ops().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active_ops().axpy(alpha, x.data(), y.data(), x.size());
}
inline double sum(std::span<const double> x) {
    return active_ops().sum(x.data(), x.size());
}
inline double sq_dist(std::span<const double> a, std::span<const double> b) {
    return active_ops().sq_dist(a.data(), b.data(), a.size());
}
inline void sigmoid(std::span<const double> z, std::span<double> p) {
    active_ops().sigmoid(z.data(), p.data(), z.size());
}
inline void logloss_grad_hess(std::span<const double> p, std::span<const double> y,
                              std::span<const double> w, std::span<double> g,
                              std::span<double> h) {
    active_ops().logloss_grad_hess(p.data(), y.data(), w.data(), g.data(), h.data(), p.size());
}

// Scalar sigmoid for single values (synth, thresholds).
double sigmoid1(double z);

}  // namespace conflictlens::kernels
