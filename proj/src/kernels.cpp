#include "conflictlens/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace conflictlens::kernels {

double sigmoid1(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sq_dist(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void sigmoid(const double* z, double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = sigmoid1(z[i]);
}

void logloss_grad_hess(const double* p, const double* y, const double* w,
                       double* g, double* h, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = w[i] * (p[i] - y[i]);
        h[i] = w[i] * p[i] * (1.0 - p[i]);
    }
}

}  // namespace scalar

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar",
        scalar::dot,
        scalar::axpy,
        scalar::sum,
        scalar::sq_dist,
        scalar::sigmoid,
        scalar::logloss_grad_hess,
    };
    return ops;
}

namespace {

const Ops& select_ops() {
    const char* force = std::getenv("CONFLICTLENS_SIMD");
    if (force != nullptr) {
        if (std::strcmp(force, "scalar") == 0) return scalar_ops();
        if (std::strcmp(force, "avx2") == 0 && avx2_ops() != nullptr) return *avx2_ops();
    }
    if (const Ops* avx2 = avx2_ops()) return *avx2;
    return scalar_ops();
}

}  // namespace

const Ops& active_ops() {
    static const Ops& selected = select_ops();
    return selected;
}

}  // namespace conflictlens::kernels
