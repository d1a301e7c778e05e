// Throughput comparison of the scalar and AVX2 kernel variants.
// Usage: bench_kernels [n] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "conflictlens/kernels.hpp"
#include "conflictlens/rng.hpp"

namespace k = conflictlens::kernels;

namespace {

volatile double sink;

double time_ns_per_element(const std::function<void()>& fn, std::size_t n, int repeats) {
    fn();  // warm up
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) fn();
    const auto elapsed =
        std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - start)
            .count();
    return elapsed / (static_cast<double>(repeats) * static_cast<double>(n));
}

void bench(const char* name, const k::Ops& ops, std::size_t n, int repeats,
           std::vector<double>& a, std::vector<double>& b, std::vector<double>& out) {
    const double dot = time_ns_per_element(
        [&] { sink = ops.dot(a.data(), b.data(), n); }, n, repeats);
    const double sum =
        time_ns_per_element([&] { sink = ops.sum(a.data(), n); }, n, repeats);
    const double sqd = time_ns_per_element(
        [&] { sink = ops.sq_dist(a.data(), b.data(), n); }, n, repeats);
    const double sig = time_ns_per_element(
        [&] { ops.sigmoid(a.data(), out.data(), n); }, n, repeats);
    const double axpy = time_ns_per_element(
        [&] { ops.axpy(1.0000001, a.data(), out.data(), n); }, n, repeats);
    std::printf("%-8s dot %6.3f  sum %6.3f  sq_dist %6.3f  sigmoid %6.3f  axpy %6.3f\n",
                name, dot, sum, sqd, sig, axpy);
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::stoul(argv[1]) : 1 << 16;
    const int repeats = argc > 2 ? std::stoi(argv[2]) : 2000;

    conflictlens::Rng rng(1);
    std::vector<double> a(n), b(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.uniform(-4.0, 4.0);
        b[i] = rng.uniform(-4.0, 4.0);
    }

    std::printf("n = %zu, %d repeats, ns per element\n", n, repeats);
    bench("scalar", k::scalar_ops(), n, repeats, a, b, out);
    if (const k::Ops* avx2 = k::avx2_ops()) {
        bench("avx2", *avx2, n, repeats, a, b, out);
    } else {
        std::printf("avx2     unavailable on this host\n");
    }
    std::printf("active: %s\n", k::active_ops().name);
    return 0;
}
