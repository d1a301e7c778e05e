#pragma once

#include <cstddef>
#include <vector>

namespace conflictlens {

// Minimal dense symmetric-positive-definite helpers for the small systems
// the library solves (Newton steps over a few dozen coefficients, GP
// surrogates over at most a few hundred observations).

// In-place Cholesky L of a row-major SPD matrix (lower triangle); returns
// false when a pivot is not positive.
bool cholesky(std::vector<double>& a, std::size_t n);

// Solves L L^T x = b given the factor from cholesky().
std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t n,
                                   std::vector<double> b);

// Inverse of the SPD matrix whose factor is l.
std::vector<double> cholesky_inverse(const std::vector<double>& l, std::size_t n);

// Sum of log of diagonal entries of the factor (0.5 * log det of the SPD matrix).
double cholesky_log_det_half(const std::vector<double>& l, std::size_t n);

}  // namespace conflictlens
