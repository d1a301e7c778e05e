#pragma once

#include <cstdint>
#include <utility>

#include "conflictlens/event_model.hpp"

namespace conflictlens {

struct SmoteParams {
    std::size_t k_neighbors = 5;
    double target_ratio = 1.0;  // desired minority/majority count ratio
    std::uint64_t seed = 0;
};

// Inverse-frequency class weights normalized so the mean weight is 1:
// w_c = N / (2 * n_c). Returns (w0, w1); throws SingleClass.
std::pair<double, double> class_weights(const std::vector<std::int8_t>& labels);

// SMOTE-NC over the full (non-baseline-dropped) encoding: appends synthetic
// minority rows until minority/majority reaches target_ratio. Continuous
// values interpolate between a seed row and one of its k nearest minority
// neighbours; each nominal variable takes the neighbours' mode (ties keep
// the seed row's level). Appended rows are flagged in `synthetic`.
// `parents_out`, when given, receives the (seed row, neighbour row) pair of
// each synthetic row, in input row indices.
EncodedMatrix smote_nc(const EncodedMatrix& data, const SmoteParams& params,
                       std::vector<std::pair<std::size_t, std::size_t>>* parents_out = nullptr);

}  // namespace conflictlens
