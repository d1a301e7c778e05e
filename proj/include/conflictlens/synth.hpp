#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "conflictlens/event_model.hpp"

namespace conflictlens {

// Two-component normal mixture truncated to (0, 3).
struct PetMixture {
    std::array<double, 2> weights{0.45, 0.55};
    std::array<double, 2> means{1.0, 2.3};
    std::array<double, 2> sds{0.4, 0.4};
};

struct GammaParams {
    double shape = 4.0;
    double scale = 1.0;
};

// Product term added to the ground-truth linear score (column names refer to
// the baseline-dropped encoding).
struct InteractionTerm {
    std::string a;
    std::string b;
    double coefficient = 0.0;
};

// Calibration targets for the synthetic generator: categorical marginals,
// PET mixture, per-speed gamma distributions, and a ground-truth logistic
// model over the baseline-dropped encoding whose intercept is adjusted to
// hit `base_rate`.
struct GeneratorConfig {
    std::array<std::vector<double>, kNumCatVars> categorical_marginals;
    PetMixture pet_mixture;
    std::array<GammaParams, 4> speed_params;  // veh_median, veh_conflict, vru_median, vru_conflict
    std::map<std::string, double> ground_truth;  // column name -> coefficient
    std::vector<InteractionTerm> interactions;
    double base_rate = 89.0 / 1470.0;
    std::uint64_t seed = 0;

    static GeneratorConfig defaults();

    // Throws InvalidConfig when marginals/mixture/gammas are malformed.
    void validate() const;

    std::string to_json() const;
    static GeneratorConfig from_json(const std::string& text);
};

// Deterministic for a fixed config.seed. Labels are Bernoulli draws from the
// ground-truth logistic model with the intercept recalibrated to base_rate.
std::vector<CriticalEvent> generate_dataset(const GeneratorConfig& config, std::size_t n);

// Intercept b0 such that the Monte-Carlo mean of the ground-truth
// probabilities over `n_samples` covariate draws is within +-0.002 of
// base_rate; bisection over [-15, 15], NoRoot when the bracket fails.
double calibrate_intercept(const GeneratorConfig& config, double base_rate, std::uint64_t seed,
                           std::size_t n_samples = 50000);

}  // namespace conflictlens
