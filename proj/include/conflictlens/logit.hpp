#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conflictlens/event_model.hpp"

namespace conflictlens {

struct LogitTerm {
    std::string name;  // "intercept" or a design-matrix column name
    double coefficient = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    double odds_ratio = 1.0;
};

// Maximum-likelihood logistic fit with Wald inference. coefficients[0] is
// the intercept; covariance is the inverse observed information (unpenalized).
struct FittedLogit {
    std::vector<double> coefficients;
    std::vector<double> covariance;  // (p+1) x (p+1), row-major
    std::vector<LogitTerm> terms;
    double log_likelihood = 0.0;
    double null_log_likelihood = 0.0;
    double mcfadden_r2 = 0.0;
    bool converged = false;
    int iterations = 0;
    double final_gradient_norm = 0.0;
    std::vector<ColumnInfo> columns;  // design matrix metadata (no intercept)

    // 1 / (1 + exp(-b' [1, x])); x excludes the intercept column.
    double predict_proba(std::span<const double> x) const;
    std::vector<double> predict_proba(const EncodedMatrix& m) const;
};

// Damped-Newton maximization of the (optionally row-weighted) log-likelihood
// with an optional ridge penalty on the slopes. Converges when the gradient
// max-norm drops below 1e-8, capped at 100 iterations. Data must be a
// baseline-dropped encoding with labels on every row.
FittedLogit fit_logistic(const EncodedMatrix& data,
                         const std::optional<std::vector<double>>& weights = std::nullopt,
                         double ridge = 1e-8);

// Terms with p_value < alpha, in model order.
std::vector<LogitTerm> significant_terms(const FittedLogit& model, double alpha);

// Two-sided normal tail probability used for the Wald tests.
double wald_p_value(double z);

}  // namespace conflictlens
