#include "conflictlens/logit.hpp"

#include <algorithm>
#include <cmath>

#include "conflictlens/errors.hpp"
#include "conflictlens/kernels.hpp"
#include "conflictlens/linalg.hpp"

namespace conflictlens {

double wald_p_value(double z) {
    return std::erfc(std::abs(z) / 1.4142135623730950488) ;
}

double FittedLogit::predict_proba(std::span<const double> x) const {
    if (x.size() + 1 != coefficients.size()) {
        throw DimensionMismatch("row has " + std::to_string(x.size()) + " features, model has " +
                                std::to_string(coefficients.size() - 1));
    }
    const double z =
        coefficients[0] + kernels::dot(x, {coefficients.data() + 1, coefficients.size() - 1});
    return kernels::sigmoid1(z);
}

std::vector<double> FittedLogit::predict_proba(const EncodedMatrix& m) const {
    std::vector<double> out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) out[i] = predict_proba({m.row(i), m.cols()});
    return out;
}

namespace {

// Weighted log-likelihood in a form that is stable for large |z|:
// w * (y*z - log(1+exp(z))).
double log_likelihood(const std::vector<double>& z, const std::vector<double>& y,
                      const std::vector<double>& w) {
    double ll = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double zi = z[i];
        const double softplus = zi > 0.0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi));
        ll += w[i] * (y[i] * zi - softplus);
    }
    return ll;
}

}  // namespace

FittedLogit fit_logistic(const EncodedMatrix& data,
                         const std::optional<std::vector<double>>& weights, double ridge) {
    const std::size_t n = data.rows;
    const std::size_t p = data.cols() + 1;  // with intercept
    if (n == 0) throw EmptyDataset("fit_logistic requires data");
    if (n <= data.cols()) {
        throw SingularInformation("need more rows than columns to fit");
    }
    const std::vector<double> y = data.labels_as_double();
    std::vector<double> w = weights.value_or(data.row_weights);
    if (w.size() != n) throw DimensionMismatch("weight vector length mismatch");

    double n_pos_w = 0.0, w_total = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        w_total += w[i];
        n_pos_w += w[i] * y[i];
        n_pos += y[i] > 0.5 ? 1 : 0;
    }
    if (n_pos == 0 || n_pos == n) throw SingleClass("both classes must be present");

    // Design matrix with a leading intercept column.
    std::vector<double> x(n * p);
    for (std::size_t i = 0; i < n; ++i) {
        x[i * p] = 1.0;
        const double* src = data.row(i);
        std::copy(src, src + data.cols(), x.data() + i * p + 1);
    }

    std::vector<double> beta(p, 0.0);
    std::vector<double> z(n, 0.0), prob(n), grad(p), hess(p * p);
    std::vector<double> g_i(n), h_i(n);

    auto compute_z = [&](const std::vector<double>& b) {
        for (std::size_t i = 0; i < n; ++i) z[i] = kernels::dot({&x[i * p], p}, {b.data(), p});
    };

    auto penalized_ll = [&](const std::vector<double>& b) {
        compute_z(b);
        double ll = log_likelihood(z, y, w);
        if (ridge > 0.0) {
            double s = 0.0;
            for (std::size_t j = 1; j < p; ++j) s += b[j] * b[j];
            ll -= 0.5 * ridge * s;
        }
        return ll;
    };

    double ll = penalized_ll(beta);
    bool converged = false;
    int iter = 0;
    double grad_norm = 0.0;

    for (iter = 0; iter < 100; ++iter) {
        compute_z(beta);
        kernels::sigmoid(z, prob);
        kernels::logloss_grad_hess(prob, y, w, g_i, h_i);

        // grad = X' w (y - p) - ridge * beta_slopes
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            kernels::axpy(-g_i[i], {&x[i * p], p}, grad);
        }
        if (ridge > 0.0) {
            for (std::size_t j = 1; j < p; ++j) grad[j] -= ridge * beta[j];
        }
        grad_norm = 0.0;
        for (double g : grad) grad_norm = std::max(grad_norm, std::abs(g));
        if (grad_norm < 1e-8) {
            converged = true;
            break;
        }

        // hess = X' W X + ridge on slopes (W = diag(w * p * (1-p)))
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = &x[i * p];
            for (std::size_t j = 0; j < p; ++j) {
                const double s = h_i[i] * xi[j];
                if (s != 0.0) kernels::axpy(s, {xi + j, p - j}, {&hess[j * p + j], p - j});
            }
        }
        for (std::size_t j = 0; j < p; ++j) {
            for (std::size_t k = 0; k < j; ++k) hess[j * p + k] = hess[k * p + j];
        }
        if (ridge > 0.0) {
            for (std::size_t j = 1; j < p; ++j) hess[j * p + j] += ridge;
        }

        std::vector<double> factor = hess;
        if (!cholesky(factor, p)) {
            // stabilize a flat direction and retry once
            for (std::size_t j = 0; j < p; ++j) factor[j * p + j] = hess[j * p + j] + 1e-10;
            std::vector<double> retry = hess;
            for (std::size_t j = 0; j < p; ++j) retry[j * p + j] += 1e-10;
            factor = retry;
            if (!cholesky(factor, p)) {
                throw SingularInformation("observed information is singular");
            }
        }
        const std::vector<double> step = cholesky_solve(factor, p, grad);

        // Damping: halve until the penalized log-likelihood does not decrease.
        double scale = 1.0;
        std::vector<double> candidate(p);
        double candidate_ll = -1e300;
        for (int half = 0; half < 40; ++half) {
            for (std::size_t j = 0; j < p; ++j) candidate[j] = beta[j] + scale * step[j];
            candidate_ll = penalized_ll(candidate);
            if (candidate_ll >= ll - 1e-12) break;
            scale *= 0.5;
        }
        if (candidate_ll < ll - 1e-9) break;  // no ascent direction left
        beta = candidate;
        ll = candidate_ll;

        if (ridge <= 0.0) {
            double norm = 0.0;
            for (double b : beta) norm += b * b;
            if (std::sqrt(norm) > 30.0 && grad_norm > 1e-6) {
                throw Separation("coefficients diverging; data may be separable (set ridge > 0)");
            }
        }
    }

    FittedLogit fit;
    fit.coefficients = beta;
    fit.converged = converged;
    fit.iterations = iter;
    fit.final_gradient_norm = grad_norm;
    fit.columns = data.columns;

    // Reported quantities use the unpenalized likelihood and information.
    compute_z(beta);
    fit.log_likelihood = log_likelihood(z, y, w);
    kernels::sigmoid(z, prob);
    kernels::logloss_grad_hess(prob, y, w, g_i, h_i);
    std::fill(hess.begin(), hess.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = &x[i * p];
        for (std::size_t j = 0; j < p; ++j) {
            const double s = h_i[i] * xi[j];
            if (s != 0.0) kernels::axpy(s, {xi + j, p - j}, {&hess[j * p + j], p - j});
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < j; ++k) hess[j * p + k] = hess[k * p + j];
    }
    std::vector<double> factor = hess;
    if (!cholesky(factor, p)) {
        // saturated fits leave near-zero curvature rows; a hair of jitter
        // recovers an invertible factor, genuine rank deficiency does not
        factor = hess;
        double max_diag = 0.0;
        for (std::size_t j = 0; j < p; ++j) max_diag = std::max(max_diag, hess[j * p + j]);
        for (std::size_t j = 0; j < p; ++j) factor[j * p + j] += 1e-10 * (1.0 + max_diag);
        if (!cholesky(factor, p)) throw SingularInformation("information matrix is singular");
    }
    fit.covariance = cholesky_inverse(factor, p);

    // Intercept-only null model: weighted base rate has a closed form.
    const double p_bar = n_pos_w / w_total;
    fit.null_log_likelihood =
        w_total * (p_bar * std::log(p_bar) + (1.0 - p_bar) * std::log(1.0 - p_bar));
    fit.mcfadden_r2 = 1.0 - fit.log_likelihood / fit.null_log_likelihood;

    fit.terms.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        LogitTerm& t = fit.terms[j];
        t.name = j == 0 ? "intercept" : data.columns[j - 1].name();
        t.coefficient = beta[j];
        t.std_error = std::sqrt(std::max(0.0, fit.covariance[j * p + j]));
        t.z = t.std_error > 0.0 ? t.coefficient / t.std_error : 0.0;
        t.p_value = wald_p_value(t.z);
        t.odds_ratio = std::exp(t.coefficient);
    }
    return fit;
}

std::vector<LogitTerm> significant_terms(const FittedLogit& model, double alpha) {
    std::vector<LogitTerm> out;
    for (const auto& t : model.terms) {
        if (t.p_value < alpha) out.push_back(t);
    }
    return out;
}

}  // namespace conflictlens
