#include "conflictlens/tune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "conflictlens/errors.hpp"
#include "conflictlens/eval.hpp"
#include "conflictlens/imbalance.hpp"
#include "conflictlens/kernels.hpp"
#include "conflictlens/linalg.hpp"
#include "conflictlens/rng.hpp"

namespace conflictlens {

void SearchSpace::validate() const {
    if (params.empty()) throw InvalidConfig("search space has no parameters");
    for (const auto& p : params) {
        if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower < p.upper)) {
            throw InvalidConfig("bad bounds for parameter '" + p.name + "'");
        }
        if (p.scale == ParamScale::log && !(p.lower > 0.0)) {
            throw InvalidConfig("log-scaled parameter '" + p.name + "' needs positive bounds");
        }
    }
}

SearchSpace SearchSpace::defaults_for(ModelFamily family) {
    SearchSpace s;
    switch (family) {
        case ModelFamily::dt:
            s.params = {{"max_depth", ParamType::integer, 2, 80, ParamScale::linear},
                        {"min_samples_leaf", ParamType::integer, 1, 20, ParamScale::linear},
                        {"min_samples_split", ParamType::integer, 2, 20, ParamScale::linear},
                        {"ccp_alpha", ParamType::real, 1e-5, 1e-2, ParamScale::log}};
            break;
        case ModelFamily::rf:
            s.params = {{"max_depth", ParamType::integer, 2, 80, ParamScale::linear},
                        {"min_samples_leaf", ParamType::integer, 1, 20, ParamScale::linear},
                        {"min_samples_split", ParamType::integer, 2, 20, ParamScale::linear},
                        {"n_estimators", ParamType::integer, 50, 300, ParamScale::linear}};
            break;
        case ModelFamily::gbdt:
            s.params = {{"colsample", ParamType::real, 0.3, 1.0, ParamScale::linear},
                        {"learning_rate", ParamType::real, 0.01, 0.5, ParamScale::log},
                        {"gamma", ParamType::real, 0.0, 2.0, ParamScale::linear},
                        {"max_depth", ParamType::integer, 2, 15, ParamScale::linear},
                        {"min_child_weight", ParamType::real, 1.0, 10.0, ParamScale::linear}};
            break;
        default:
            s.params = {{"ridge", ParamType::real, 1e-8, 10.0, ParamScale::log}};
            break;
    }
    return s;
}

BalanceMode balance_from_name(const std::string& name) {
    if (name == "none") return BalanceMode::none;
    if (name == "weights") return BalanceMode::weights;
    if (name == "smote") return BalanceMode::smote;
    throw InvalidConfig("unknown balance mode '" + name + "'");
}

const char* balance_name(BalanceMode mode) {
    switch (mode) {
        case BalanceMode::none: return "none";
        case BalanceMode::weights: return "weights";
        default: return "smote";
    }
}

EncodedMatrix apply_balance(const EncodedMatrix& train, BalanceMode mode,
                            std::size_t smote_k, double smote_ratio, std::uint64_t seed) {
    switch (mode) {
        case BalanceMode::none:
            return train;
        case BalanceMode::weights: {
            EncodedMatrix out = train;
            const auto [w0, w1] = class_weights(out.labels);
            for (std::size_t i = 0; i < out.rows; ++i) {
                out.row_weights[i] = out.labels[i] == 1 ? w1 : w0;
            }
            return out;
        }
        default: {
            SmoteParams params;
            params.k_neighbors = smote_k;
            params.target_ratio = smote_ratio;
            params.seed = derive_seed(seed, "smote");
            return smote_nc(train, params);
        }
    }
}

// ---------------------------------------------------------------------------
// Cross-validated objective
// ---------------------------------------------------------------------------

double cv_objective(const EncodedMatrix& data, const FitScoreFn& fit_score, std::size_t k,
                    std::uint64_t seed, BalanceMode balance, std::size_t smote_k,
                    double smote_ratio) {
    if (k < 2) throw InvalidConfig("cross-validation needs k >= 2");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < data.rows; ++i) {
        if (data.labels[i] < 0) throw UnlabeledData("cv_objective requires labels");
        (data.labels[i] == 1 ? pos : neg).push_back(i);
    }
    if (pos.size() < k || neg.size() < k) {
        throw TooFewPerClass("need at least k examples of each class");
    }

    Rng rng(derive_seed(seed, "cv"));
    rng.shuffle(pos);
    rng.shuffle(neg);
    std::vector<std::size_t> fold_of(data.rows);
    for (std::size_t i = 0; i < pos.size(); ++i) fold_of[pos[i]] = i % k;
    for (std::size_t i = 0; i < neg.size(); ++i) fold_of[neg[i]] = i % k;

    double total = 0.0;
    for (std::size_t fold = 0; fold < k; ++fold) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < data.rows; ++i) {
            (fold_of[i] == fold ? test_rows : train_rows).push_back(i);
        }
        EncodedMatrix train = subset_rows(data, train_rows);
        const EncodedMatrix test = subset_rows(data, test_rows);
        train = apply_balance(train, balance, smote_k, smote_ratio,
                              derive_seed(seed, "cv-balance", fold));
        const std::vector<double> scores = fit_score(train, test);
        total += pr_curve(test.labels, scores).auc_positive;
    }
    return total / static_cast<double>(k);
}

namespace {

double param_or(const ParamPoint& p, const std::string& name, double fallback) {
    const auto it = p.find(name);
    return it == p.end() ? fallback : it->second;
}

}  // namespace

FitScoreFn make_fit_score(ModelFamily family, const ParamPoint& params, std::uint64_t seed) {
    switch (family) {
        case ModelFamily::logit: {
            const double ridge = param_or(params, "ridge", 1e-8);
            return [ridge](const EncodedMatrix& train, const EncodedMatrix& test) {
                const FittedLogit fit =
                    fit_logistic(project_to_baseline_dropped(train), std::nullopt, ridge);
                return fit.predict_proba(project_to_baseline_dropped(test));
            };
        }
        case ModelFamily::dt: {
            TreeParams tp;
            tp.max_depth = static_cast<int>(param_or(params, "max_depth", 30));
            tp.min_samples_leaf =
                static_cast<std::size_t>(param_or(params, "min_samples_leaf", 1));
            tp.min_samples_split =
                static_cast<std::size_t>(param_or(params, "min_samples_split", 2));
            tp.ccp_alpha = param_or(params, "ccp_alpha", 0.0);
            return [tp](const EncodedMatrix& train, const EncodedMatrix& test) {
                return predict_proba_all(fit_tree(train, tp), test);
            };
        }
        case ModelFamily::rf: {
            ForestParams fp;
            fp.max_depth = static_cast<int>(param_or(params, "max_depth", 30));
            fp.min_samples_leaf =
                static_cast<std::size_t>(param_or(params, "min_samples_leaf", 1));
            fp.min_samples_split =
                static_cast<std::size_t>(param_or(params, "min_samples_split", 2));
            fp.n_estimators = static_cast<std::size_t>(param_or(params, "n_estimators", 100));
            fp.seed = seed;
            return [fp](const EncodedMatrix& train, const EncodedMatrix& test) {
                return predict_proba_all(fit_forest(train, fp), test);
            };
        }
        default: {
            BoostParams bp;
            bp.n_rounds = static_cast<std::size_t>(param_or(params, "n_rounds", 100));
            bp.learning_rate = param_or(params, "learning_rate", 0.1);
            bp.max_depth = static_cast<int>(param_or(params, "max_depth", 6));
            bp.min_child_weight = param_or(params, "min_child_weight", 1.0);
            bp.gamma = param_or(params, "gamma", 0.0);
            bp.colsample = param_or(params, "colsample", 1.0);
            bp.lambda = param_or(params, "lambda", 1.0);
            bp.seed = seed;
            return [bp](const EncodedMatrix& train, const EncodedMatrix& test) {
                return predict_proba_all(fit_gbdt(train, bp), test);
            };
        }
    }
}

// ---------------------------------------------------------------------------
// Gaussian-process Bayesian optimization
// ---------------------------------------------------------------------------

namespace {

// Unit-box coordinate <-> named parameter value.
double from_unit(const ParamSpec& spec, double u) {
    double x;
    if (spec.scale == ParamScale::log) {
        x = std::exp(std::log(spec.lower) + u * (std::log(spec.upper) - std::log(spec.lower)));
    } else {
        x = spec.lower + u * (spec.upper - spec.lower);
    }
    if (spec.type == ParamType::integer) x = std::round(x);
    return std::clamp(x, spec.lower, spec.upper);
}

ParamPoint point_from_unit(const SearchSpace& space, const std::vector<double>& u) {
    ParamPoint p;
    for (std::size_t d = 0; d < space.params.size(); ++d) {
        p[space.params[d].name] = from_unit(space.params[d], u[d]);
    }
    return p;
}

// Scrambled Halton: per-dimension digit permutation under a prime base.
struct ScrambledHalton {
    std::vector<unsigned> bases;
    std::vector<std::vector<unsigned>> perms;  // per dimension, permutation of [0, base)

    ScrambledHalton(std::size_t dims, std::uint64_t seed) {
        static const unsigned primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                          31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
        Rng rng(seed);
        for (std::size_t d = 0; d < dims; ++d) {
            const unsigned b = primes[d % (sizeof(primes) / sizeof(primes[0]))];
            bases.push_back(b);
            std::vector<unsigned> perm(b);
            std::iota(perm.begin(), perm.end(), 0u);
            // keep 0 fixed so the sequence stays in (0, 1)
            for (std::size_t i = b - 1; i > 1; --i) {
                const std::size_t j = 1 + rng.uniform_index(i);
                std::swap(perm[i], perm[j]);
            }
            perms.push_back(std::move(perm));
        }
    }

    std::vector<double> point(std::size_t index) const {
        std::vector<double> u(bases.size());
        for (std::size_t d = 0; d < bases.size(); ++d) {
            const unsigned b = bases[d];
            double f = 1.0, value = 0.0;
            std::size_t i = index + 1;
            while (i > 0) {
                f /= b;
                value += f * perms[d][i % b];
                i /= b;
            }
            u[d] = value;
        }
        return u;
    }
};

double matern52(double r, double length_scale) {
    const double s = 2.2360679774997896964091736687747 * r / length_scale;  // sqrt(5) r / l
    return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

constexpr double kJitter = 1e-6;

struct GpSurrogate {
    std::vector<std::vector<double>> x;  // unit-box inputs
    std::vector<double> alpha;           // K^-1 y_standardized
    std::vector<double> chol;            // cholesky factor of K
    double y_mean = 0.0, y_sd = 1.0;
    double length_scale = 0.5;
    std::size_t n = 0;

    // Fits with the length scale chosen from a 5-point grid by marginal
    // likelihood.
    void fit(const std::vector<std::vector<double>>& inputs, const std::vector<double>& y) {
        x = inputs;
        n = x.size();
        y_mean = kernels::sum(y) / static_cast<double>(n);
        double var = 0.0;
        for (double v : y) var += (v - y_mean) * (v - y_mean);
        y_sd = std::sqrt(var / static_cast<double>(n));
        if (!(y_sd > 1e-12)) y_sd = 1.0;
        std::vector<double> ys(n);
        for (std::size_t i = 0; i < n; ++i) ys[i] = (y[i] - y_mean) / y_sd;

        static const double grid[5] = {0.1, 0.2, 0.5, 1.0, 2.0};
        double best_lml = -std::numeric_limits<double>::infinity();
        for (double ls : grid) {
            std::vector<double> k(n * n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j <= i; ++j) {
                    const double r = std::sqrt(kernels::sq_dist(
                        {x[i].data(), x[i].size()}, {x[j].data(), x[j].size()}));
                    const double v = matern52(r, ls) + (i == j ? kJitter : 0.0);
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            std::vector<double> factor = k;
            if (!cholesky(factor, n)) continue;
            const std::vector<double> a = cholesky_solve(factor, n, ys);
            double lml = -cholesky_log_det_half(factor, n);
            lml -= 0.5 * kernels::dot({ys.data(), n}, {a.data(), n});
            if (lml > best_lml) {
                best_lml = lml;
                length_scale = ls;
                alpha = a;
                chol = factor;
            }
        }
        if (!std::isfinite(best_lml)) {
            throw SingularInformation("GP surrogate factorization failed");
        }
    }

    // Posterior mean and variance at a unit-box point.
    std::pair<double, double> predict(const std::vector<double>& u) const {
        std::vector<double> ks(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = std::sqrt(
                kernels::sq_dist({x[i].data(), x[i].size()}, {u.data(), u.size()}));
            ks[i] = matern52(r, length_scale);
        }
        const double mean = kernels::dot({ks.data(), n}, {alpha.data(), n});
        const std::vector<double> v = cholesky_solve(chol, n, ks);
        double var = 1.0 + kJitter - kernels::dot({ks.data(), n}, {v.data(), n});
        var = std::max(var, 1e-12);
        return {mean, var};
    }
};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730950488); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / 2.5066282746310005024; }

double expected_improvement(double mean, double var, double best) {
    const double sd = std::sqrt(var);
    const double z = (mean - best) / sd;
    return (mean - best) * normal_cdf(z) + sd * normal_pdf(z);
}

bool same_point(const ParamPoint& a, const ParamPoint& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [k, v] : a) {
        const auto it = b.find(k);
        if (it == b.end() || it->second != v) return false;
    }
    return true;
}

}  // namespace

TuneResult bayes_optimize(const SearchSpace& space,
                          const std::function<double(const ParamPoint&)>& objective,
                          std::size_t n_init, std::size_t budget, std::uint64_t seed) {
    space.validate();
    if (n_init < 2 || budget < n_init) {
        throw BudgetTooSmall("budget must be >= n_init >= 2");
    }
    const std::size_t dims = space.params.size();

    TuneResult result;
    std::vector<std::vector<double>> unit_points;
    std::vector<double> objectives;

    auto is_duplicate = [&](const ParamPoint& p) {
        for (const auto& t : result.history) {
            if (same_point(t.params, p)) return true;
        }
        return false;
    };

    auto evaluate = [&](const std::vector<double>& u) {
        const ParamPoint p = point_from_unit(space, u);
        Trial trial;
        trial.params = p;
        trial.objective = objective(p);
        result.history.push_back(trial);
        unit_points.push_back(u);
        objectives.push_back(trial.objective);
    };

    // Initial design: scrambled Halton over the box, skipping rounded
    // duplicates (integer spaces can collide).
    const ScrambledHalton halton(dims, derive_seed(seed, "halton"));
    Rng fill_rng(derive_seed(seed, "init-fill"));
    std::size_t halton_index = 0;
    while (result.history.size() < n_init) {
        std::vector<double> u;
        if (halton_index < 4 * n_init) {
            u = halton.point(halton_index++);
        } else {
            u.resize(dims);
            for (double& v : u) v = fill_rng.uniform01();
        }
        if (is_duplicate(point_from_unit(space, u))) continue;
        evaluate(u);
    }

    constexpr std::size_t kCandidates = 1024;
    Rng cand_rng(derive_seed(seed, "candidates"));
    while (result.history.size() < budget) {
        GpSurrogate gp;
        gp.fit(unit_points, objectives);
        const double best = *std::max_element(objectives.begin(), objectives.end());
        const double best_std = (best - gp.y_mean) / gp.y_sd;

        std::vector<std::pair<double, std::vector<double>>> scored;
        scored.reserve(kCandidates);
        for (std::size_t c = 0; c < kCandidates; ++c) {
            std::vector<double> u(dims);
            for (double& v : u) v = cand_rng.uniform01();
            const auto [mean, var] = gp.predict(u);
            scored.emplace_back(expected_improvement(mean, var, best_std), std::move(u));
        }
        std::sort(scored.begin(), scored.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });

        bool placed = false;
        for (const auto& [ei, u] : scored) {
            if (!is_duplicate(point_from_unit(space, u))) {
                evaluate(u);
                placed = true;
                break;
            }
        }
        while (!placed) {
            std::vector<double> u(dims);
            for (double& v : u) v = cand_rng.uniform01();
            if (!is_duplicate(point_from_unit(space, u))) {
                evaluate(u);
                placed = true;
            }
        }
    }

    std::size_t best_index = 0;
    for (std::size_t i = 1; i < result.history.size(); ++i) {
        if (result.history[i].objective > result.history[best_index].objective) best_index = i;
    }
    result.best_params = result.history[best_index].params;
    result.best_objective = result.history[best_index].objective;
    return result;
}

}  // namespace conflictlens
