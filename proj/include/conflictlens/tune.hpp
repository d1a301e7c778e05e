#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "conflictlens/event_model.hpp"
#include "conflictlens/models.hpp"

namespace conflictlens {

enum class ParamType { integer, real };
enum class ParamScale { linear, log };

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::real;
    double lower = 0.0;
    double upper = 1.0;
    ParamScale scale = ParamScale::linear;
};

struct SearchSpace {
    std::vector<ParamSpec> params;

    void validate() const;  // finite bounds, lower < upper
    static SearchSpace defaults_for(ModelFamily family);
};

using ParamPoint = std::map<std::string, double>;

struct Trial {
    ParamPoint params;
    double objective = 0.0;
    std::vector<double> fold_scores;
};

struct TuneResult {
    ParamPoint best_params;
    double best_objective = 0.0;
    std::vector<Trial> history;
};

enum class BalanceMode { none, weights, smote };

BalanceMode balance_from_name(const std::string& name);
const char* balance_name(BalanceMode mode);

// Applies the balancing mode to a full-encoding training matrix (weights or
// SMOTE-NC rows; `none` is the identity).
EncodedMatrix apply_balance(const EncodedMatrix& train, BalanceMode mode,
                            std::size_t smote_k, double smote_ratio, std::uint64_t seed);

// Fits on a (balanced) training matrix and returns test scores. The training
// matrix is the full one-hot encoding; implementations needing the
// baseline-dropped view project it themselves.
using FitScoreFn = std::function<std::vector<double>(const EncodedMatrix& train,
                                                     const EncodedMatrix& test)>;

// Mean minority-class average precision over stratified k folds, with
// balancing applied to each fold's training portion only.
double cv_objective(const EncodedMatrix& data, const FitScoreFn& fit_score, std::size_t k,
                    std::uint64_t seed, BalanceMode balance = BalanceMode::none,
                    std::size_t smote_k = 5, double smote_ratio = 1.0);

// FitScoreFn for a model family at a hyperparameter point.
FitScoreFn make_fit_score(ModelFamily family, const ParamPoint& params, std::uint64_t seed);

// Gaussian-process Bayesian optimization (Matern-5/2 surrogate, expected
// improvement over 1024 seeded candidates, scrambled-Halton initial design).
// Maximizes `objective`; history holds exactly `budget` trials.
TuneResult bayes_optimize(const SearchSpace& space,
                          const std::function<double(const ParamPoint&)>& objective,
                          std::size_t n_init, std::size_t budget, std::uint64_t seed);

}  // namespace conflictlens
