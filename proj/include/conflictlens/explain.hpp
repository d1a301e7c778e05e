#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "conflictlens/event_model.hpp"
#include "conflictlens/logit.hpp"
#include "conflictlens/trees.hpp"

namespace conflictlens {

// Per-instance, per-feature Shapley attributions on the margin scale
// (log-odds for logistic and boosted models, leaf probability for trees and
// forests): base_value + sum(phi) equals the margin output.
struct AttributionSet {
    double base_value = 0.0;
    std::vector<ColumnInfo> features;
    std::vector<std::vector<double>> phi;         // [instance][feature]
    std::vector<std::vector<double>> raw_values;  // [instance][feature]
};

using MarginFn = std::function<double(std::span<const double>)>;
using ValueFn = std::function<double(std::uint32_t subset_mask)>;

// Brute-force Shapley over an arbitrary coalition value function
// (2^n_features evaluations); the verification oracle for the other methods.
std::vector<double> shapley_from_value_fn(const ValueFn& v, std::size_t n_features);

// Exact interventional Shapley: v(S) is the mean margin over background rows
// with the features in S replaced by x's values. Limited to 15 features.
AttributionSet shap_exact(const MarginFn& margin, std::span<const double> x,
                          const std::vector<std::vector<double>>& background,
                          const std::vector<ColumnInfo>& features);

// Cover-weighted conditional expectation of a tree: features inside the
// subset follow x, the rest average the children by training cover. This is
// the value function the path-dependent recursion attributes.
double tree_expected_value(const Tree& tree, std::span<const double> x,
                           const std::vector<bool>& in_subset);

// Path-dependent tree Shapley (polynomial-time recursion over paths).
std::vector<double> shap_tree(const Tree& tree, std::span<const double> x);
double tree_base_value(const Tree& tree);

// Ensemble variants: sum over trees (boosting, scaled by the learning rate
// and shifted by the base score) or mean over trees (forest).
AttributionSet shap_tree_batch(const Tree& tree, const EncodedMatrix& data);
AttributionSet shap_tree_batch(const Forest& forest, const EncodedMatrix& data);
AttributionSet shap_tree_batch(const BoostedEnsemble& ensemble, const EncodedMatrix& data);

// Closed-form linear Shapley on the log-odds scale:
// phi_j = beta_j * (x_j - mean_j).
AttributionSet shap_linear(const FittedLogit& model, const EncodedMatrix& data,
                           const std::vector<double>& feature_means);

struct BeeswarmRow {
    std::string feature;
    std::size_t instance = 0;
    double shap_value = 0.0;
    double normalized_value = 0.5;  // 0 = feature minimum, 1 = maximum
};

// Rows grouped by feature, features ordered by descending mean |phi| (ties
// by name). Constant features normalize to 0.5.
std::vector<BeeswarmRow> beeswarm_export(const AttributionSet& attrs);

void write_beeswarm_csv(const std::vector<BeeswarmRow>& rows, const std::string& path);

}  // namespace conflictlens
