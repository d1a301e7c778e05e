#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "conflictlens/event_model.hpp"

namespace conflictlens {

// Node impurity sum_c p_c (1 - p_c) from (optionally weighted) class counts.
// Throws EmptyNode when the total count is zero.
double gini(const std::vector<double>& class_counts);
double gini(double count0, double count1);

struct TreeParams {
    int max_depth = 30;
    std::size_t min_samples_leaf = 1;
    std::size_t min_samples_split = 2;
    double ccp_alpha = 0.0;
};

struct ForestParams {
    int max_depth = 30;
    std::size_t min_samples_leaf = 1;
    std::size_t min_samples_split = 2;
    std::size_t n_estimators = 100;
    std::size_t max_features = 0;  // 0 -> ceil(sqrt(p))
    bool bootstrap = true;         // test hook; production forests resample
    std::uint64_t seed = 0;
};

struct BoostParams {
    std::size_t n_rounds = 100;
    double learning_rate = 0.1;
    int max_depth = 6;
    double min_child_weight = 1.0;
    double gamma = 0.0;     // minimum loss reduction to accept a split
    double colsample = 1.0; // fraction of columns available per round
    double lambda = 1.0;    // L2 on leaf weights
    std::uint64_t seed = 0;
};

// Flat binary tree; children by index, -1 marks a leaf. `value` is the leaf
// probability for classification trees and the leaf weight for boosted
// regression trees. `cover` is the total training row weight through the
// node (needed by the tree Shapley recursion).
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double cover = 0.0;
    double value = 0.0;
    double count0 = 0.0;  // weighted class counts, classification only
    double count1 = 0.0;

    bool is_leaf() const { return left < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;
    std::size_t n_features = 0;

    // Raw leaf value after deterministic routing (x[f] < threshold -> left).
    double predict_value(std::span<const double> x) const;
    std::size_t leaf_count() const;
    int depth() const;
};

struct Forest {
    std::vector<Tree> trees;
    std::size_t n_features = 0;
    std::optional<double> oob_error;  // out-of-bag 0/1 error at threshold 0.5

    double predict_proba(std::span<const double> x) const;
};

struct BoostedEnsemble {
    std::vector<Tree> trees;
    double base_score = 0.0;  // initial log-odds F0
    double learning_rate = 0.1;
    std::size_t n_features = 0;

    double margin(std::span<const double> x) const;  // F(x)
    double predict_proba(std::span<const double> x) const;
};

// CART with Gini splits, midpoint thresholds, deterministic tie-breaking
// (lowest column, then lowest threshold), followed by weakest-link
// cost-complexity pruning at params.ccp_alpha. Respects row weights.
Tree fit_tree(const EncodedMatrix& data, const TreeParams& params);

// Bagged trees on bootstrap resamples with per-split column subsampling.
Forest fit_forest(const EncodedMatrix& data, const ForestParams& params);

// Second-order boosted trees on the log-loss: g = p - y, h = p (1 - p),
// gain = [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)]/2 - gamma, leaf weight
// -G/(H+l).
BoostedEnsemble fit_gbdt(const EncodedMatrix& data, const BoostParams& params);

double predict_proba(const Tree& tree, std::span<const double> x);
double predict_proba(const Forest& forest, std::span<const double> x);
double predict_proba(const BoostedEnsemble& ensemble, std::span<const double> x);

template <typename Model>
std::vector<double> predict_proba_all(const Model& model, const EncodedMatrix& m) {
    std::vector<double> out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        out[i] = predict_proba(model, std::span<const double>{m.row(i), m.cols()});
    }
    return out;
}

}  // namespace conflictlens
