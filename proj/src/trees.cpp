#include "conflictlens/trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "conflictlens/errors.hpp"
#include "conflictlens/kernels.hpp"
#include "conflictlens/rng.hpp"

namespace conflictlens {

double gini(const std::vector<double>& class_counts) {
    double total = 0.0;
    for (double c : class_counts) {
        if (c < 0.0) throw InvalidEvent("class counts must be non-negative");
        total += c;
    }
    if (!(total > 0.0)) throw EmptyNode("gini of an empty node");
    double g = 0.0;
    for (double c : class_counts) {
        const double p = c / total;
        g += p * (1.0 - p);
    }
    return g;
}

double gini(double count0, double count1) { return gini(std::vector<double>{count0, count1}); }

double Tree::predict_value(std::span<const double> x) const {
    if (x.size() != n_features) {
        throw DimensionMismatch("row has " + std::to_string(x.size()) + " features, tree has " +
                                std::to_string(n_features));
    }
    int i = 0;
    while (!nodes[i].is_leaf()) {
        i = x[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
    }
    return nodes[i].value;
}

std::size_t Tree::leaf_count() const {
    std::size_t c = 0;
    for (const auto& n : nodes) c += n.is_leaf() ? 1 : 0;
    return c;
}

int Tree::depth() const {
    // iterative depth via parent-tracked traversal
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int best = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes[i].is_leaf()) {
            stack.push_back({nodes[i].left, d + 1});
            stack.push_back({nodes[i].right, d + 1});
        }
    }
    return best;
}

double Forest::predict_proba(std::span<const double> x) const {
    double total = 0.0;
    for (const auto& t : trees) total += t.predict_value(x);
    return total / static_cast<double>(trees.size());
}

double BoostedEnsemble::margin(std::span<const double> x) const {
    double f = base_score;
    for (const auto& t : trees) f += learning_rate * t.predict_value(x);
    return f;
}

double BoostedEnsemble::predict_proba(std::span<const double> x) const {
    return kernels::sigmoid1(margin(x));
}

double predict_proba(const Tree& tree, std::span<const double> x) {
    return tree.predict_value(x);
}
double predict_proba(const Forest& forest, std::span<const double> x) {
    return forest.predict_proba(x);
}
double predict_proba(const BoostedEnsemble& ensemble, std::span<const double> x) {
    return ensemble.predict_proba(x);
}

// ---------------------------------------------------------------------------
// Classification tree fitting
// ---------------------------------------------------------------------------

namespace {

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

// Column-major copy of the design matrix for cache-friendly split scans.
struct ColumnData {
    std::size_t rows = 0, cols = 0;
    std::vector<double> values;  // cols x rows

    explicit ColumnData(const EncodedMatrix& m) : rows(m.rows), cols(m.cols()) {
        values.resize(rows * cols);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) values[j * rows + i] = m.at(i, j);
        }
    }

    double at(std::size_t row, std::size_t col) const { return values[col * rows + row]; }
    const double* column(std::size_t col) const { return values.data() + col * rows; }
};

double route_value(const Tree& tree, const ColumnData& x, std::size_t row) {
    int i = 0;
    while (!tree.nodes[i].is_leaf()) {
        const TreeNode& n = tree.nodes[i];
        i = x.at(row, static_cast<std::size_t>(n.feature)) < n.threshold ? n.left : n.right;
    }
    return tree.nodes[i].value;
}

// Drops nodes left unreachable by pruning and renumbers children.
void compact(Tree& tree) {
    std::vector<int> remap(tree.nodes.size(), -1);
    std::vector<int> order{0};
    for (std::size_t k = 0; k < order.size(); ++k) {
        const TreeNode& n = tree.nodes[order[k]];
        if (!n.is_leaf()) {
            order.push_back(n.left);
            order.push_back(n.right);
        }
    }
    std::vector<TreeNode> kept;
    kept.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        remap[order[k]] = static_cast<int>(k);
        kept.push_back(tree.nodes[order[k]]);
    }
    for (auto& n : kept) {
        if (!n.is_leaf()) {
            n.left = remap[n.left];
            n.right = remap[n.right];
        }
    }
    tree.nodes = std::move(kept);
}

struct ClassifierFitContext {
    const ColumnData& x;
    const std::vector<double>& y;
    const std::vector<double>& w;
    TreeParams params;
    std::size_t max_features = 0;  // 0 -> all
    Rng* feature_rng = nullptr;
    std::vector<std::size_t> all_features;
};

// Best Gini split at a node, scanning the allowed features in ascending
// order so equal gains resolve to the lowest column / lowest threshold.
SplitChoice best_split(const ClassifierFitContext& ctx, const std::vector<std::size_t>& rows,
                       double w0, double w1, const std::vector<std::size_t>& features) {
    SplitChoice best;
    const double parent_cost = (w0 + w1) * gini(w0, w1);
    std::vector<std::pair<double, std::size_t>> order(rows.size());

    for (std::size_t f : features) {
        const double* col = ctx.x.column(f);
        for (std::size_t k = 0; k < rows.size(); ++k) order[k] = {col[rows[k]], rows[k]};
        std::sort(order.begin(), order.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        double l0 = 0.0, l1 = 0.0;
        std::size_t left_n = 0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            const std::size_t r = order[k].second;
            const double wr = ctx.w[r];
            if (ctx.y[r] > 0.5) {
                l1 += wr;
            } else {
                l0 += wr;
            }
            ++left_n;
            if (order[k].first == order[k + 1].first) continue;
            if (left_n < ctx.params.min_samples_leaf) continue;
            if (rows.size() - left_n < ctx.params.min_samples_leaf) break;

            // prefix sums can overshoot the node totals by a few ulps
            const double r0 = std::max(0.0, w0 - l0);
            const double r1 = std::max(0.0, w1 - l1);
            double cost = 0.0;
            if (l0 + l1 > 0.0) cost += (l0 + l1) * gini(l0, l1);
            if (r0 + r1 > 0.0) cost += (r0 + r1) * gini(r0, r1);
            const double gain = parent_cost - cost;
            if (gain > best.gain + 1e-15) {
                best.found = true;
                best.feature = f;
                best.threshold = order[k].first + 0.5 * (order[k + 1].first - order[k].first);
                best.gain = gain;
            }
        }
    }
    return best;
}

int grow_classifier(Tree& tree, const ClassifierFitContext& ctx, std::vector<std::size_t>& rows,
                    int depth, Rng* feature_rng) {
    double w0 = 0.0, w1 = 0.0;
    for (std::size_t r : rows) {
        if (ctx.y[r] > 0.5) {
            w1 += ctx.w[r];
        } else {
            w0 += ctx.w[r];
        }
    }

    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    {
        TreeNode& node = tree.nodes.back();
        node.cover = w0 + w1;
        node.count0 = w0;
        node.count1 = w1;
        node.value = node.cover > 0.0 ? w1 / node.cover : 0.0;
    }

    const bool pure = w0 == 0.0 || w1 == 0.0;
    if (pure || depth >= ctx.params.max_depth || rows.size() < ctx.params.min_samples_split) {
        return index;
    }

    std::vector<std::size_t> features;
    if (ctx.max_features > 0 && ctx.max_features < ctx.all_features.size()) {
        std::vector<std::size_t> pool = ctx.all_features;
        for (std::size_t k = 0; k < ctx.max_features; ++k) {
            const std::size_t j = k + feature_rng->uniform_index(pool.size() - k);
            std::swap(pool[k], pool[j]);
        }
        features.assign(pool.begin(), pool.begin() + ctx.max_features);
        std::sort(features.begin(), features.end());
    } else {
        features = ctx.all_features;
    }

    const SplitChoice split = best_split(ctx, rows, w0, w1, features);
    if (!split.found || split.gain <= 0.0) return index;

    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    for (std::size_t r : rows) {
        (ctx.x.at(r, split.feature) < split.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[index].feature = static_cast<int>(split.feature);
    tree.nodes[index].threshold = split.threshold;
    const int left = grow_classifier(tree, ctx, left_rows, depth + 1, feature_rng);
    tree.nodes[index].left = left;
    const int right = grow_classifier(tree, ctx, right_rows, depth + 1, feature_rng);
    tree.nodes[index].right = right;
    return index;
}

// ---------------------------------------------------------------------------
// Cost-complexity pruning (weakest link)
// ---------------------------------------------------------------------------

struct SubtreeStats {
    double leaf_cost = 0.0;     // sum of R(leaf) over the subtree
    std::size_t leaves = 0;
};

SubtreeStats subtree_stats(const Tree& tree, int i, double w_total,
                           std::vector<SubtreeStats>& memo) {
    const TreeNode& node = tree.nodes[i];
    if (node.is_leaf()) {
        const double r = node.cover > 0.0 ? (node.cover / w_total) * gini(node.count0, node.count1)
                                          : 0.0;
        memo[i] = {r, 1};
    } else {
        const SubtreeStats l = subtree_stats(tree, node.left, w_total, memo);
        const SubtreeStats r = subtree_stats(tree, node.right, w_total, memo);
        memo[i] = {l.leaf_cost + r.leaf_cost, l.leaves + r.leaves};
    }
    return memo[i];
}

void collapse(Tree& tree, int i) {
    tree.nodes[i].feature = -1;
    tree.nodes[i].left = -1;
    tree.nodes[i].right = -1;
}

// Repeatedly collapse every internal node attaining the minimal per-leaf
// impurity gain while that gain stays below alpha. Unreachable nodes are
// left in place; prediction only follows live links.
void prune_ccp(Tree& tree, double alpha) {
    if (!(alpha > 0.0)) return;
    const double w_total = tree.nodes[0].cover;
    if (!(w_total > 0.0)) return;

    for (;;) {
        std::vector<SubtreeStats> memo(tree.nodes.size());
        subtree_stats(tree, 0, w_total, memo);

        double min_g = std::numeric_limits<double>::infinity();
        std::vector<int> reachable{0};
        std::vector<int> weakest;
        for (std::size_t k = 0; k < reachable.size(); ++k) {
            const int i = reachable[k];
            const TreeNode& node = tree.nodes[i];
            if (node.is_leaf()) continue;
            reachable.push_back(node.left);
            reachable.push_back(node.right);
            const double own =
                (node.cover / w_total) * gini(node.count0, node.count1);
            const double g = (own - memo[i].leaf_cost) /
                             static_cast<double>(memo[i].leaves - 1);
            if (g < min_g - 1e-15) {
                min_g = g;
                weakest.assign(1, i);
            } else if (g <= min_g + 1e-15) {
                weakest.push_back(i);
            }
        }
        if (weakest.empty() || !(min_g < alpha)) break;
        for (int i : weakest) collapse(tree, i);
    }
}

}  // namespace

Tree fit_tree(const EncodedMatrix& data, const TreeParams& params) {
    if (data.rows == 0) throw EmptyDataset("fit_tree requires data");
    const std::vector<double> y = data.labels_as_double();

    const ColumnData x(data);
    ClassifierFitContext ctx{x, y, data.row_weights, params, 0, nullptr, {}};
    ctx.all_features.resize(x.cols);
    std::iota(ctx.all_features.begin(), ctx.all_features.end(), 0);

    Tree tree;
    tree.n_features = x.cols;
    std::vector<std::size_t> rows(data.rows);
    std::iota(rows.begin(), rows.end(), 0);
    grow_classifier(tree, ctx, rows, 0, nullptr);
    prune_ccp(tree, params.ccp_alpha);
    compact(tree);
    return tree;
}

Forest fit_forest(const EncodedMatrix& data, const ForestParams& params) {
    if (data.rows == 0) throw EmptyDataset("fit_forest requires data");
    if (params.n_estimators == 0) throw InvalidConfig("n_estimators must be >= 1");
    const std::vector<double> y = data.labels_as_double();

    const ColumnData x(data);
    const std::size_t p = x.cols;
    const std::size_t max_features =
        params.max_features > 0
            ? std::min(params.max_features, p)
            : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));

    TreeParams tree_params;
    tree_params.max_depth = params.max_depth;
    tree_params.min_samples_leaf = params.min_samples_leaf;
    tree_params.min_samples_split = params.min_samples_split;
    tree_params.ccp_alpha = 0.0;

    Forest forest;
    forest.n_features = p;
    forest.trees.reserve(params.n_estimators);

    std::vector<double> oob_sum(data.rows, 0.0);
    std::vector<std::size_t> oob_count(data.rows, 0);
    std::vector<std::uint8_t> in_bag(data.rows);

    for (std::size_t t = 0; t < params.n_estimators; ++t) {
        Rng rng(derive_seed(params.seed, "forest", t));
        std::vector<double> w(data.rows, 0.0);
        std::vector<std::size_t> rows;
        rows.reserve(data.rows);
        std::fill(in_bag.begin(), in_bag.end(), 0);
        if (params.bootstrap) {
            for (std::size_t i = 0; i < data.rows; ++i) {
                const auto r = static_cast<std::size_t>(rng.uniform_index(data.rows));
                w[r] += data.row_weights[r];
                in_bag[r] = 1;
            }
            for (std::size_t i = 0; i < data.rows; ++i) {
                if (in_bag[i]) rows.push_back(i);
            }
        } else {
            rows.resize(data.rows);
            std::iota(rows.begin(), rows.end(), 0);
            w = data.row_weights;
            std::fill(in_bag.begin(), in_bag.end(), 1);
        }

        ClassifierFitContext ctx{x, y, w, tree_params, max_features, nullptr, {}};
        ctx.all_features.resize(p);
        std::iota(ctx.all_features.begin(), ctx.all_features.end(), 0);

        Tree tree;
        tree.n_features = p;
        grow_classifier(tree, ctx, rows, 0, &rng);
        if (params.bootstrap) {
            for (std::size_t i = 0; i < data.rows; ++i) {
                if (in_bag[i]) continue;
                oob_sum[i] += route_value(tree, x, i);
                ++oob_count[i];
            }
        }
        forest.trees.push_back(std::move(tree));
    }

    if (params.bootstrap) {
        double errors = 0.0;
        std::size_t counted = 0;
        for (std::size_t i = 0; i < data.rows; ++i) {
            if (oob_count[i] == 0) continue;
            const double prob = oob_sum[i] / static_cast<double>(oob_count[i]);
            const int pred = prob >= 0.5 ? 1 : 0;
            errors += pred != static_cast<int>(y[i]) ? 1.0 : 0.0;
            ++counted;
        }
        if (counted > 0) forest.oob_error = errors / static_cast<double>(counted);
    }
    return forest;
}

// ---------------------------------------------------------------------------
// Gradient boosting
// ---------------------------------------------------------------------------

namespace {

struct RegressionFitContext {
    const ColumnData& x;
    const std::vector<double>& g;
    const std::vector<double>& h;
    const BoostParams& params;
    const std::vector<std::size_t>& features;  // colsample subset for this round
};

struct RegSplit {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

RegSplit best_reg_split(const RegressionFitContext& ctx, const std::vector<std::size_t>& rows,
                        double g_total, double h_total) {
    RegSplit best;
    const double lambda = ctx.params.lambda;
    const double parent_score = g_total * g_total / (h_total + lambda);
    std::vector<std::pair<double, std::size_t>> order(rows.size());

    for (std::size_t f : ctx.features) {
        const double* col = ctx.x.column(f);
        for (std::size_t k = 0; k < rows.size(); ++k) order[k] = {col[rows[k]], rows[k]};
        std::sort(order.begin(), order.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        double gl = 0.0, hl = 0.0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            const std::size_t r = order[k].second;
            gl += ctx.g[r];
            hl += ctx.h[r];
            if (order[k].first == order[k + 1].first) continue;
            const double gr = g_total - gl, hr = h_total - hl;
            if (hl < ctx.params.min_child_weight || hr < ctx.params.min_child_weight) continue;
            const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                                       parent_score) -
                                ctx.params.gamma;
            if (gain > best.gain + 1e-15) {
                best.found = true;
                best.feature = f;
                best.threshold = order[k].first + 0.5 * (order[k + 1].first - order[k].first);
                best.gain = gain;
            }
        }
    }
    return best;
}

int grow_regression(Tree& tree, const RegressionFitContext& ctx, std::vector<std::size_t>& rows,
                    int depth) {
    double g_total = 0.0, h_total = 0.0;
    for (std::size_t r : rows) {
        g_total += ctx.g[r];
        h_total += ctx.h[r];
    }

    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.back().cover = static_cast<double>(rows.size());
    tree.nodes.back().value = -g_total / (h_total + ctx.params.lambda);

    if (depth >= ctx.params.max_depth || rows.size() < 2) return index;

    const RegSplit split = best_reg_split(ctx, rows, g_total, h_total);
    if (!split.found || split.gain <= 0.0) return index;

    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    for (std::size_t r : rows) {
        (ctx.x.at(r, split.feature) < split.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[index].feature = static_cast<int>(split.feature);
    tree.nodes[index].threshold = split.threshold;
    const int left = grow_regression(tree, ctx, left_rows, depth + 1);
    tree.nodes[index].left = left;
    const int right = grow_regression(tree, ctx, right_rows, depth + 1);
    tree.nodes[index].right = right;
    return index;
}

}  // namespace

BoostedEnsemble fit_gbdt(const EncodedMatrix& data, const BoostParams& params) {
    if (data.rows == 0) throw EmptyDataset("fit_gbdt requires data");
    const std::vector<double> y = data.labels_as_double();
    const std::vector<double>& w = data.row_weights;

    double pos_w = 0.0, total_w = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < data.rows; ++i) {
        total_w += w[i];
        if (y[i] > 0.5) {
            pos_w += w[i];
            ++n_pos;
        }
    }
    if (n_pos == 0 || n_pos == data.rows) throw SingleClass("both classes must be present");

    const ColumnData x(data);
    const std::size_t p = x.cols;

    BoostedEnsemble model;
    model.n_features = p;
    model.learning_rate = params.learning_rate;
    const double base_rate = pos_w / total_w;
    model.base_score = std::log(base_rate / (1.0 - base_rate));

    std::vector<double> f(data.rows, model.base_score);
    std::vector<double> prob(data.rows), g(data.rows), h(data.rows);
    std::vector<std::size_t> all_rows(data.rows);

    const auto n_cols = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(params.colsample * static_cast<double>(p))));

    for (std::size_t round = 0; round < params.n_rounds; ++round) {
        kernels::sigmoid(f, prob);
        kernels::logloss_grad_hess(prob, y, w, g, h);

        Rng rng(derive_seed(params.seed, "boost", round));
        std::vector<std::size_t> features(p);
        std::iota(features.begin(), features.end(), 0);
        if (n_cols < p) {
            for (std::size_t k = 0; k < n_cols; ++k) {
                const std::size_t j = k + rng.uniform_index(p - k);
                std::swap(features[k], features[j]);
            }
            features.resize(n_cols);
            std::sort(features.begin(), features.end());
        }

        RegressionFitContext ctx{x, g, h, params, features};
        Tree tree;
        tree.n_features = p;
        std::iota(all_rows.begin(), all_rows.end(), 0);
        std::vector<std::size_t> rows = all_rows;
        grow_regression(tree, ctx, rows, 0);

        for (std::size_t i = 0; i < data.rows; ++i) {
            f[i] += params.learning_rate * route_value(tree, x, i);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

}  // namespace conflictlens
