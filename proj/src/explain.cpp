#include "conflictlens/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "conflictlens/csv.hpp"
#include "conflictlens/errors.hpp"

namespace conflictlens {

std::vector<double> shapley_from_value_fn(const ValueFn& v, std::size_t n_features) {
    if (n_features > 15) throw TooManyFeatures("exact Shapley is limited to 15 features");
    const std::uint32_t full = (1u << n_features) - 1u;

    std::vector<double> values(full + 1u);
    for (std::uint32_t mask = 0; mask <= full; ++mask) values[mask] = v(mask);

    // weight(s) = s! (p - s - 1)! / p!
    std::vector<double> factorial(n_features + 1, 1.0);
    for (std::size_t i = 1; i <= n_features; ++i) {
        factorial[i] = factorial[i - 1] * static_cast<double>(i);
    }
    std::vector<double> weight(n_features, 0.0);
    for (std::size_t s = 0; s < n_features; ++s) {
        weight[s] = factorial[s] * factorial[n_features - s - 1] / factorial[n_features];
    }

    std::vector<double> phi(n_features, 0.0);
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
        const auto size = static_cast<std::size_t>(std::popcount(mask));
        for (std::size_t j = 0; j < n_features; ++j) {
            const std::uint32_t bit = 1u << j;
            if (mask & bit) continue;
            phi[j] += weight[size] * (values[mask | bit] - values[mask]);
        }
    }
    return phi;
}

AttributionSet shap_exact(const MarginFn& margin, std::span<const double> x,
                          const std::vector<std::vector<double>>& background,
                          const std::vector<ColumnInfo>& features) {
    if (background.empty()) throw EmptyBackground("shap_exact requires background rows");
    const std::size_t p = x.size();
    if (p > 15) throw TooManyFeatures("exact Shapley is limited to 15 features");

    std::vector<double> mixed(p);
    const auto value = [&](std::uint32_t mask) {
        double total = 0.0;
        for (const auto& b : background) {
            for (std::size_t j = 0; j < p; ++j) {
                mixed[j] = (mask & (1u << j)) ? x[j] : b[j];
            }
            total += margin(mixed);
        }
        return total / static_cast<double>(background.size());
    };

    AttributionSet out;
    out.features = features;
    out.base_value = value(0);
    out.phi.push_back(shapley_from_value_fn(value, p));
    out.raw_values.emplace_back(x.begin(), x.end());
    return out;
}

// ---------------------------------------------------------------------------
// Path-dependent tree Shapley
// ---------------------------------------------------------------------------

double tree_expected_value(const Tree& tree, std::span<const double> x,
                           const std::vector<bool>& in_subset) {
    const auto rec = [&](auto&& self, int i) -> double {
        const TreeNode& node = tree.nodes[i];
        if (node.is_leaf()) return node.value;
        if (in_subset[static_cast<std::size_t>(node.feature)]) {
            return self(self, x[node.feature] < node.threshold ? node.left : node.right);
        }
        const double cl = tree.nodes[node.left].cover;
        const double cr = tree.nodes[node.right].cover;
        if (!(cl + cr > 0.0)) throw MissingCover("tree node has no training cover");
        return (cl * self(self, node.left) + cr * self(self, node.right)) / (cl + cr);
    };
    return rec(rec, 0);
}

double tree_base_value(const Tree& tree) {
    std::vector<bool> none(tree.n_features, false);
    return tree_expected_value(tree, std::vector<double>(tree.n_features, 0.0), none);
}

namespace {

struct PathEntry {
    int feature = -1;
    double zero_fraction = 1.0;
    double one_fraction = 1.0;
    double weight = 0.0;
};

void extend_path(std::vector<PathEntry>& m, double pz, double po, int pi) {
    const std::size_t l = m.size();
    m.push_back({pi, pz, po, l == 0 ? 1.0 : 0.0});
    for (std::size_t i = l; i-- > 0;) {
        m[i + 1].weight += po * m[i].weight * static_cast<double>(i + 1) /
                           static_cast<double>(l + 1);
        m[i].weight = pz * m[i].weight * static_cast<double>(l - i) /
                      static_cast<double>(l + 1);
    }
}

std::vector<PathEntry> unwind_path(std::vector<PathEntry> m, std::size_t i) {
    const std::size_t size = m.size();
    double n = m[size - 1].weight;
    const double o = m[i].one_fraction;
    const double z = m[i].zero_fraction;
    for (std::size_t j = size - 1; j-- > 0;) {
        if (o != 0.0) {
            const double t = m[j].weight;
            m[j].weight = n * static_cast<double>(size) / (static_cast<double>(j + 1) * o);
            n = t - m[j].weight * z * static_cast<double>(size - 1 - j) /
                    static_cast<double>(size);
        } else {
            m[j].weight =
                m[j].weight * static_cast<double>(size) /
                (z * static_cast<double>(size - 1 - j));
        }
    }
    for (std::size_t j = i; j + 1 < size; ++j) {
        m[j].feature = m[j + 1].feature;
        m[j].zero_fraction = m[j + 1].zero_fraction;
        m[j].one_fraction = m[j + 1].one_fraction;
    }
    m.pop_back();
    return m;
}

void shap_recurse(const Tree& tree, std::span<const double> x, std::vector<double>& phi,
                  int node_index, std::vector<PathEntry> m, double pz, double po, int pi) {
    extend_path(m, pz, po, pi);
    const TreeNode& node = tree.nodes[node_index];

    if (node.is_leaf()) {
        for (std::size_t i = 1; i < m.size(); ++i) {
            const std::vector<PathEntry> unwound = unwind_path(m, i);
            double w = 0.0;
            for (const auto& e : unwound) w += e.weight;
            phi[static_cast<std::size_t>(m[i].feature)] +=
                w * (m[i].one_fraction - m[i].zero_fraction) * node.value;
        }
        return;
    }

    const double cl = tree.nodes[node.left].cover;
    const double cr = tree.nodes[node.right].cover;
    if (!(cl > 0.0) || !(cr > 0.0)) throw MissingCover("tree node has no training cover");
    const bool goes_left = x[node.feature] < node.threshold;
    const int hot = goes_left ? node.left : node.right;
    const int cold = goes_left ? node.right : node.left;
    const double hot_fraction = tree.nodes[hot].cover / (cl + cr);
    const double cold_fraction = tree.nodes[cold].cover / (cl + cr);

    double iz = 1.0, io = 1.0;
    std::size_t found = 0;
    for (std::size_t k = 1; k < m.size(); ++k) {
        if (m[k].feature == node.feature) {
            found = k;
            break;
        }
    }
    if (found > 0) {
        iz = m[found].zero_fraction;
        io = m[found].one_fraction;
        m = unwind_path(std::move(m), found);
    }

    shap_recurse(tree, x, phi, hot, m, iz * hot_fraction, io, node.feature);
    shap_recurse(tree, x, phi, cold, std::move(m), iz * cold_fraction, 0.0, node.feature);
}

std::vector<std::vector<double>> matrix_raw_values(const EncodedMatrix& data) {
    std::vector<std::vector<double>> raw(data.rows);
    for (std::size_t i = 0; i < data.rows; ++i) {
        raw[i].assign(data.row(i), data.row(i) + data.cols());
    }
    return raw;
}

}  // namespace

std::vector<double> shap_tree(const Tree& tree, std::span<const double> x) {
    if (x.size() != tree.n_features) {
        throw DimensionMismatch("row width does not match the tree's feature count");
    }
    std::vector<double> phi(tree.n_features, 0.0);
    shap_recurse(tree, x, phi, 0, {}, 1.0, 1.0, -1);
    return phi;
}

AttributionSet shap_tree_batch(const Tree& tree, const EncodedMatrix& data) {
    AttributionSet out;
    out.features = data.columns;
    out.base_value = tree_base_value(tree);
    out.raw_values = matrix_raw_values(data);
    out.phi.reserve(data.rows);
    for (std::size_t i = 0; i < data.rows; ++i) {
        out.phi.push_back(shap_tree(tree, {data.row(i), data.cols()}));
    }
    return out;
}

AttributionSet shap_tree_batch(const Forest& forest, const EncodedMatrix& data) {
    AttributionSet out;
    out.features = data.columns;
    out.raw_values = matrix_raw_values(data);
    const double scale = 1.0 / static_cast<double>(forest.trees.size());
    out.base_value = 0.0;
    for (const auto& tree : forest.trees) out.base_value += scale * tree_base_value(tree);
    out.phi.assign(data.rows, std::vector<double>(data.cols(), 0.0));
    for (const auto& tree : forest.trees) {
        for (std::size_t i = 0; i < data.rows; ++i) {
            const std::vector<double> phi = shap_tree(tree, {data.row(i), data.cols()});
            for (std::size_t j = 0; j < phi.size(); ++j) out.phi[i][j] += scale * phi[j];
        }
    }
    return out;
}

AttributionSet shap_tree_batch(const BoostedEnsemble& ensemble, const EncodedMatrix& data) {
    AttributionSet out;
    out.features = data.columns;
    out.raw_values = matrix_raw_values(data);
    out.base_value = ensemble.base_score;
    for (const auto& tree : ensemble.trees) {
        out.base_value += ensemble.learning_rate * tree_base_value(tree);
    }
    out.phi.assign(data.rows, std::vector<double>(data.cols(), 0.0));
    for (const auto& tree : ensemble.trees) {
        for (std::size_t i = 0; i < data.rows; ++i) {
            const std::vector<double> phi = shap_tree(tree, {data.row(i), data.cols()});
            for (std::size_t j = 0; j < phi.size(); ++j) {
                out.phi[i][j] += ensemble.learning_rate * phi[j];
            }
        }
    }
    return out;
}

AttributionSet shap_linear(const FittedLogit& model, const EncodedMatrix& data,
                           const std::vector<double>& feature_means) {
    const std::size_t p = data.cols();
    if (feature_means.size() != p || model.coefficients.size() != p + 1) {
        throw DimensionMismatch("feature means / coefficients width mismatch");
    }
    AttributionSet out;
    out.features = data.columns;
    out.base_value = model.coefficients[0];
    for (std::size_t j = 0; j < p; ++j) {
        out.base_value += model.coefficients[j + 1] * feature_means[j];
    }
    out.raw_values = matrix_raw_values(data);
    out.phi.assign(data.rows, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < data.rows; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            out.phi[i][j] = model.coefficients[j + 1] * (data.at(i, j) - feature_means[j]);
        }
    }
    return out;
}

std::vector<BeeswarmRow> beeswarm_export(const AttributionSet& attrs) {
    const std::size_t n = attrs.phi.size();
    if (n == 0) throw EmptyDataset("beeswarm_export requires at least one instance");
    const std::size_t p = attrs.features.size();

    std::vector<double> mean_abs(p, 0.0);
    for (const auto& row : attrs.phi) {
        for (std::size_t j = 0; j < p; ++j) mean_abs[j] += std::abs(row[j]);
    }
    for (double& v : mean_abs) v /= static_cast<double>(n);

    std::vector<std::size_t> order(p);
    for (std::size_t j = 0; j < p; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (mean_abs[a] != mean_abs[b]) return mean_abs[a] > mean_abs[b];
        return attrs.features[a].name() < attrs.features[b].name();
    });

    std::vector<double> lo(p, std::numeric_limits<double>::infinity());
    std::vector<double> hi(p, -std::numeric_limits<double>::infinity());
    for (const auto& row : attrs.raw_values) {
        for (std::size_t j = 0; j < p; ++j) {
            lo[j] = std::min(lo[j], row[j]);
            hi[j] = std::max(hi[j], row[j]);
        }
    }

    std::vector<BeeswarmRow> rows;
    rows.reserve(n * p);
    for (std::size_t j : order) {
        for (std::size_t i = 0; i < n; ++i) {
            BeeswarmRow r;
            r.feature = attrs.features[j].name();
            r.instance = i;
            r.shap_value = attrs.phi[i][j];
            r.normalized_value =
                hi[j] > lo[j] ? (attrs.raw_values[i][j] - lo[j]) / (hi[j] - lo[j]) : 0.5;
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

void write_beeswarm_csv(const std::vector<BeeswarmRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CsvError("cannot open '" + path + "' for writing");
    out << "feature,instance,shap_value,normalized_value\n";
    for (const auto& r : rows) {
        out << r.feature << ',' << r.instance << ',' << format_double(r.shap_value) << ','
            << format_double(r.normalized_value) << '\n';
    }
}

}  // namespace conflictlens
