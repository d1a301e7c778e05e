#include "conflictlens/imbalance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "conflictlens/errors.hpp"
#include "conflictlens/kernels.hpp"
#include "conflictlens/rng.hpp"

namespace conflictlens {

std::pair<double, double> class_weights(const std::vector<std::int8_t>& labels) {
    std::size_t n0 = 0, n1 = 0;
    for (std::int8_t y : labels) {
        if (y < 0) throw UnlabeledData("class_weights requires labels on every row");
        (y == 1 ? n1 : n0)++;
    }
    if (n0 == 0 || n1 == 0) throw SingleClass("both classes must be present");
    const double n = static_cast<double>(labels.size());
    return {n / (2.0 * static_cast<double>(n0)), n / (2.0 * static_cast<double>(n1))};
}

namespace {

// Column groups of one source variable (its one-hot block), plus the
// continuous column list.
struct ColumnGroups {
    std::vector<std::size_t> continuous;
    std::vector<std::pair<std::string, std::vector<std::size_t>>> nominal;
};

ColumnGroups group_columns(const EncodedMatrix& m) {
    ColumnGroups g;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        const auto& col = m.columns[j];
        if (col.continuous) {
            g.continuous.push_back(j);
        } else if (!g.nominal.empty() && g.nominal.back().first == col.variable) {
            g.nominal.back().second.push_back(j);
        } else {
            g.nominal.push_back({col.variable, {j}});
        }
    }
    return g;
}

// Level of `var_cols` active in row r; one-hot blocks have at most one.
std::size_t active_level(const EncodedMatrix& m, std::size_t r,
                         const std::vector<std::size_t>& var_cols) {
    for (std::size_t k = 0; k < var_cols.size(); ++k) {
        if (m.at(r, var_cols[k]) != 0.0) return k;
    }
    return var_cols.size();  // baseline (all indicators zero)
}

}  // namespace

EncodedMatrix smote_nc(const EncodedMatrix& data, const SmoteParams& params,
                       std::vector<std::pair<std::size_t, std::size_t>>* parents_out) {
    if (parents_out != nullptr) parents_out->clear();
    if (params.k_neighbors < 1) throw TooFewMinority("k_neighbors must be >= 1");
    if (!(params.target_ratio > 0.0) || params.target_ratio > 1.0) {
        throw InvalidConfig("target_ratio must lie in (0, 1]");
    }

    std::vector<std::size_t> minority, majority;
    for (std::size_t i = 0; i < data.rows; ++i) {
        if (data.labels[i] < 0) throw UnlabeledData("smote_nc requires labels on every row");
        (data.labels[i] == 1 ? minority : majority).push_back(i);
    }
    if (minority.empty() || majority.empty()) throw SingleClass("both classes must be present");
    std::int8_t minority_label = 1;
    if (minority.size() > majority.size()) {
        std::swap(minority, majority);
        minority_label = 0;
    }
    if (minority.size() <= params.k_neighbors) {
        throw TooFewMinority("minority count must exceed k_neighbors");
    }

    const ColumnGroups groups = group_columns(data);
    if (groups.continuous.empty()) {
        throw InvalidConfig("smote_nc requires at least one continuous column");
    }

    const auto target = static_cast<std::size_t>(
        params.target_ratio * static_cast<double>(majority.size()) + 1e-9);
    const std::size_t n_new = target > minority.size() ? target - minority.size() : 0;

    EncodedMatrix out = data;
    if (n_new == 0) return out;

    // Scale continuous coordinates by minority-class standard deviations, so
    // one nominal mismatch costs the same as a one-sigma continuous gap (the
    // mismatch penalty is the median std of the scaled features, i.e. 1).
    const std::size_t nc = groups.continuous.size();
    std::vector<double> sd(nc, 1.0);
    {
        std::vector<double> mean(nc, 0.0);
        for (std::size_t i : minority) {
            for (std::size_t k = 0; k < nc; ++k) mean[k] += data.at(i, groups.continuous[k]);
        }
        for (double& v : mean) v /= static_cast<double>(minority.size());
        std::vector<double> var(nc, 0.0);
        for (std::size_t i : minority) {
            for (std::size_t k = 0; k < nc; ++k) {
                const double d = data.at(i, groups.continuous[k]) - mean[k];
                var[k] += d * d;
            }
        }
        for (std::size_t k = 0; k < nc; ++k) {
            sd[k] = std::sqrt(var[k] / static_cast<double>(minority.size()));
            if (!(sd[k] > 0.0)) sd[k] = 1.0;
        }
    }
    std::vector<double> scaled(minority.size() * nc);
    for (std::size_t a = 0; a < minority.size(); ++a) {
        for (std::size_t k = 0; k < nc; ++k) {
            scaled[a * nc + k] = data.at(minority[a], groups.continuous[k]) / sd[k];
        }
    }
    std::vector<double> med_input(nc);
    for (std::size_t k = 0; k < nc; ++k) med_input[k] = sd[k] / sd[k];
    std::nth_element(med_input.begin(), med_input.begin() + nc / 2, med_input.end());
    const double med = med_input[nc / 2];
    const double mismatch_penalty = med * med;

    // Cache nominal levels per minority row for fast mismatch counting.
    const std::size_t nv = groups.nominal.size();
    std::vector<std::size_t> levels(minority.size() * nv);
    for (std::size_t a = 0; a < minority.size(); ++a) {
        for (std::size_t v = 0; v < nv; ++v) {
            levels[a * nv + v] = active_level(data, minority[a], groups.nominal[v].second);
        }
    }

    auto metric = [&](std::size_t a, std::size_t b) {
        double d2 = kernels::sq_dist({&scaled[a * nc], nc}, {&scaled[b * nc], nc});
        for (std::size_t v = 0; v < nv; ++v) {
            if (levels[a * nv + v] != levels[b * nv + v]) d2 += mismatch_penalty;
        }
        return d2;
    };

    // k nearest minority neighbours of every minority row (exhaustive scan;
    // minority sets are small).
    const std::size_t k = params.k_neighbors;
    std::vector<std::size_t> knn(minority.size() * k);
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t a = 0; a < minority.size(); ++a) {
        cand.clear();
        for (std::size_t b = 0; b < minority.size(); ++b) {
            if (b != a) cand.emplace_back(metric(a, b), b);
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (std::size_t j = 0; j < k; ++j) knn[a * k + j] = cand[j].second;
    }

    Rng rng(params.seed);
    out.values.reserve((data.rows + n_new) * data.cols());
    for (std::size_t s = 0; s < n_new; ++s) {
        const std::size_t a = static_cast<std::size_t>(rng.uniform_index(minority.size()));
        const std::size_t b = knn[a * k + rng.uniform_index(k)];
        const double u = rng.uniform01();
        if (parents_out != nullptr) parents_out->emplace_back(minority[a], minority[b]);

        std::vector<double> row(data.row(minority[a]), data.row(minority[a]) + data.cols());
        for (std::size_t c = 0; c < nc; ++c) {
            const std::size_t j = groups.continuous[c];
            const double av = data.at(minority[a], j);
            const double bv = data.at(minority[b], j);
            row[j] = av + u * (bv - av);
        }
        for (std::size_t v = 0; v < nv; ++v) {
            const auto& var_cols = groups.nominal[v].second;
            std::vector<std::size_t> counts(var_cols.size() + 1, 0);
            for (std::size_t j = 0; j < k; ++j) ++counts[levels[knn[a * k + j] * nv + v]];
            const std::size_t best = *std::max_element(counts.begin(), counts.end());
            const std::size_t seed_level = levels[a * nv + v];
            std::size_t chosen = var_cols.size() + 1;
            if (counts[seed_level] == best) {
                chosen = seed_level;
            } else {
                for (std::size_t l = 0; l < counts.size(); ++l) {
                    if (counts[l] == best) {
                        chosen = l;
                        break;
                    }
                }
            }
            for (std::size_t l = 0; l < var_cols.size(); ++l) {
                row[var_cols[l]] = (l == chosen) ? 1.0 : 0.0;
            }
        }

        out.values.insert(out.values.end(), row.begin(), row.end());
        out.labels.push_back(minority_label);
        out.row_weights.push_back(1.0);
        out.synthetic.push_back(1);
        ++out.rows;
    }
    return out;
}

}  // namespace conflictlens
