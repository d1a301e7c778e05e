// Acceptance suite: runs every release gate end to end and prints one
// PASS/FAIL line per criterion. Exits non-zero if any gate fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflictlens/csv.hpp"
#include "conflictlens/errors.hpp"
#include "conflictlens/eval.hpp"
#include "conflictlens/explain.hpp"
#include "conflictlens/imbalance.hpp"
#include "conflictlens/kernels.hpp"
#include "conflictlens/logit.hpp"
#include "conflictlens/pipeline.hpp"
#include "conflictlens/rng.hpp"
#include "conflictlens/synth.hpp"
#include "conflictlens/trees.hpp"
#include "conflictlens/tune.hpp"

using namespace conflictlens;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %-28s %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Logistic recovery on synthetic data from the published coefficients
// ---------------------------------------------------------------------------
void criterion_1() {
    const auto start = std::chrono::steady_clock::now();

    std::size_t nonzero_checks = 0, nonzero_hits = 0;
    std::size_t zero_checks = 0, zero_insignificant = 0;
    std::map<std::string, int> nonzero_misses;

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        GeneratorConfig cfg = GeneratorConfig::defaults();
        cfg.seed = 1000 + seed;
        const auto events = generate_dataset(cfg, 50000);
        const double intercept =
            calibrate_intercept(cfg, cfg.base_rate, derive_seed(cfg.seed, "calibrate"));

        const EncodedMatrix data = one_hot_encode(events, true);
        const FittedLogit fit = fit_logistic(data);

        for (const auto& term : fit.terms) {
            double truth = 0.0;
            bool is_nonzero = false;
            if (term.name == "intercept") {
                truth = intercept;
                is_nonzero = true;
            } else if (const auto it = cfg.ground_truth.find(term.name);
                       it != cfg.ground_truth.end()) {
                truth = it->second;
                is_nonzero = true;
            }
            if (is_nonzero) {
                ++nonzero_checks;
                if (std::abs(term.coefficient - truth) <= 3.0 * term.std_error) {
                    ++nonzero_hits;
                } else {
                    ++nonzero_misses[term.name];
                }
            } else {
                ++zero_checks;
                if (term.p_value >= 0.05) ++zero_insignificant;
            }
        }
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    // every nonzero coefficient lands within 3 SEs in at least 9 of 10 seeds
    bool nonzero_ok = true;
    for (const auto& [name, misses] : nonzero_misses) {
        if (misses > 1) nonzero_ok = false;
    }
    const double zero_rate =
        static_cast<double>(zero_insignificant) / static_cast<double>(zero_checks);
    const bool pass = nonzero_ok && zero_rate >= 0.90 && elapsed < 120.0;
    report(1, "logistic recovery", pass,
           fmt("nonzero within 3se %zu/%zu, zero insignificant %.1f%% (need >= 90%%), %.0fs",
               nonzero_hits, nonzero_checks, 100.0 * zero_rate, elapsed));
}

// ---------------------------------------------------------------------------
// 2. Gradient checks against central finite differences
// ---------------------------------------------------------------------------
void criterion_2() {
    Rng rng(2024);
    double worst = 0.0;

    // logistic log-likelihood gradient at 20 random parameter points
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.seed = 31;
    cfg.base_rate = 0.3;
    const EncodedMatrix m = one_hot_encode(generate_dataset(cfg, 200), true);
    const std::size_t p = m.cols() + 1;

    const auto ll = [&](const std::vector<double>& beta) {
        double total = 0.0;
        for (std::size_t i = 0; i < m.rows; ++i) {
            double z = beta[0];
            for (std::size_t j = 0; j < m.cols(); ++j) z += beta[j + 1] * m.at(i, j);
            const double softplus =
                z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
            total += m.labels[i] * z - softplus;
        }
        return total;
    };

    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> beta(p);
        for (double& b : beta) b = rng.uniform(-0.5, 0.5);
        std::vector<double> grad(p, 0.0);
        for (std::size_t i = 0; i < m.rows; ++i) {
            double z = beta[0];
            for (std::size_t j = 0; j < m.cols(); ++j) z += beta[j + 1] * m.at(i, j);
            const double resid = m.labels[i] - kernels::sigmoid1(z);
            grad[0] += resid;
            for (std::size_t j = 0; j < m.cols(); ++j) grad[j + 1] += resid * m.at(i, j);
        }
        const double h = 1e-5;
        const std::size_t j = rng.uniform_index(p);
        std::vector<double> lo = beta, hi = beta;
        lo[j] -= h;
        hi[j] += h;
        const double numeric = (ll(hi) - ll(lo)) / (2.0 * h);
        worst = std::max(worst, std::abs(grad[j] - numeric) / std::max(1.0, std::abs(numeric)));
    }

    // boosting gradient/hessian of the log-loss at 20 random margins
    for (int trial = 0; trial < 20; ++trial) {
        const double f = rng.uniform(-4.0, 4.0);
        const double y = rng.bernoulli(0.5) ? 1.0 : 0.0;
        const double prob = kernels::sigmoid1(f);
        const auto loss = [&](double z) {
            const double pz = kernels::sigmoid1(z);
            return y > 0.5 ? -std::log(pz) : -std::log(1.0 - pz);
        };
        const double h = 1e-6;
        const double g_num = (loss(f + h) - loss(f - h)) / (2.0 * h);
        worst = std::max(worst,
                         std::abs((prob - y) - g_num) / std::max(1.0, std::abs(g_num)));
        // hessian via central differences of the analytic gradient
        const auto grad_at = [&](double z) { return kernels::sigmoid1(z) - y; };
        const double h_num = (grad_at(f + h) - grad_at(f - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(prob * (1.0 - prob) - h_num) /
                                    std::max(1.0, std::abs(h_num)));
    }

    report(2, "gradient checks", worst < 1e-6, fmt("worst relative error %.2e", worst));
}

// ---------------------------------------------------------------------------
// 3. Trapezoid ROC AUC equals the pairwise Mann-Whitney statistic
// ---------------------------------------------------------------------------
void criterion_3() {
    Rng rng(3000);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(49);
        std::vector<std::int8_t> y(n);
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.bernoulli(0.4) ? 1 : 0;
            p[i] = static_cast<double>(rng.uniform_index(6)) / 5.0;  // heavy ties
        }
        y[0] = 1;
        if (n > 1) y[1] = 0;

        double pairs = 0.0, wins = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (y[i] != 1) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (y[j] != 0) continue;
                pairs += 1.0;
                if (p[i] > p[j]) {
                    wins += 1.0;
                } else if (p[i] == p[j]) {
                    wins += 0.5;
                }
            }
        }
        const double auc = roc_curve(y, p).auc_positive;
        worst = std::max(worst, std::abs(auc - wins / pairs));
    }
    report(3, "auc pairwise oracle", worst <= 1e-12, fmt("worst |diff| %.2e over 200 sets", worst));
}

// ---------------------------------------------------------------------------
// 4. Tree Shapley against brute force; local accuracy for every family
// ---------------------------------------------------------------------------
void criterion_4() {
    Rng rng(4000);
    double worst_tree = 0.0;

    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t p = 2 + rng.uniform_index(5);
        Tree tree;
        tree.n_features = p;
        const auto build = [&](auto&& self, int depth, double cover) -> int {
            const int index = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            if (depth >= 3 || cover < 2.0 || rng.bernoulli(0.2)) {
                tree.nodes[index].cover = cover;
                tree.nodes[index].value = rng.uniform01();
                return index;
            }
            const double left_cover = std::max(1.0, std::round(cover * (0.2 + 0.6 * rng.uniform01())));
            const double right_cover = std::max(1.0, cover - left_cover);
            tree.nodes[index].feature = static_cast<int>(rng.uniform_index(p));
            tree.nodes[index].threshold = rng.uniform01();
            tree.nodes[index].cover = left_cover + right_cover;
            const int l = self(self, depth + 1, left_cover);
            tree.nodes[index].left = l;
            const int r = self(self, depth + 1, right_cover);
            tree.nodes[index].right = r;
            return index;
        };
        build(build, 0, 64.0);

        std::vector<double> x(p);
        for (double& v : x) v = rng.uniform01();
        const std::vector<double> fast = shap_tree(tree, x);
        const ValueFn v = [&](std::uint32_t mask) {
            std::vector<bool> subset(p, false);
            for (std::size_t j = 0; j < p; ++j) subset[j] = (mask >> j) & 1u;
            return tree_expected_value(tree, x, subset);
        };
        const std::vector<double> exact = shapley_from_value_fn(v, p);
        for (std::size_t j = 0; j < p; ++j) {
            worst_tree = std::max(worst_tree, std::abs(fast[j] - exact[j]));
        }
    }

    // local accuracy on fitted models of every family
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.seed = 41;
    const auto events = generate_dataset(cfg, 600);
    const EncodedMatrix full = one_hot_encode(events, false);
    const EncodedMatrix dropped = one_hot_encode(events, true);
    const EncodedMatrix probe_full = subset_rows(full, {0, 1, 2, 3, 4, 5, 6, 7});
    const EncodedMatrix probe_dropped = subset_rows(dropped, {0, 1, 2, 3, 4, 5, 6, 7});

    double worst_local = 0.0;
    const auto check_local = [&](const AttributionSet& attrs,
                                 const std::function<double(std::size_t)>& margin) {
        for (std::size_t i = 0; i < attrs.phi.size(); ++i) {
            double total = attrs.base_value;
            for (double phi : attrs.phi[i]) total += phi;
            worst_local = std::max(worst_local, std::abs(total - margin(i)));
        }
    };

    TreeParams tp;
    tp.max_depth = 5;
    const Tree dt = fit_tree(full, tp);
    check_local(shap_tree_batch(dt, probe_full), [&](std::size_t i) {
        return dt.predict_value({probe_full.row(i), probe_full.cols()});
    });

    ForestParams fp;
    fp.n_estimators = 20;
    fp.max_depth = 6;
    fp.seed = 9;
    const Forest rf = fit_forest(full, fp);
    check_local(shap_tree_batch(rf, probe_full), [&](std::size_t i) {
        return rf.predict_proba({probe_full.row(i), probe_full.cols()});
    });

    BoostParams bp;
    bp.n_rounds = 25;
    bp.max_depth = 3;
    bp.seed = 10;
    const BoostedEnsemble gbdt = fit_gbdt(full, bp);
    check_local(shap_tree_batch(gbdt, probe_full), [&](std::size_t i) {
        return gbdt.margin({probe_full.row(i), probe_full.cols()});
    });

    const FittedLogit logit = fit_logistic(dropped);
    const std::vector<double> means = column_means(dropped);
    check_local(shap_linear(logit, probe_dropped, means), [&](std::size_t i) {
        double z = logit.coefficients[0];
        for (std::size_t j = 0; j < probe_dropped.cols(); ++j) {
            z += logit.coefficients[j + 1] * probe_dropped.at(i, j);
        }
        return z;
    });

    const bool pass = worst_tree <= 1e-9 && worst_local <= 1e-9;
    report(4, "shapley oracle", pass,
           fmt("tree-vs-exact %.2e, local accuracy %.2e", worst_tree, worst_local));
}

// ---------------------------------------------------------------------------
// 5. SMOTE-NC structural properties
// ---------------------------------------------------------------------------
void criterion_5() {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.seed = 5150;
    auto events = generate_dataset(cfg, 1470);
    // force the documented 89/1381 label split
    for (std::size_t i = 0; i < events.size(); ++i) events[i].label = i < 89;
    const EncodedMatrix data = one_hot_encode(events, false);

    SmoteParams params;
    params.seed = 6;
    std::vector<std::pair<std::size_t, std::size_t>> parents;
    const EncodedMatrix out = smote_nc(data, params, &parents);

    const std::size_t appended = out.rows - data.rows;
    bool counts_ok = appended == 1292;
    std::size_t pos = 0;
    for (auto y : out.labels) pos += y == 1 ? 1 : 0;
    counts_ok = counts_ok && (2 * pos == out.rows);

    bool segment_ok = true, nominal_ok = true;
    for (std::size_t s = 0; s < appended; ++s) {
        const std::size_t row = data.rows + s;
        const auto [a, b] = parents[s];
        for (std::size_t c = 0; c < kNumContinuous; ++c) {
            const double lo = std::min(data.at(a, c), data.at(b, c));
            const double hi = std::max(data.at(a, c), data.at(b, c));
            if (out.at(row, c) < lo - 1e-12 || out.at(row, c) > hi + 1e-12) segment_ok = false;
        }
        try {
            validate(decode_event(out, row));
        } catch (const Error&) {
            nominal_ok = false;
        }
    }

    report(5, "smote-nc properties", counts_ok && segment_ok && nominal_ok,
           fmt("appended %zu (want 1292), balanced %s, segments %s, nominals %s", appended,
               counts_ok ? "yes" : "no", segment_ok ? "ok" : "violated",
               nominal_ok ? "legal" : "illegal"));
}

// ---------------------------------------------------------------------------
// 6 & 10. Grid-wide threshold dominance + byte-identical pipeline reruns
// ---------------------------------------------------------------------------
void criteria_6_and_10() {
    const fs::path base = fs::temp_directory_path() / "conflictlens_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);

    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.seed = 660;
    cfg.base_rate = 0.15;  // keep every grid cell trainable at n = 900
    const std::string data = (base / "grid.csv").string();
    write_events_csv_file(generate_dataset(cfg, 900), data);

    PipelineConfig pipe;
    pipe.data_path = data;
    pipe.seed = 11;
    pipe.out_dir = (base / "run1").string();
    const int rc1 = run_pipeline(pipe);
    pipe.out_dir = (base / "run2").string();
    const int rc2 = run_pipeline(pipe);

    bool dominance = rc1 == 0;
    std::size_t cells = 0;
    {
        std::ifstream in(base / "run1/comparison.json");
        std::ostringstream buf;
        buf << in.rdbuf();
        const auto j = nlohmann::json::parse(buf.str());
        for (const auto& cell : j["cells"]) {
            ++cells;
            if (cell["macro_f1_selected"].get<double>() + 1e-12 <
                cell["macro_f1_default"].get<double>()) {
                dominance = false;
            }
        }
    }
    report(6, "threshold sweep dominance", dominance && cells == 12,
           fmt("%zu/12 cells, optimized >= 0.50 in all", cells));

    bool identical = rc1 == 0 && rc2 == 0;
    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(base / "run1")) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        const fs::path other = base / "run2" / fs::relative(entry.path(), base / "run1");
        std::ifstream a(entry.path(), std::ios::binary), b(other, std::ios::binary);
        std::ostringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        if (sa.str() != sb.str() || sa.str().empty()) identical = false;
        ++compared;
    }
    report(10, "pipeline determinism", identical && compared > 12,
           fmt("%zu JSON artifacts byte-identical across reruns", compared));
    fs::remove_all(base);
}

// ---------------------------------------------------------------------------
// 7. Model-family ordering under a nonlinear ground truth
// ---------------------------------------------------------------------------
void criterion_7() {
    std::map<std::string, std::vector<double>> scores;
    int inversions_beyond_allowance = 0;

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        GeneratorConfig cfg = GeneratorConfig::defaults();
        cfg.seed = 7000 + seed;
        cfg.base_rate = 0.0605;
        // one interaction term, embedded so the PET slope is +1.3 inside
        // low-proximity events and -1.3 outside with matched branch rates: a
        // linear score carries no PET/proximity information while the trees
        // can split on the pair
        cfg.ground_truth["pet"] = -1.3;
        cfg.ground_truth["proximity.low"] = -4.42;
        cfg.interactions.push_back({"pet", "proximity.low", 2.6});
        const auto events = generate_dataset(cfg, 4000);

        std::vector<std::int8_t> labels(events.size());
        for (std::size_t i = 0; i < events.size(); ++i) labels[i] = *events[i].label ? 1 : 0;
        const SplitIndices split =
            stratified_split_indices(labels, 0.2, derive_seed(cfg.seed, "split"));
        std::vector<CriticalEvent> train_events, test_events;
        for (std::size_t i : split.train) train_events.push_back(events[i]);
        for (std::size_t i : split.test) test_events.push_back(events[i]);

        EncodedMatrix train = one_hot_encode(train_events, false);
        train = apply_balance(train, BalanceMode::smote, 5, 1.0, derive_seed(cfg.seed, "bal"));
        const EncodedMatrix test_full = one_hot_encode(test_events, false);
        const EncodedMatrix test_dropped = project_to_baseline_dropped(test_full);
        std::vector<std::int8_t> y(test_events.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = *test_events[i].label ? 1 : 0;

        for (const ModelFamily family :
             {ModelFamily::logit, ModelFamily::dt, ModelFamily::rf, ModelFamily::gbdt}) {
            const Model model = fit_model(family, {}, train, derive_seed(cfg.seed, "fit"));
            const EncodedMatrix aligned = align_to_model(
                model, family == ModelFamily::logit ? test_dropped : test_full);
            const std::vector<double> p = model.predict_proba(aligned);
            const ThresholdSweep sweep = optimize_threshold(y, p);
            scores[family_name(family)].push_back(sweep.best_macro_f1);
        }
    }

    const auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    const double m_logit = median(scores["logit"]);
    const double m_dt = median(scores["dt"]);
    const double m_rf = median(scores["rf"]);
    const double m_gbdt = median(scores["gbdt"]);

    int inversions = 0;
    if (m_gbdt < m_rf) ++inversions;
    if (m_rf < m_dt) ++inversions;
    if (m_dt < m_logit) ++inversions;
    inversions_beyond_allowance = std::max(0, inversions - 1);

    report(7, "model ordering", inversions_beyond_allowance == 0,
           fmt("median macro-F1: gbdt %.3f, rf %.3f, dt %.3f, logit %.3f (%d inversions)",
               m_gbdt, m_rf, m_dt, m_logit, inversions));
}

// ---------------------------------------------------------------------------
// 8. SMOTE balancing improves logistic macro ROC AUC on 1470-row replicas
//
// Known-red gate. On data whose labels come from a logistic ground truth,
// the plain maximum-likelihood fit already estimates the optimal ranking and
// SMOTE-NC augmentation only perturbs it (measured at -0.03 to -0.05 AUC
// here and 0/10 wins for an independent Python reimplementation with
// sklearn, both unpenalized and default-penalized, across signal strengths,
// interaction variants, and covariate couplings). The balancing benefit
// reported for the source data evidently depends on structure a
// marginally-calibrated generator does not reproduce. The gate is kept as
// stated rather than weakened.
// ---------------------------------------------------------------------------
void criterion_8() {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        GeneratorConfig cfg = GeneratorConfig::defaults();
        cfg.seed = 8800 + seed;
        cfg.base_rate = 0.0605;
        const auto events = generate_dataset(cfg, 1470);

        std::vector<std::int8_t> labels(events.size());
        for (std::size_t i = 0; i < events.size(); ++i) labels[i] = *events[i].label ? 1 : 0;
        const SplitIndices split =
            stratified_split_indices(labels, 0.2, derive_seed(cfg.seed, "split"));
        std::vector<CriticalEvent> train_events, test_events;
        for (std::size_t i : split.train) train_events.push_back(events[i]);
        for (std::size_t i : split.test) test_events.push_back(events[i]);

        const EncodedMatrix train_full = one_hot_encode(train_events, false);
        const EncodedMatrix test_dropped =
            project_to_baseline_dropped(one_hot_encode(test_events, false));
        std::vector<std::int8_t> y(test_events.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = *test_events[i].label ? 1 : 0;

        const auto auc_for = [&](BalanceMode mode) {
            const EncodedMatrix balanced =
                apply_balance(train_full, mode, 5, 1.0, derive_seed(cfg.seed, "bal"));
            const Model model = fit_model(ModelFamily::logit, {}, balanced,
                                          derive_seed(cfg.seed, "fit"));
            const std::vector<double> p =
                model.predict_proba(align_to_model(model, test_dropped));
            return roc_curve(y, p).auc_macro;
        };

        if (auc_for(BalanceMode::smote) >= auc_for(BalanceMode::none)) ++wins;
    }
    report(8, "balancing benefit", wins >= 7, fmt("smote >= unbalanced in %d/10 seeds", wins));
}

// ---------------------------------------------------------------------------
// 9. Bayesian tuner beats random search and finds a 2-D optimum
// ---------------------------------------------------------------------------
void criterion_9() {
    SearchSpace space;
    space.params = {{"x", ParamType::real, 0.0, 1.0, ParamScale::linear},
                    {"y", ParamType::real, 0.0, 1.0, ParamScale::linear}};
    // smooth anisotropic bowl with a mild ripple; unique maximum at (0.62, 0.31)
    const auto objective = [](const ParamPoint& p) {
        const double dx = p.at("x") - 0.62;
        const double dy = p.at("y") - 0.31;
        return -(1.3 * dx * dx + 0.7 * dy * dy) + 0.01 * std::cos(8.0 * dx) * 0.01;
    };
    const double diameter = std::sqrt(2.0);

    int near_hits = 0, beats_random = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const TuneResult gp = bayes_optimize(space, objective, 10, 50, seed);
        const double dx = gp.best_params.at("x") - 0.62;
        const double dy = gp.best_params.at("y") - 0.31;
        if (std::sqrt(dx * dx + dy * dy) <= 0.02 * diameter) ++near_hits;

        Rng rng(derive_seed(seed, "random-search"));
        double random_best = -1e300;
        for (int i = 0; i < 50; ++i) {
            const ParamPoint p{{"x", rng.uniform01()}, {"y", rng.uniform01()}};
            random_best = std::max(random_best, objective(p));
        }
        if (gp.best_objective > random_best) ++beats_random;
    }
    report(9, "bayesian tuner", near_hits >= 8 && beats_random >= 8,
           fmt("within 2%% of optimum in %d/10 seeds, beats random in %d/10", near_hits,
               beats_random));
}

// ---------------------------------------------------------------------------
// 11. Evaluation conventions on the hand-enumerated fixture
// ---------------------------------------------------------------------------
void criterion_11() {
    const std::vector<std::int8_t> y = {1, 1, 0, 0, 0};
    const std::vector<double> p = {0.6, 0.4, 0.55, 0.2, 0.1};
    const ConfusionMatrix cm = confusion(y, p, 0.5);
    const PrfReport r = prf(cm);

    bool ok = cm.tp == 1 && cm.fn == 1 && cm.fp == 1 && cm.tn == 2;
    ok = ok && cm.accuracy() == 3.0 / 5.0;
    ok = ok && cm.accuracy() ==
                   static_cast<double>(cm.tp + cm.tn) /
                       static_cast<double>(cm.positives() + cm.negatives());
    ok = ok && r.positive.precision == 0.5 && r.positive.recall == 0.5;
    ok = ok && r.negative.precision == 2.0 / 3.0 && r.negative.recall == 2.0 / 3.0;

    std::vector<std::int8_t> big(500, 0);
    for (std::size_t i = 0; i < 30; ++i) big[i] = 1;  // prevalence 0.06
    const std::vector<double> constant(big.size(), 0.3);
    const double ap = pr_curve(big, constant).auc_positive;
    ok = ok && std::abs(ap - 0.06) <= 1e-12;

    report(11, "eval conventions", ok, fmt("5-point fixture exact, constant AP |diff| %.1e",
                                           std::abs(ap - 0.06)));
}

}  // namespace

int main() {
    std::printf("conflictlens acceptance suite (kernels: %s)\n", kernels::active_ops().name);
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criteria_6_and_10();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_11();
    if (failures > 0) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
