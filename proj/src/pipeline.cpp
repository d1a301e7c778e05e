#include "conflictlens/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "conflictlens/csv.hpp"
#include "conflictlens/errors.hpp"
#include "conflictlens/explain.hpp"
#include "conflictlens/rng.hpp"

namespace conflictlens {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("CONFLICTLENS_LOG");
        if (env == nullptr) return 1;
        const std::string v = env;
        if (v == "error") return 0;
        if (v == "debug") return 2;
        return 1;
    }();
    return level;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidConfig("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidConfig("cannot open '" + path + "' for writing");
    out << content;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

}  // namespace

void log_error(const std::string& msg) {
    std::cerr << "[conflictlens] error: " << msg << '\n';
}
void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[conflictlens] " << msg << '\n';
}
void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[conflictlens] debug: " << msg << '\n';
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

std::vector<CriticalEvent> load_events(const std::string& path, const std::string& filter_vru) {
    const std::vector<RawEvent> raw = read_events_csv_file(path);
    std::vector<CriticalEvent> events;
    events.reserve(raw.size());
    for (const auto& r : raw) events.push_back(recode_levels(r, default_recode_map()));
    if (filter_vru == "pedestrian") {
        std::erase_if(events,
                      [](const CriticalEvent& e) { return e.level(kVruType) != "pedestrian"; });
    } else if (filter_vru != "all") {
        throw InvalidConfig("--filter-vru must be 'all' or 'pedestrian'");
    }
    if (events.empty()) throw EmptyDataset("no events after filtering");
    return events;
}

namespace {

// Keeps only columns that vary in the training data (constant indicators
// appear under the pedestrian filter and make the logistic fit singular).
EncodedMatrix drop_constant_columns(const EncodedMatrix& m) {
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        const double first = m.at(0, j);
        bool varies = false;
        for (std::size_t i = 1; i < m.rows && !varies; ++i) varies = m.at(i, j) != first;
        if (varies) keep.push_back(j);
    }
    if (keep.size() == m.cols()) return m;
    EncodedMatrix out;
    out.rows = m.rows;
    for (std::size_t j : keep) out.columns.push_back(m.columns[j]);
    out.values.reserve(m.rows * keep.size());
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j : keep) out.values.push_back(m.at(i, j));
    }
    out.labels = m.labels;
    out.row_weights = m.row_weights;
    out.synthetic = m.synthetic;
    out.baseline_map = m.baseline_map;
    return out;
}

ParamPoint params_from_file(const std::string& path) {
    ParamPoint p;
    if (path.empty()) return p;
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("hyperparameter file is not valid JSON: ") + e.what());
    }
    for (const auto& [k, v] : j.items()) p[k] = v.get<double>();
    return p;
}

json confusion_to_json(const ConfusionMatrix& cm) {
    return {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn},
            {"accuracy", cm.accuracy()}};
}

json prf_to_json(const PrfReport& r) {
    return {{"conflict",
             {{"precision", r.positive.precision},
              {"recall", r.positive.recall},
              {"f1", r.positive.f1}}},
            {"no_conflict",
             {{"precision", r.negative.precision},
              {"recall", r.negative.recall},
              {"f1", r.negative.f1}}},
            {"macro_f1", r.macro_f1}};
}

void write_curve_csv(const std::vector<CurvePoint>& pts, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidConfig("cannot open '" + path + "' for writing");
    out << "threshold,x,y\n";
    for (const auto& p : pts) {
        out << format_double(p.threshold) << ',' << format_double(p.x) << ','
            << format_double(p.y) << '\n';
    }
}

std::string two_threshold_table(const EvaluationOutput& ev) {
    std::ostringstream t;
    t << std::fixed << std::setprecision(3);
    t << "threshold  class        precision  recall  f1     macro_f1\n";
    const auto row = [&](double thr, const PrfReport& r) {
        t << std::left << std::setw(11) << thr << std::setw(13) << "no_conflict"
          << std::setw(11) << r.negative.precision << std::setw(8) << r.negative.recall
          << std::setw(7) << r.negative.f1 << '\n';
        t << std::left << std::setw(11) << "" << std::setw(13) << "conflict" << std::setw(11)
          << r.positive.precision << std::setw(8) << r.positive.recall << std::setw(7)
          << r.positive.f1 << std::setw(8) << r.macro_f1 << '\n';
    };
    row(0.5, ev.prf_default);
    row(ev.threshold_selected, ev.prf_selected);
    return t.str();
}

std::string logit_report_text(const FittedLogit& fit) {
    std::ostringstream t;
    std::size_t name_width = 8;
    for (const auto& term : fit.terms) name_width = std::max(name_width, term.name.size());
    t << std::left << std::setw(static_cast<int>(name_width) + 2) << "variable"
      << std::right << std::setw(12) << "coefficient" << std::setw(12) << "std_error"
      << std::setw(12) << "odds_ratio" << std::setw(10) << "p>|z|" << '\n';
    t << std::fixed << std::setprecision(3);
    for (const auto& term : fit.terms) {
        t << std::left << std::setw(static_cast<int>(name_width) + 2) << term.name
          << std::right << std::setw(12) << term.coefficient << std::setw(12) << term.std_error
          << std::setw(12) << term.odds_ratio << std::setw(10) << term.p_value << '\n';
    }
    t << "mcfadden_r2 " << fit.mcfadden_r2 << '\n';
    t << (fit.converged ? "converged" : "DID NOT CONVERGE") << " after " << fit.iterations
      << " iterations (gradient max-norm " << std::scientific << fit.final_gradient_norm
      << ")\n";
    return t.str();
}

json logit_report_json(const FittedLogit& fit) {
    json terms = json::array();
    for (const auto& t : fit.terms) {
        terms.push_back({{"variable", t.name},
                         {"coefficient", t.coefficient},
                         {"std_error", t.std_error},
                         {"z", t.z},
                         {"p_value", t.p_value},
                         {"odds_ratio", t.odds_ratio}});
    }
    return {{"terms", terms},
            {"log_likelihood", fit.log_likelihood},
            {"null_log_likelihood", fit.null_log_likelihood},
            {"mcfadden_r2", fit.mcfadden_r2},
            {"converged", fit.converged},
            {"iterations", fit.iterations}};
}

std::uint64_t file_content_hash(const std::string& path) {
    return detail::fnv1a64(read_file(path));
}

std::vector<std::uint64_t> row_hashes(const std::vector<CriticalEvent>& events) {
    std::vector<std::uint64_t> hashes;
    hashes.reserve(events.size());
    for (const auto& e : events) {
        std::ostringstream line;
        std::vector<CriticalEvent> one{e};
        write_events_csv(one, line);
        hashes.push_back(detail::fnv1a64(line.str()));
    }
    return hashes;
}

}  // namespace

// ---------------------------------------------------------------------------
// Core steps
// ---------------------------------------------------------------------------

EvaluationOutput evaluate_predictions(const std::vector<std::int8_t>& y,
                                      const std::vector<double>& p,
                                      std::optional<double> fixed_threshold) {
    EvaluationOutput out;
    out.sweep = optimize_threshold(y, p);
    out.threshold_selected = fixed_threshold.value_or(out.sweep.best_threshold);
    out.cm_default = confusion(y, p, 0.5);
    out.cm_selected = confusion(y, p, out.threshold_selected);
    out.prf_default = prf(out.cm_default);
    out.prf_selected = prf(out.cm_selected);
    out.roc = roc_curve(y, p);
    out.pr = pr_curve(y, p);
    return out;
}

Model fit_model(ModelFamily family, const ParamPoint& params, const EncodedMatrix& train_full,
                std::uint64_t seed) {
    Model model;
    model.family = family;
    model.seed = seed;

    EncodedMatrix train = family == ModelFamily::logit
                              ? project_to_baseline_dropped(train_full)
                              : train_full;
    train = drop_constant_columns(train);
    model.columns = train.columns;
    model.feature_means = column_means(train);

    const auto get = [&](const std::string& name, double fallback) {
        const auto it = params.find(name);
        return it == params.end() ? fallback : it->second;
    };

    // Family defaults are the published tuned settings; depth bounds act as
    // caps, the realized trees stay much shallower.
    switch (family) {
        case ModelFamily::logit:
            model.impl = fit_logistic(train, std::nullopt, get("ridge", 1e-8));
            break;
        case ModelFamily::dt: {
            TreeParams tp;
            tp.max_depth = static_cast<int>(get("max_depth", 58));
            tp.min_samples_leaf = static_cast<std::size_t>(get("min_samples_leaf", 5));
            tp.min_samples_split = static_cast<std::size_t>(get("min_samples_split", 9));
            tp.ccp_alpha = get("ccp_alpha", 0.0007);
            model.impl = fit_tree(train, tp);
            break;
        }
        case ModelFamily::rf: {
            ForestParams fp;
            fp.max_depth = static_cast<int>(get("max_depth", 73));
            fp.min_samples_leaf = static_cast<std::size_t>(get("min_samples_leaf", 2));
            fp.min_samples_split = static_cast<std::size_t>(get("min_samples_split", 2));
            fp.n_estimators = static_cast<std::size_t>(get("n_estimators", 155));
            fp.seed = derive_seed(seed, "forest");
            model.impl = fit_forest(train, fp);
            break;
        }
        default: {
            BoostParams bp;
            bp.n_rounds = static_cast<std::size_t>(get("n_rounds", 150));
            bp.learning_rate = get("learning_rate", 0.20);
            bp.max_depth = static_cast<int>(get("max_depth", 11));
            bp.min_child_weight = get("min_child_weight", 2.0);
            bp.gamma = get("gamma", 0.48);
            bp.colsample = get("colsample", 0.59);
            bp.lambda = get("lambda", 1.0);
            bp.seed = derive_seed(seed, "boost");
            model.impl = fit_gbdt(train, bp);
            break;
        }
    }
    return model;
}

EncodedMatrix align_to_model(const Model& model, const EncodedMatrix& data) {
    std::vector<std::size_t> keep;
    keep.reserve(model.columns.size());
    for (const auto& c : model.columns) {
        bool found = false;
        for (std::size_t j = 0; j < data.cols(); ++j) {
            if (data.columns[j].name() == c.name()) {
                keep.push_back(j);
                found = true;
                break;
            }
        }
        if (!found) throw SchemaMismatch("data is missing model column '" + c.name() + "'");
    }
    EncodedMatrix out;
    out.rows = data.rows;
    out.columns = model.columns;
    out.baseline_map = data.baseline_map;
    out.values.reserve(data.rows * keep.size());
    for (std::size_t i = 0; i < data.rows; ++i) {
        for (std::size_t j : keep) out.values.push_back(data.at(i, j));
    }
    out.labels = data.labels;
    out.row_weights = data.row_weights;
    out.synthetic = data.synthetic;
    return out;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int run_generate(const GenerateConfig& cfg) {
    GeneratorConfig gen = cfg.config_path.empty()
                              ? GeneratorConfig::defaults()
                              : GeneratorConfig::from_json(read_file(cfg.config_path));
    gen.seed = cfg.seed;
    const std::vector<CriticalEvent> events = generate_dataset(gen, cfg.n);
    write_events_csv_file(events, cfg.out_path);
    log_info("wrote " + std::to_string(events.size()) + " events to " + cfg.out_path);
    return 0;
}

namespace {

std::uint64_t train_config_hash(const TrainConfig& cfg) {
    std::ostringstream s;
    s << "train|" << family_name(cfg.family) << '|' << balance_name(cfg.balance) << '|'
      << cfg.seed << '|' << cfg.test_fraction << '|' << cfg.smote_k << '|' << cfg.smote_ratio
      << '|' << cfg.filter_vru << '|' << file_content_hash(cfg.data_path);
    if (!cfg.params_path.empty()) s << '|' << detail::fnv1a64(read_file(cfg.params_path));
    return detail::fnv1a64(s.str());
}

struct TrainedArtifacts {
    Model model;
    std::vector<CriticalEvent> train_events;
    std::vector<CriticalEvent> test_events;
    SplitIndices split;
};

TrainedArtifacts train_once(const TrainConfig& cfg) {
    const std::vector<CriticalEvent> events = load_events(cfg.data_path, cfg.filter_vru);
    std::vector<std::int8_t> labels(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!events[i].label.has_value()) {
            throw UnlabeledData("event " + std::to_string(i + 1) +
                                " has no confirmed_conflict label");
        }
        labels[i] = *events[i].label ? 1 : 0;
    }

    TrainedArtifacts out;
    out.split = stratified_split_indices(labels, cfg.test_fraction, derive_seed(cfg.seed, "split"));
    for (std::size_t i : out.split.train) out.train_events.push_back(events[i]);
    for (std::size_t i : out.split.test) out.test_events.push_back(events[i]);

    EncodedMatrix train_full = one_hot_encode(out.train_events, /*drop_baseline=*/false);
    train_full = apply_balance(train_full, cfg.balance, cfg.smote_k, cfg.smote_ratio,
                               derive_seed(cfg.seed, "balance"));
    out.model = fit_model(cfg.family, params_from_file(cfg.params_path), train_full, cfg.seed);
    out.model.config_hash = hex64(train_config_hash(cfg));
    return out;
}

}  // namespace

int run_train(const TrainConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    TrainedArtifacts art = train_once(cfg);

    save_model(art.model, cfg.out_dir + "/model.json");

    json manifest;
    manifest["config_hash"] = art.model.config_hash;
    manifest["seed"] = cfg.seed;
    manifest["train_rows"] = art.split.train;
    manifest["test_rows"] = art.split.test;
    manifest["train_row_hashes"] = row_hashes(art.train_events);
    write_file(cfg.out_dir + "/split_manifest.json", manifest.dump(2) + "\n");
    write_events_csv_file(art.train_events, cfg.out_dir + "/train.csv");
    write_events_csv_file(art.test_events, cfg.out_dir + "/test.csv");

    json report;
    report["config_hash"] = art.model.config_hash;
    report["seed"] = cfg.seed;
    report["family"] = family_name(cfg.family);
    report["balance"] = balance_name(cfg.balance);
    report["n_train"] = art.train_events.size();
    report["n_test"] = art.test_events.size();
    if (const auto* fit = std::get_if<FittedLogit>(&art.model.impl)) {
        report["logit"] = logit_report_json(*fit);
        write_file(cfg.out_dir + "/coefficients.txt", logit_report_text(*fit));
    }
    if (const auto* forest = std::get_if<Forest>(&art.model.impl)) {
        if (forest->oob_error.has_value()) report["oob_error"] = *forest->oob_error;
    }
    write_file(cfg.out_dir + "/train_report.json", report.dump(2) + "\n");
    log_info("model written to " + cfg.out_dir + "/model.json");
    return 0;
}

namespace {

json curve_points_json(const std::vector<CurvePoint>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back({p.threshold, p.x, p.y});
    return arr;
}

json evaluation_to_json(const EvaluationOutput& ev, const std::string& config_hash,
                        std::uint64_t seed) {
    json j;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["threshold_default"] = 0.5;
    j["threshold_selected"] = ev.threshold_selected;
    j["confusion_default"] = confusion_to_json(ev.cm_default);
    j["confusion_selected"] = confusion_to_json(ev.cm_selected);
    j["metrics_default"] = prf_to_json(ev.prf_default);
    j["metrics_selected"] = prf_to_json(ev.prf_selected);
    j["roc_auc"] = {{"conflict", ev.roc.auc_positive},
                    {"no_conflict", ev.roc.auc_negative},
                    {"macro", ev.roc.auc_macro}};
    j["pr_auc"] = {{"conflict", ev.pr.auc_positive},
                   {"no_conflict", ev.pr.auc_negative},
                   {"macro", ev.pr.auc_macro}};
    j["roc_curve"] = {{"conflict", curve_points_json(ev.roc.positive_points)},
                      {"no_conflict", curve_points_json(ev.roc.negative_points)}};
    j["pr_curve"] = {{"conflict", curve_points_json(ev.pr.positive_points)},
                     {"no_conflict", curve_points_json(ev.pr.negative_points)}};
    j["sweep"] = {{"thresholds", ev.sweep.thresholds},
                  {"macro_f1", ev.sweep.macro_f1},
                  {"best_threshold", ev.sweep.best_threshold},
                  {"best_macro_f1", ev.sweep.best_macro_f1}};
    if (ev.leakage_warning) {
        j["leakage_warning"] = true;
        j["leakage_overlap_rows"] = ev.leakage_overlap;
    }
    return j;
}

void write_evaluation_files(const EvaluationOutput& ev, const std::string& out_dir,
                            const std::string& config_hash, std::uint64_t seed) {
    write_file(out_dir + "/evaluation.json", evaluation_to_json(ev, config_hash, seed).dump(2) + "\n");
    std::ostringstream text;
    text << two_threshold_table(ev);
    text << "roc_auc macro " << std::fixed << std::setprecision(3) << ev.roc.auc_macro
         << "  pr_auc macro " << ev.pr.auc_macro << '\n';
    if (ev.leakage_warning) {
        text << "WARNING: " << ev.leakage_overlap
             << " evaluated rows overlap the training split\n";
    }
    write_file(out_dir + "/evaluation.txt", text.str());
    write_curve_csv(ev.roc.positive_points, out_dir + "/roc_conflict.csv");
    write_curve_csv(ev.roc.negative_points, out_dir + "/roc_no_conflict.csv");
    write_curve_csv(ev.pr.positive_points, out_dir + "/pr_conflict.csv");
    write_curve_csv(ev.pr.negative_points, out_dir + "/pr_no_conflict.csv");
    std::ofstream sweep(out_dir + "/threshold_sweep.csv", std::ios::binary);
    sweep << "threshold,macro_f1\n";
    for (std::size_t i = 0; i < ev.sweep.thresholds.size(); ++i) {
        sweep << format_double(ev.sweep.thresholds[i]) << ','
              << format_double(ev.sweep.macro_f1[i]) << '\n';
    }
}

}  // namespace

int run_evaluate(const EvaluateConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const Model model = load_model(cfg.model_path);
    const std::vector<CriticalEvent> events = load_events(cfg.data_path, "all");

    const EncodedMatrix encoded =
        align_to_model(model, one_hot_encode(events, model.drop_baseline()));
    const std::vector<double> p = model.predict_proba(encoded);

    std::vector<std::int8_t> y(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!events[i].label.has_value()) {
            throw UnlabeledData("event " + std::to_string(i + 1) +
                                " has no confirmed_conflict label");
        }
        y[i] = *events[i].label ? 1 : 0;
    }

    EvaluationOutput ev = evaluate_predictions(y, p, cfg.threshold);

    if (!cfg.manifest_path.empty()) {
        json manifest;
        try {
            manifest = json::parse(read_file(cfg.manifest_path));
        } catch (const json::exception& e) {
            throw InvalidConfig(std::string("split manifest is not valid JSON: ") + e.what());
        }
        const auto train_hashes =
            manifest.at("train_row_hashes").get<std::vector<std::uint64_t>>();
        const std::vector<std::uint64_t> eval_hashes = row_hashes(events);
        std::size_t overlap = 0;
        for (std::uint64_t h : eval_hashes) {
            if (std::find(train_hashes.begin(), train_hashes.end(), h) != train_hashes.end()) {
                ++overlap;
            }
        }
        ev.leakage_overlap = overlap;
        ev.leakage_warning = overlap > 0;
        if (ev.leakage_warning) {
            log_info("leakage guard: " + std::to_string(overlap) +
                     " evaluated rows appear in the training split");
        }
    }

    write_evaluation_files(ev, cfg.out_dir, model.config_hash, model.seed);
    log_info("evaluation written to " + cfg.out_dir);
    return 0;
}

int run_tune(const TuneConfig& cfg) {
    const std::vector<CriticalEvent> events = load_events(cfg.data_path, cfg.filter_vru);
    const EncodedMatrix data = one_hot_encode(events, /*drop_baseline=*/false);

    const SearchSpace space = SearchSpace::defaults_for(cfg.family);
    const auto objective = [&](const ParamPoint& p) {
        return cv_objective(data, make_fit_score(cfg.family, p, derive_seed(cfg.seed, "cv-fit")),
                            cfg.cv_folds, cfg.seed, cfg.balance, cfg.smote_k, cfg.smote_ratio);
    };
    const TuneResult result =
        bayes_optimize(space, objective, cfg.n_init, cfg.budget, derive_seed(cfg.seed, "tune"));

    std::ostringstream hash_src;
    hash_src << "tune|" << family_name(cfg.family) << '|' << balance_name(cfg.balance) << '|'
             << cfg.budget << '|' << cfg.n_init << '|' << cfg.cv_folds << '|' << cfg.seed << '|'
             << cfg.smote_k << '|' << cfg.smote_ratio << '|' << cfg.filter_vru << '|'
             << file_content_hash(cfg.data_path);

    json j;
    j["config_hash"] = hex64(detail::fnv1a64(hash_src.str()));
    j["seed"] = cfg.seed;
    j["family"] = family_name(cfg.family);
    j["balance"] = balance_name(cfg.balance);
    j["objective"] = "minority_average_precision_3fold";
    j["best_params"] = result.best_params;
    j["best_objective"] = result.best_objective;
    json history = json::array();
    for (const auto& t : result.history) {
        history.push_back({{"params", t.params}, {"objective", t.objective}});
    }
    j["history"] = history;
    write_file(cfg.out_path, j.dump(2) + "\n");
    log_info("best objective " + std::to_string(result.best_objective) + " written to " +
             cfg.out_path);
    return 0;
}

int run_explain(const ExplainConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const Model model = load_model(cfg.model_path);
    const std::vector<CriticalEvent> events = load_events(cfg.data_path, "all");
    EncodedMatrix encoded = align_to_model(model, one_hot_encode(events, model.drop_baseline()));
    if (encoded.rows > cfg.max_instances) {
        std::vector<std::size_t> rows(cfg.max_instances);
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        encoded = subset_rows(encoded, rows);
    }

    AttributionSet attrs;
    if (const auto* fit = std::get_if<FittedLogit>(&model.impl)) {
        attrs = shap_linear(*fit, encoded, model.feature_means);
    } else if (const auto* tree = std::get_if<Tree>(&model.impl)) {
        attrs = shap_tree_batch(*tree, encoded);
    } else if (const auto* forest = std::get_if<Forest>(&model.impl)) {
        attrs = shap_tree_batch(*forest, encoded);
    } else {
        attrs = shap_tree_batch(std::get<BoostedEnsemble>(model.impl), encoded);
    }

    write_beeswarm_csv(beeswarm_export(attrs), cfg.out_dir + "/beeswarm.csv");
    json j;
    j["config_hash"] = model.config_hash;
    j["seed"] = model.seed;
    j["base_value"] = attrs.base_value;
    j["n_instances"] = attrs.phi.size();
    json features = json::array();
    for (const auto& f : attrs.features) features.push_back(f.name());
    j["features"] = features;
    j["phi"] = attrs.phi;
    write_file(cfg.out_dir + "/attributions.json", j.dump(2) + "\n");
    log_info("attributions written to " + cfg.out_dir);
    return 0;
}

// ---------------------------------------------------------------------------
// Full experiment grid
// ---------------------------------------------------------------------------

namespace {

std::uint64_t pipeline_config_hash(const PipelineConfig& cfg) {
    std::ostringstream s;
    s << "pipeline|" << cfg.seed << '|' << cfg.test_fraction << '|' << cfg.smote_k << '|'
      << cfg.smote_ratio << '|' << cfg.filter_vru << '|'
      << (cfg.threshold.has_value() ? format_double(*cfg.threshold) : std::string("auto"))
      << '|' << file_content_hash(cfg.data_path);
    return detail::fnv1a64(s.str());
}

}  // namespace

int run_pipeline(const PipelineConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const std::string config_hash = hex64(pipeline_config_hash(cfg));

    const std::vector<CriticalEvent> events = load_events(cfg.data_path, cfg.filter_vru);
    std::vector<std::int8_t> labels(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!events[i].label.has_value()) {
            throw UnlabeledData("event " + std::to_string(i + 1) +
                                " has no confirmed_conflict label");
        }
        labels[i] = *events[i].label ? 1 : 0;
    }
    const SplitIndices split =
        stratified_split_indices(labels, cfg.test_fraction, derive_seed(cfg.seed, "split"));
    std::vector<CriticalEvent> train_events, test_events;
    for (std::size_t i : split.train) train_events.push_back(events[i]);
    for (std::size_t i : split.test) test_events.push_back(events[i]);

    const EncodedMatrix train_full = one_hot_encode(train_events, /*drop_baseline=*/false);
    const EncodedMatrix test_full = one_hot_encode(test_events, /*drop_baseline=*/false);
    EncodedMatrix test_dropped = project_to_baseline_dropped(test_full);

    std::vector<std::int8_t> y_test(test_events.size());
    for (std::size_t i = 0; i < test_events.size(); ++i) y_test[i] = *test_events[i].label ? 1 : 0;

    const ModelFamily families[] = {ModelFamily::logit, ModelFamily::dt, ModelFamily::rf,
                                    ModelFamily::gbdt};
    const BalanceMode balances[] = {BalanceMode::none, BalanceMode::weights, BalanceMode::smote};

    json comparison = json::array();
    json failures = json::array();
    std::ostringstream table;
    table << std::left << std::setw(8) << "model" << std::setw(10) << "balance" << std::right
          << std::setw(12) << "macro_f1@.5" << std::setw(14) << "macro_f1@best" << std::setw(8)
          << "thr" << std::setw(12) << "roc_auc" << std::setw(12) << "pr_auc" << '\n';

    for (const ModelFamily family : families) {
        for (const BalanceMode balance : balances) {
            const std::string cell =
                std::string(family_name(family)) + "_" + balance_name(balance);
            const std::string cell_dir = cfg.out_dir + "/" + cell;
            try {
                fs::create_directories(cell_dir);
                const std::uint64_t cell_seed =
                    derive_seed(cfg.seed, std::string("cell-") + cell);
                EncodedMatrix balanced = apply_balance(train_full, balance, cfg.smote_k,
                                                       cfg.smote_ratio, cell_seed);
                Model model = fit_model(family, {}, balanced, cell_seed);
                model.config_hash = config_hash;
                save_model(model, cell_dir + "/model.json");

                const EncodedMatrix aligned = align_to_model(
                    model, family == ModelFamily::logit ? test_dropped : test_full);
                const std::vector<double> p = model.predict_proba(aligned);
                const EvaluationOutput ev = evaluate_predictions(y_test, p, cfg.threshold);
                write_evaluation_files(ev, cell_dir, config_hash, cfg.seed);

                if (family != ModelFamily::logit) {
                    AttributionSet attrs;
                    EncodedMatrix explain_data = aligned;
                    if (explain_data.rows > 200) {
                        std::vector<std::size_t> rows(200);
                        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
                        explain_data = subset_rows(explain_data, rows);
                    }
                    if (const auto* tree = std::get_if<Tree>(&model.impl)) {
                        attrs = shap_tree_batch(*tree, explain_data);
                    } else if (const auto* forest = std::get_if<Forest>(&model.impl)) {
                        attrs = shap_tree_batch(*forest, explain_data);
                    } else {
                        attrs = shap_tree_batch(std::get<BoostedEnsemble>(model.impl),
                                                explain_data);
                    }
                    write_beeswarm_csv(beeswarm_export(attrs), cell_dir + "/beeswarm.csv");
                }

                comparison.push_back({{"model", family_name(family)},
                                      {"balance", balance_name(balance)},
                                      {"macro_f1_default", ev.prf_default.macro_f1},
                                      {"macro_f1_selected", ev.prf_selected.macro_f1},
                                      {"threshold_selected", ev.threshold_selected},
                                      {"roc_auc_macro", ev.roc.auc_macro},
                                      {"pr_auc_macro", ev.pr.auc_macro}});
                table << std::left << std::setw(8) << family_name(family) << std::setw(10)
                      << balance_name(balance) << std::right << std::fixed
                      << std::setprecision(3) << std::setw(12) << ev.prf_default.macro_f1
                      << std::setw(14) << ev.prf_selected.macro_f1 << std::setw(8)
                      << ev.threshold_selected << std::setw(12) << ev.roc.auc_macro
                      << std::setw(12) << ev.pr.auc_macro << '\n';
                log_info("cell " + cell + " done");
            } catch (const std::exception& e) {
                failures.push_back({{"cell", cell}, {"error", e.what()}});
                log_error("cell " + cell + " failed: " + e.what());
            }
        }
    }

    json summary;
    summary["config_hash"] = config_hash;
    summary["seed"] = cfg.seed;
    summary["n_train"] = train_events.size();
    summary["n_test"] = test_events.size();
    summary["cells"] = comparison;
    if (!failures.empty()) summary["failures"] = failures;
    write_file(cfg.out_dir + "/comparison.json", summary.dump(2) + "\n");
    write_file(cfg.out_dir + "/comparison.txt", table.str());

    if (!failures.empty()) {
        write_file(cfg.out_dir + "/failures.json", failures.dump(2) + "\n");
        return 1;
    }
    return 0;
}

}  // namespace conflictlens
