#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conflictlens/eval.hpp"
#include "conflictlens/models.hpp"
#include "conflictlens/synth.hpp"
#include "conflictlens/tune.hpp"

namespace conflictlens {

// Severity-filtered stderr logging, controlled by CONFLICTLENS_LOG
// (error, info, debug).
void log_info(const std::string& msg);
void log_debug(const std::string& msg);
void log_error(const std::string& msg);

struct TrainConfig {
    std::string data_path;
    ModelFamily family = ModelFamily::gbdt;
    BalanceMode balance = BalanceMode::none;
    std::uint64_t seed = 0;
    double test_fraction = 0.2;
    std::size_t smote_k = 5;
    double smote_ratio = 1.0;
    std::string params_path;          // optional hyperparameter JSON
    std::string filter_vru = "all";   // all | pedestrian
    std::string out_dir;
};

struct EvaluateConfig {
    std::string model_path;
    std::string data_path;
    std::optional<double> threshold;  // nullopt -> optimize macro F1
    std::string manifest_path;        // optional; enables the leakage guard
    std::string out_dir;
};

struct TuneConfig {
    std::string data_path;
    ModelFamily family = ModelFamily::gbdt;
    BalanceMode balance = BalanceMode::smote;
    std::size_t budget = 50;
    std::size_t n_init = 10;
    std::size_t cv_folds = 3;
    std::uint64_t seed = 0;
    std::size_t smote_k = 5;
    double smote_ratio = 1.0;
    std::string filter_vru = "all";
    std::string out_path;  // trials JSON
};

struct ExplainConfig {
    std::string model_path;
    std::string data_path;
    std::size_t max_instances = 200;
    std::string out_dir;
};

struct PipelineConfig {
    std::string data_path;
    std::uint64_t seed = 0;
    double test_fraction = 0.2;
    std::size_t smote_k = 5;
    double smote_ratio = 1.0;
    std::optional<double> threshold;  // nullopt -> optimize per cell
    std::string filter_vru = "all";
    std::string out_dir;
};

struct GenerateConfig {
    std::size_t n = 1470;
    std::uint64_t seed = 0;
    std::string config_path;  // optional GeneratorConfig JSON
    std::string out_path;
};

// Everything run_evaluate computes; also reused by the pipeline grid.
struct EvaluationOutput {
    ConfusionMatrix cm_default;            // threshold 0.50
    ConfusionMatrix cm_selected;           // optimized or fixed threshold
    PrfReport prf_default;
    PrfReport prf_selected;
    double threshold_selected = 0.5;
    CurveResult roc;
    CurveResult pr;
    ThresholdSweep sweep;
    bool leakage_warning = false;
    std::size_t leakage_overlap = 0;
};

EvaluationOutput evaluate_predictions(const std::vector<std::int8_t>& y,
                                      const std::vector<double>& p,
                                      std::optional<double> fixed_threshold);

// Shared dataset plumbing: CSV -> recode -> optional pedestrian filter.
std::vector<CriticalEvent> load_events(const std::string& path, const std::string& filter_vru);

// Drops training-constant columns and fits the requested family; the model
// records the surviving column set and training means.
Model fit_model(ModelFamily family, const ParamPoint& params, const EncodedMatrix& train_full,
                std::uint64_t seed);

// Re-expresses `data` in the model's column set (by name); throws
// SchemaMismatch when a required column is missing.
EncodedMatrix align_to_model(const Model& model, const EncodedMatrix& data_full_or_dropped);

// Subcommand entry points; each returns a process exit code and writes its
// artifacts under the configured output location.
int run_generate(const GenerateConfig& cfg);
int run_train(const TrainConfig& cfg);
int run_evaluate(const EvaluateConfig& cfg);
int run_tune(const TuneConfig& cfg);
int run_explain(const ExplainConfig& cfg);
int run_pipeline(const PipelineConfig& cfg);

}  // namespace conflictlens
