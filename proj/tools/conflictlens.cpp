// conflictlens — CLI for the conflict-classification pipeline:
// generate synthetic critical events, train/tune/evaluate classifiers,
// export Shapley attributions, or run the full model-by-balance grid.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "conflictlens/pipeline.hpp"

namespace {

std::optional<double> parse_threshold(const std::string& value) {
    if (value == "auto") return std::nullopt;
    try {
        const double t = std::stod(value);
        if (t < 0.0 || t > 1.0) throw std::out_of_range("threshold");
        return t;
    } catch (const std::exception&) {
        throw CLI::ValidationError("--threshold must be 'auto' or a value in [0, 1]");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conflictlens: classify low-PET critical events as confirmed conflicts"};
    app.require_subcommand(1);

    conflictlens::GenerateConfig gen;
    auto* generate = app.add_subcommand("generate", "write a synthetic event CSV");
    generate->add_option("--n", gen.n, "number of events")->required();
    generate->add_option("--seed", gen.seed, "random seed")->required();
    generate->add_option("--config", gen.config_path, "generator config JSON");
    generate->add_option("--out", gen.out_path, "output CSV path")->required();

    conflictlens::TrainConfig train;
    std::string train_model = "gbdt", train_balance = "none";
    auto* train_cmd = app.add_subcommand("train", "fit one model on an 80/20 split");
    train_cmd->add_option("--data", train.data_path, "labeled event CSV")->required();
    train_cmd->add_option("--model", train_model, "logit|dt|rf|gbdt");
    train_cmd->add_option("--balance", train_balance, "none|weights|smote");
    train_cmd->add_option("--seed", train.seed, "random seed")->required();
    train_cmd->add_option("--test-fraction", train.test_fraction, "held-out fraction");
    train_cmd->add_option("--smote-k", train.smote_k, "SMOTE-NC neighbours");
    train_cmd->add_option("--smote-ratio", train.smote_ratio, "target minority/majority ratio");
    train_cmd->add_option("--params", train.params_path, "hyperparameter JSON");
    train_cmd->add_option("--filter-vru", train.filter_vru, "all|pedestrian");
    train_cmd->add_option("--out", train.out_dir, "output directory")->required();

    conflictlens::EvaluateConfig eval;
    std::string eval_threshold = "auto";
    auto* eval_cmd = app.add_subcommand("evaluate", "score a model on labeled data");
    eval_cmd->add_option("--model-file", eval.model_path, "model JSON")->required();
    eval_cmd->add_option("--data", eval.data_path, "labeled event CSV")->required();
    eval_cmd->add_option("--threshold", eval_threshold, "auto or fixed value");
    eval_cmd->add_option("--manifest", eval.manifest_path, "split manifest for leakage check");
    eval_cmd->add_option("--out", eval.out_dir, "output directory")->required();

    conflictlens::TuneConfig tune;
    std::string tune_model = "gbdt", tune_balance = "smote";
    auto* tune_cmd = app.add_subcommand("tune", "Bayesian hyperparameter search");
    tune_cmd->add_option("--data", tune.data_path, "labeled event CSV")->required();
    tune_cmd->add_option("--model", tune_model, "dt|rf|gbdt|logit");
    tune_cmd->add_option("--balance", tune_balance, "none|weights|smote");
    tune_cmd->add_option("--budget", tune.budget, "total trials");
    tune_cmd->add_option("--n-init", tune.n_init, "initial design size");
    tune_cmd->add_option("--seed", tune.seed, "random seed")->required();
    tune_cmd->add_option("--smote-k", tune.smote_k, "SMOTE-NC neighbours");
    tune_cmd->add_option("--smote-ratio", tune.smote_ratio, "target minority/majority ratio");
    tune_cmd->add_option("--filter-vru", tune.filter_vru, "all|pedestrian");
    tune_cmd->add_option("--out", tune.out_path, "trials JSON path")->required();

    conflictlens::ExplainConfig explain;
    auto* explain_cmd = app.add_subcommand("explain", "Shapley attributions + bee-swarm export");
    explain_cmd->add_option("--model-file", explain.model_path, "model JSON")->required();
    explain_cmd->add_option("--data", explain.data_path, "event CSV")->required();
    explain_cmd->add_option("--max-instances", explain.max_instances, "explain at most N rows");
    explain_cmd->add_option("--out", explain.out_dir, "output directory")->required();

    conflictlens::PipelineConfig pipe;
    std::string pipe_threshold = "auto";
    auto* pipe_cmd = app.add_subcommand("pipeline", "full model-by-balance grid");
    pipe_cmd->add_option("--data", pipe.data_path, "labeled event CSV")->required();
    pipe_cmd->add_option("--seed", pipe.seed, "random seed")->required();
    pipe_cmd->add_option("--test-fraction", pipe.test_fraction, "held-out fraction");
    pipe_cmd->add_option("--smote-k", pipe.smote_k, "SMOTE-NC neighbours");
    pipe_cmd->add_option("--smote-ratio", pipe.smote_ratio, "target minority/majority ratio");
    pipe_cmd->add_option("--threshold", pipe_threshold, "auto or fixed value");
    pipe_cmd->add_option("--filter-vru", pipe.filter_vru, "all|pedestrian");
    pipe_cmd->add_option("--out", pipe.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return conflictlens::run_generate(gen);
        if (train_cmd->parsed()) {
            train.family = conflictlens::family_from_name(train_model);
            train.balance = conflictlens::balance_from_name(train_balance);
            return conflictlens::run_train(train);
        }
        if (eval_cmd->parsed()) {
            eval.threshold = parse_threshold(eval_threshold);
            return conflictlens::run_evaluate(eval);
        }
        if (tune_cmd->parsed()) {
            tune.family = conflictlens::family_from_name(tune_model);
            tune.balance = conflictlens::balance_from_name(tune_balance);
            return conflictlens::run_tune(tune);
        }
        if (explain_cmd->parsed()) return conflictlens::run_explain(explain);
        if (pipe_cmd->parsed()) {
            pipe.threshold = parse_threshold(pipe_threshold);
            return conflictlens::run_pipeline(pipe);
        }
    } catch (const std::exception& e) {
        conflictlens::log_error(e.what());
        return 1;
    }
    return 0;
}
