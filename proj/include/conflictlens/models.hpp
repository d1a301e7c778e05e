#pragma once

#include <string>
#include <variant>
#include <vector>

#include "conflictlens/event_model.hpp"
#include "conflictlens/logit.hpp"
#include "conflictlens/trees.hpp"

namespace conflictlens {

enum class ModelFamily { logit, dt, rf, gbdt };

const char* family_name(ModelFamily family);
ModelFamily family_from_name(const std::string& name);

// A fitted model of any family plus the metadata needed to score new data:
// the design-matrix column set it was trained on and the training feature
// means (used by the linear explainer and reports).
struct Model {
    ModelFamily family = ModelFamily::logit;
    std::variant<FittedLogit, Tree, Forest, BoostedEnsemble> impl;
    std::vector<ColumnInfo> columns;
    std::vector<double> feature_means;
    std::uint64_t seed = 0;
    std::string config_hash;

    bool drop_baseline() const { return family == ModelFamily::logit; }

    double predict_proba(std::span<const double> x) const;
    // Throws SchemaMismatch when the matrix columns differ from training.
    std::vector<double> predict_proba(const EncodedMatrix& m) const;
};

// Versioned JSON document; doubles use shortest round-trip formatting, so a
// reload reproduces the model bit-exactly.
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace conflictlens
