#include "conflictlens/models.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "conflictlens/errors.hpp"

namespace conflictlens {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json tree_to_json(const Tree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.cover, n.value, n.count0,
                         n.count1});
    }
    return {{"n_features", tree.n_features}, {"nodes", nodes}};
}

Tree tree_from_json(const json& j) {
    Tree tree;
    tree.n_features = j.at("n_features").get<std::size_t>();
    for (const auto& e : j.at("nodes")) {
        TreeNode n;
        n.feature = e.at(0).get<int>();
        n.threshold = e.at(1).get<double>();
        n.left = e.at(2).get<int>();
        n.right = e.at(3).get<int>();
        n.cover = e.at(4).get<double>();
        n.value = e.at(5).get<double>();
        n.count0 = e.at(6).get<double>();
        n.count1 = e.at(7).get<double>();
        tree.nodes.push_back(n);
    }
    return tree;
}

}  // namespace

const char* family_name(ModelFamily family) {
    switch (family) {
        case ModelFamily::logit: return "logit";
        case ModelFamily::dt: return "dt";
        case ModelFamily::rf: return "rf";
        default: return "gbdt";
    }
}

ModelFamily family_from_name(const std::string& name) {
    if (name == "logit") return ModelFamily::logit;
    if (name == "dt") return ModelFamily::dt;
    if (name == "rf") return ModelFamily::rf;
    if (name == "gbdt") return ModelFamily::gbdt;
    throw InvalidConfig("unknown model family '" + name + "'");
}

double Model::predict_proba(std::span<const double> x) const {
    return std::visit([&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FittedLogit>) {
            return m.predict_proba(x);
        } else {
            return conflictlens::predict_proba(m, x);
        }
    }, impl);
}

std::vector<double> Model::predict_proba(const EncodedMatrix& m) const {
    if (m.columns.size() != columns.size()) {
        throw SchemaMismatch("data has " + std::to_string(m.columns.size()) +
                             " columns, model expects " + std::to_string(columns.size()));
    }
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (m.columns[j].name() != columns[j].name()) {
            throw SchemaMismatch("column " + std::to_string(j) + " is '" +
                                 m.columns[j].name() + "', model expects '" +
                                 columns[j].name() + "'");
        }
    }
    std::vector<double> out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        out[i] = predict_proba(std::span<const double>{m.row(i), m.cols()});
    }
    return out;
}

std::string model_to_json(const Model& model) {
    json j;
    j["format_version"] = kFormatVersion;
    j["family"] = family_name(model.family);
    j["seed"] = model.seed;
    j["config_hash"] = model.config_hash;
    json cols = json::array();
    for (const auto& c : model.columns) {
        cols.push_back({{"variable", c.variable}, {"level", c.level}, {"continuous", c.continuous}});
    }
    j["columns"] = cols;
    j["feature_means"] = model.feature_means;

    if (const auto* logit = std::get_if<FittedLogit>(&model.impl)) {
        j["model"] = {{"coefficients", logit->coefficients},
                      {"covariance", logit->covariance},
                      {"log_likelihood", logit->log_likelihood},
                      {"null_log_likelihood", logit->null_log_likelihood},
                      {"mcfadden_r2", logit->mcfadden_r2},
                      {"converged", logit->converged},
                      {"iterations", logit->iterations},
                      {"final_gradient_norm", logit->final_gradient_norm}};
    } else if (const auto* tree = std::get_if<Tree>(&model.impl)) {
        j["model"] = tree_to_json(*tree);
    } else if (const auto* forest = std::get_if<Forest>(&model.impl)) {
        json trees = json::array();
        for (const auto& t : forest->trees) trees.push_back(tree_to_json(t));
        j["model"] = {{"n_features", forest->n_features}, {"trees", trees}};
        if (forest->oob_error.has_value()) j["model"]["oob_error"] = *forest->oob_error;
    } else if (const auto* boosted = std::get_if<BoostedEnsemble>(&model.impl)) {
        json trees = json::array();
        for (const auto& t : boosted->trees) trees.push_back(tree_to_json(t));
        j["model"] = {{"n_features", boosted->n_features},
                      {"base_score", boosted->base_score},
                      {"learning_rate", boosted->learning_rate},
                      {"trees", trees}};
    }
    return j.dump(2);
}

Model model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("model file is not valid JSON: ") + e.what());
    }
    if (j.at("format_version").get<int>() != kFormatVersion) {
        throw InvalidConfig("unsupported model format version");
    }

    Model model;
    model.family = family_from_name(j.at("family").get<std::string>());
    model.seed = j.value("seed", 0ull);
    model.config_hash = j.value("config_hash", "");
    for (const auto& c : j.at("columns")) {
        model.columns.push_back({c.at("variable").get<std::string>(),
                                 c.at("level").get<std::string>(),
                                 c.at("continuous").get<bool>()});
    }
    model.feature_means = j.value("feature_means", std::vector<double>{});

    const json& m = j.at("model");
    switch (model.family) {
        case ModelFamily::logit: {
            FittedLogit fit;
            fit.coefficients = m.at("coefficients").get<std::vector<double>>();
            fit.covariance = m.at("covariance").get<std::vector<double>>();
            fit.log_likelihood = m.at("log_likelihood").get<double>();
            fit.null_log_likelihood = m.at("null_log_likelihood").get<double>();
            fit.mcfadden_r2 = m.at("mcfadden_r2").get<double>();
            fit.converged = m.at("converged").get<bool>();
            fit.iterations = m.at("iterations").get<int>();
            fit.final_gradient_norm = m.at("final_gradient_norm").get<double>();
            fit.columns = model.columns;
            const std::size_t p = fit.coefficients.size();
            fit.terms.resize(p);
            for (std::size_t k = 0; k < p; ++k) {
                LogitTerm& t = fit.terms[k];
                t.name = k == 0 ? "intercept" : model.columns[k - 1].name();
                t.coefficient = fit.coefficients[k];
                t.std_error = std::sqrt(std::max(0.0, fit.covariance[k * p + k]));
                t.z = t.std_error > 0.0 ? t.coefficient / t.std_error : 0.0;
                t.p_value = wald_p_value(t.z);
                t.odds_ratio = std::exp(t.coefficient);
            }
            model.impl = std::move(fit);
            break;
        }
        case ModelFamily::dt:
            model.impl = tree_from_json(m);
            break;
        case ModelFamily::rf: {
            Forest forest;
            forest.n_features = m.at("n_features").get<std::size_t>();
            for (const auto& t : m.at("trees")) forest.trees.push_back(tree_from_json(t));
            if (m.contains("oob_error")) forest.oob_error = m["oob_error"].get<double>();
            model.impl = std::move(forest);
            break;
        }
        default: {
            BoostedEnsemble boosted;
            boosted.n_features = m.at("n_features").get<std::size_t>();
            boosted.base_score = m.at("base_score").get<double>();
            boosted.learning_rate = m.at("learning_rate").get<double>();
            for (const auto& t : m.at("trees")) boosted.trees.push_back(tree_from_json(t));
            model.impl = std::move(boosted);
            break;
        }
    }
    return model;
}

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidConfig("cannot open '" + path + "' for writing");
    out << model_to_json(model) << '\n';
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidConfig("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace conflictlens
