#include "conflictlens/synth.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "conflictlens/errors.hpp"
#include "conflictlens/kernels.hpp"
#include "conflictlens/rng.hpp"

namespace conflictlens {

namespace {

using nlohmann::json;

std::vector<double> normalized(std::vector<double> p) {
    double total = 0.0;
    for (double v : p) total += v;
    for (double& v : p) v /= total;
    return p;
}

}  // namespace

GeneratorConfig GeneratorConfig::defaults() {
    GeneratorConfig c;
    // Combined-dataset level shares, normalized so each variable sums to 1.
    // Proximity has no published distribution; a uniform default is used and
    // the intercept calibration absorbs the choice.
    c.categorical_marginals[kProximity] = {0.5, 0.5};
    c.categorical_marginals[kVruType] = normalized({0.1987, 0.8013});
    c.categorical_marginals[kVehicleType] = normalized({0.9034, 0.0122, 0.0796, 0.0048});
    c.categorical_marginals[kArrivedFirst] =
        normalized({0.2565, 0.0769, 0.0456, 0.6190, 0.0020});
    c.categorical_marginals[kVruLocation] = normalized({0.7020, 0.1871, 0.0054, 0.1054});
    c.categorical_marginals[kVehMovement] = normalized({0.2762, 0.3293, 0.3946});
    c.categorical_marginals[kNearside] = normalized({0.3585, 0.6415});
    c.categorical_marginals[kVruMovement] = normalized({0.9034, 0.0537, 0.0259, 0.0170});
    c.categorical_marginals[kVehSignal] = normalized({0.9490, 0.0510});
    c.categorical_marginals[kVruSignal] = normalized({0.3898, 0.6102});
    c.categorical_marginals[kWeather] = normalized({0.5075, 0.3279, 0.0408, 0.1238});
    c.categorical_marginals[kLighting] =
        normalized({0.8381, 0.0197, 0.0061, 0.0891, 0.0469});

    // Gamma scales hit the reported mean speeds (mph) at shape 4.
    c.speed_params[0] = {4.0, 13.3 / 4.0};  // veh_median_speed
    c.speed_params[1] = {4.0, 14.4 / 4.0};  // veh_conflict_speed
    c.speed_params[2] = {4.0, 4.6 / 4.0};   // vru_median_speed
    c.speed_params[3] = {4.0, 5.3 / 4.0};   // vru_conflict_speed

    c.ground_truth = {
        {"pet", -1.042},          {"vru_conflict_speed", 0.163},
        {"proximity.low", -1.277}, {"vru_signal.red", 1.185},
        {"veh_movement.through", -1.132},
    };
    return c;
}

void GeneratorConfig::validate() const {
    for (std::size_t v = 0; v < kNumCatVars; ++v) {
        const auto& p = categorical_marginals[v];
        if (p.size() != schema()[v].levels.size()) {
            throw InvalidConfig("marginals for " + schema()[v].name + " must have " +
                                std::to_string(schema()[v].levels.size()) + " entries");
        }
        double total = 0.0;
        for (double x : p) {
            if (!(x >= 0.0) || !std::isfinite(x)) {
                throw InvalidConfig("negative or non-finite marginal for " + schema()[v].name);
            }
            total += x;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw InvalidConfig("marginals for " + schema()[v].name + " must sum to 1");
        }
    }
    if (std::abs(pet_mixture.weights[0] + pet_mixture.weights[1] - 1.0) > 1e-9) {
        throw InvalidConfig("pet mixture weights must sum to 1");
    }
    for (double sd : pet_mixture.sds) {
        if (!(sd > 0.0)) throw InvalidConfig("pet mixture sds must be positive");
    }
    for (const auto& g : speed_params) {
        if (!(g.shape > 0.0) || !(g.scale > 0.0)) {
            throw InvalidConfig("gamma parameters must be positive");
        }
    }
    if (!(base_rate > 0.0) || !(base_rate < 1.0)) {
        throw InvalidConfig("base_rate must lie in (0, 1)");
    }
}

namespace {

// Covariates only; the label is decided by the caller.
CriticalEvent sample_covariates(const GeneratorConfig& cfg, Rng& rng) {
    CriticalEvent e;
    for (std::size_t v = 0; v < kNumCatVars; ++v) {
        e.cat[v] = static_cast<std::uint8_t>(rng.categorical(cfg.categorical_marginals[v]));
    }
    // Pedestrians move along the crosswalk and never stand in the travel lane.
    if (e.level(kVruType) == "pedestrian") {
        e.set_level(kVruMovement, "crosswalk");
        if (e.level(kVruLocation) == "travel_lane") {
            std::vector<double> p = cfg.categorical_marginals[kVruLocation];
            p[level_index(kVruLocation, "travel_lane")] = 0.0;
            e.cat[kVruLocation] = static_cast<std::uint8_t>(rng.categorical(p));
        }
    }
    const auto& mix = cfg.pet_mixture;
    const std::size_t comp = rng.bernoulli(mix.weights[0]) ? 0 : 1;
    e.pet = rng.truncated_normal(mix.means[comp], mix.sds[comp], 0.0, 3.0);
    e.veh_median_speed = rng.gamma(cfg.speed_params[0].shape, cfg.speed_params[0].scale);
    e.veh_conflict_speed = rng.gamma(cfg.speed_params[1].shape, cfg.speed_params[1].scale);
    e.vru_median_speed = rng.gamma(cfg.speed_params[2].shape, cfg.speed_params[2].scale);
    e.vru_conflict_speed = rng.gamma(cfg.speed_params[3].shape, cfg.speed_params[3].scale);
    return e;
}

// Linear score of the ground-truth model, excluding the intercept.
struct GroundTruthScorer {
    std::vector<std::pair<std::size_t, double>> linear;  // column -> coefficient
    std::vector<std::tuple<std::size_t, std::size_t, double>> products;

    GroundTruthScorer(const GeneratorConfig& cfg, const EncodedMatrix& proto) {
        for (const auto& [name, coef] : cfg.ground_truth) {
            if (name == "intercept") continue;
            linear.emplace_back(proto.column_index(name), coef);
        }
        for (const auto& term : cfg.interactions) {
            products.emplace_back(proto.column_index(term.a), proto.column_index(term.b),
                                  term.coefficient);
        }
    }

    double operator()(const double* row) const {
        double s = 0.0;
        for (const auto& [j, c] : linear) s += c * row[j];
        for (const auto& [a, b, c] : products) s += c * row[a] * row[b];
        return s;
    }
};

double intercept_for(const std::vector<double>& scores, double base_rate) {
    double lo = -15.0, hi = 15.0;
    auto mean_prob = [&](double b0) {
        double total = 0.0;
        for (double s : scores) total += kernels::sigmoid1(b0 + s);
        return total / static_cast<double>(scores.size());
    };
    const double flo = mean_prob(lo) - base_rate;
    const double fhi = mean_prob(hi) - base_rate;
    if (flo > 0.0 || fhi < 0.0) {
        throw NoRoot("base_rate " + std::to_string(base_rate) + " unreachable in [-15, 15]");
    }
    // bisect to bracket exhaustion; comfortably inside the +-0.002 contract
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (mean_prob(mid) < base_rate) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double calibrate_intercept(const GeneratorConfig& config, double base_rate, std::uint64_t seed,
                           std::size_t n_samples) {
    if (!(base_rate > 0.0) || !(base_rate < 1.0)) {
        throw InvalidConfig("base_rate must lie in (0, 1)");
    }
    config.validate();
    Rng rng(seed);
    std::vector<CriticalEvent> sample;
    sample.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) sample.push_back(sample_covariates(config, rng));
    const EncodedMatrix enc = one_hot_encode(sample, /*drop_baseline=*/true);
    const GroundTruthScorer scorer(config, enc);
    std::vector<double> scores(enc.rows);
    for (std::size_t i = 0; i < enc.rows; ++i) scores[i] = scorer(enc.row(i));
    return intercept_for(scores, base_rate);
}

std::vector<CriticalEvent> generate_dataset(const GeneratorConfig& config, std::size_t n) {
    config.validate();
    std::vector<CriticalEvent> events;
    if (n == 0) return events;

    double intercept;
    if (const auto it = config.ground_truth.find("intercept"); it != config.ground_truth.end()) {
        intercept = it->second;
    } else {
        intercept = calibrate_intercept(config, config.base_rate,
                                        derive_seed(config.seed, "calibrate"));
    }

    Rng rng(derive_seed(config.seed, "events"));
    events.reserve(n);
    for (std::size_t i = 0; i < n; ++i) events.push_back(sample_covariates(config, rng));

    const EncodedMatrix enc = one_hot_encode(events, /*drop_baseline=*/true);
    const GroundTruthScorer scorer(config, enc);
    Rng label_rng(derive_seed(config.seed, "labels"));
    for (std::size_t i = 0; i < n; ++i) {
        const double p = kernels::sigmoid1(intercept + scorer(enc.row(i)));
        events[i].label = label_rng.bernoulli(p);
    }
    return events;
}

// ---------------------------------------------------------------------------
// JSON round-trip for the CLI --config flag
// ---------------------------------------------------------------------------

std::string GeneratorConfig::to_json() const {
    json j;
    for (std::size_t v = 0; v < kNumCatVars; ++v) {
        json obj;
        for (std::size_t l = 0; l < schema()[v].levels.size(); ++l) {
            obj[schema()[v].levels[l]] = categorical_marginals[v][l];
        }
        j["categorical_marginals"][schema()[v].name] = obj;
    }
    j["pet_mixture"] = {{"weights", pet_mixture.weights},
                        {"means", pet_mixture.means},
                        {"sds", pet_mixture.sds}};
    const std::array<std::string, 4> speed_names = {
        "veh_median_speed", "veh_conflict_speed", "vru_median_speed", "vru_conflict_speed"};
    for (std::size_t i = 0; i < 4; ++i) {
        j["speed_params"][speed_names[i]] = {{"shape", speed_params[i].shape},
                                             {"scale", speed_params[i].scale}};
    }
    j["ground_truth"] = ground_truth;
    for (const auto& t : interactions) {
        j["interactions"].push_back({{"a", t.a}, {"b", t.b}, {"coefficient", t.coefficient}});
    }
    j["base_rate"] = base_rate;
    j["seed"] = seed;
    return j.dump(2);
}

GeneratorConfig GeneratorConfig::from_json(const std::string& text) {
    GeneratorConfig c = defaults();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        if (j.contains("categorical_marginals")) {
            for (std::size_t v = 0; v < kNumCatVars; ++v) {
                const auto& spec = schema()[v];
                if (!j["categorical_marginals"].contains(spec.name)) continue;
                const auto& obj = j["categorical_marginals"][spec.name];
                std::vector<double> p(spec.levels.size(), 0.0);
                for (const auto& [level, value] : obj.items()) {
                    p[level_index(static_cast<CatVar>(v), level)] = value.get<double>();
                }
                c.categorical_marginals[v] = p;
            }
        }
        if (j.contains("pet_mixture")) {
            const auto& m = j["pet_mixture"];
            c.pet_mixture.weights = m.at("weights").get<std::array<double, 2>>();
            c.pet_mixture.means = m.at("means").get<std::array<double, 2>>();
            c.pet_mixture.sds = m.at("sds").get<std::array<double, 2>>();
        }
        if (j.contains("speed_params")) {
            const std::array<std::string, 4> speed_names = {
                "veh_median_speed", "veh_conflict_speed", "vru_median_speed",
                "vru_conflict_speed"};
            for (std::size_t i = 0; i < 4; ++i) {
                if (!j["speed_params"].contains(speed_names[i])) continue;
                const auto& g = j["speed_params"][speed_names[i]];
                c.speed_params[i] = {g.at("shape").get<double>(), g.at("scale").get<double>()};
            }
        }
        if (j.contains("ground_truth")) {
            c.ground_truth = j["ground_truth"].get<std::map<std::string, double>>();
        }
        if (j.contains("interactions")) {
            c.interactions.clear();
            for (const auto& t : j["interactions"]) {
                c.interactions.push_back({t.at("a").get<std::string>(),
                                          t.at("b").get<std::string>(),
                                          t.at("coefficient").get<double>()});
            }
        }
        if (j.contains("base_rate")) c.base_rate = j["base_rate"].get<double>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("malformed generator config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace conflictlens
