#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "conflictlens/csv.hpp"
#include "conflictlens/errors.hpp"
#include "conflictlens/synth.hpp"

using namespace conflictlens;

TEST_CASE("n = 0 yields an empty sequence") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.seed = 1;
    CHECK(generate_dataset(cfg, 0).empty());
}

TEST_CASE("malformed marginals are rejected") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.categorical_marginals[kWeather] = {0.5, 0.2, 0.2, 0.2};  // sums to 1.1
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);

    cfg = GeneratorConfig::defaults();
    cfg.categorical_marginals[kWeather] = {0.5, 0.5};  // wrong arity
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);

    cfg = GeneratorConfig::defaults();
    cfg.base_rate = 1.5;
    CHECK_THROWS_AS(generate_dataset(cfg, 10), InvalidConfig);
}

TEST_CASE("intercept calibration: closed-form cases") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.ground_truth.clear();  // all coefficients zero

    const double b_half = calibrate_intercept(cfg, 0.5, 11);
    CHECK(std::abs(b_half) <= 0.01);

    const double b_rare = calibrate_intercept(cfg, 0.0605, 11);
    CHECK(std::abs(b_rare - std::log(0.0605 / 0.9395)) <= 0.02);
}

TEST_CASE("intercept calibration under the default coefficients hits the base rate") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.seed = 5;
    const auto events = generate_dataset(cfg, 100000);
    std::size_t positives = 0;
    for (const auto& e : events) positives += *e.label ? 1 : 0;
    const double rate = static_cast<double>(positives) / static_cast<double>(events.size());
    CHECK(rate == doctest::Approx(0.0605).epsilon(0.005 / 0.0605));
}

TEST_CASE("unreachable base rate raises NoRoot") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.ground_truth.clear();
    CHECK_THROWS_AS(calibrate_intercept(cfg, 1e-9, 3), NoRoot);
}

TEST_CASE("marginals converge on the configured values") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.seed = 17;
    const std::size_t n = 100000;
    const auto events = generate_dataset(cfg, n);

    std::size_t pedestrians = 0;
    for (const auto& e : events) pedestrians += e.level(kVruType) == "pedestrian" ? 1 : 0;
    CHECK(static_cast<double>(pedestrians) / n == doctest::Approx(0.8013).epsilon(0.01 / 0.8013));

    // three-sigma binomial bound per level; vru_location and vru_movement are
    // excluded because the pedestrian coercion intentionally shifts them
    for (CatVar v : {kProximity, kVruType, kVehicleType, kArrivedFirst, kVehMovement,
                     kNearside, kVehSignal, kVruSignal, kWeather, kLighting}) {
        const auto& levels = schema()[v].levels;
        std::vector<std::size_t> counts(levels.size(), 0);
        for (const auto& e : events) ++counts[e.cat[v]];
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const double p = cfg.categorical_marginals[v][l];
            const double bound = 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
            const double observed = static_cast<double>(counts[l]) / static_cast<double>(n);
            CHECK(std::abs(observed - p) <= bound);
        }
    }
}

TEST_CASE("generated events satisfy the schema invariants") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.seed = 23;
    for (const auto& e : generate_dataset(cfg, 20000)) {
        CHECK(e.pet > 0.0);
        CHECK(e.pet < 3.0);
        CHECK(e.veh_median_speed >= 0.0);
        CHECK(e.vru_conflict_speed >= 0.0);
        if (e.level(kVruType) == "pedestrian") {
            CHECK(e.level(kVruMovement) == "crosswalk");
            CHECK(e.level(kVruLocation) != "travel_lane");
        }
    }
}

TEST_CASE("speed means match the configured gammas") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.seed = 29;
    const auto events = generate_dataset(cfg, 100000);
    double vm = 0.0, vc = 0.0, um = 0.0, uc = 0.0;
    for (const auto& e : events) {
        vm += e.veh_median_speed;
        vc += e.veh_conflict_speed;
        um += e.vru_median_speed;
        uc += e.vru_conflict_speed;
    }
    const double n = static_cast<double>(events.size());
    CHECK(vm / n == doctest::Approx(13.3).epsilon(0.02));
    CHECK(vc / n == doctest::Approx(14.4).epsilon(0.02));
    CHECK(um / n == doctest::Approx(4.6).epsilon(0.02));
    CHECK(uc / n == doctest::Approx(5.3).epsilon(0.02));
}

TEST_CASE("fixed seed means byte-identical csv") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.seed = 31;
    std::ostringstream a, b;
    write_events_csv(generate_dataset(cfg, 500), a);
    write_events_csv(generate_dataset(cfg, 500), b);
    CHECK(a.str() == b.str());

    cfg.seed = 32;
    std::ostringstream c;
    write_events_csv(generate_dataset(cfg, 500), c);
    CHECK(a.str() != c.str());
}

TEST_CASE("config json round trip") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.base_rate = 0.1;
    cfg.interactions.push_back({"pet", "proximity.low", -1.5});
    cfg.seed = 9;
    const GeneratorConfig back = GeneratorConfig::from_json(cfg.to_json());
    CHECK(back.base_rate == cfg.base_rate);
    CHECK(back.seed == cfg.seed);
    REQUIRE(back.interactions.size() == 1);
    CHECK(back.interactions[0].b == "proximity.low");
    CHECK(back.categorical_marginals[kWeather] == cfg.categorical_marginals[kWeather]);
    CHECK(back.ground_truth == cfg.ground_truth);

    CHECK_THROWS_AS(GeneratorConfig::from_json("{nope"), InvalidConfig);
}
