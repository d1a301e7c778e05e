#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "conflictlens/csv.hpp"
#include "conflictlens/errors.hpp"
#include "conflictlens/event_model.hpp"
#include "conflictlens/rng.hpp"
#include "conflictlens/synth.hpp"

using namespace conflictlens;

namespace {

RawEvent base_raw() {
    RawEvent r;
    r.pet = 1.5;
    r.veh_median_speed = 12.0;
    r.veh_conflict_speed = 14.0;
    r.vru_median_speed = 4.0;
    r.vru_conflict_speed = 5.0;
    r.cat[kProximity] = "low";
    r.cat[kVruType] = "pedestrian";
    r.cat[kVehicleType] = "car";
    r.cat[kArrivedFirst] = "car";
    r.cat[kVruLocation] = "crosswalk";
    r.cat[kVehMovement] = "through";
    r.cat[kNearside] = "yes";
    r.cat[kVruMovement] = "crosswalk";
    r.cat[kVehSignal] = "green";
    r.cat[kVruSignal] = "red";
    r.cat[kWeather] = "clear";
    r.cat[kLighting] = "daylight";
    r.label = false;
    return r;
}

std::vector<CriticalEvent> sample_events(std::size_t n, std::uint64_t seed) {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.seed = seed;
    return generate_dataset(cfg, n);
}

}  // namespace

TEST_CASE("recode merges the documented raw levels") {
    RawEvent r = base_raw();
    r.cat[kWeather] = "rain";
    CHECK(recode_levels(r, default_recode_map()).level(kWeather) == "precipitation");

    r = base_raw();
    r.cat[kVruSignal] = "do not walk";
    CHECK(recode_levels(r, default_recode_map()).level(kVruSignal) == "red");

    r = base_raw();
    r.cat[kVehicleType] = "car";
    CHECK(recode_levels(r, default_recode_map()).level(kVehicleType) == "car");

    r = base_raw();
    r.cat[kVehicleType] = "Box Truck";  // case-insensitive
    CHECK(recode_levels(r, default_recode_map()).level(kVehicleType) == "bus");

    r = base_raw();
    r.cat[kVruLocation] = "near crosswalk";
    CHECK(recode_levels(r, default_recode_map()).level(kVruLocation) == "crosswalk");
}

TEST_CASE("recode rejects unknown levels and bad continuous values") {
    RawEvent r = base_raw();
    r.cat[kWeather] = "hail";
    CHECK_THROWS_AS(recode_levels(r, default_recode_map()), UnknownLevel);

    r = base_raw();
    r.pet = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(recode_levels(r, default_recode_map()), NonFiniteValue);

    r = base_raw();
    r.pet = -1.0;
    CHECK_THROWS_AS(recode_levels(r, default_recode_map()), NonPositivePET);
}

TEST_CASE("recoding is idempotent") {
    Rng rng(5);
    for (const auto& e : sample_events(50, 99)) {
        RawEvent back;
        back.pet = e.pet;
        back.veh_median_speed = e.veh_median_speed;
        back.veh_conflict_speed = e.veh_conflict_speed;
        back.vru_median_speed = e.vru_median_speed;
        back.vru_conflict_speed = e.vru_conflict_speed;
        for (std::size_t v = 0; v < kNumCatVars; ++v) {
            back.cat[v] = e.level(static_cast<CatVar>(v));
        }
        back.label = e.label;
        const CriticalEvent again = recode_levels(back, default_recode_map());
        CHECK(again.cat == e.cat);
        CHECK(again.pet == e.pet);
    }
}

TEST_CASE("is_critical boundary") {
    CHECK(is_critical(2.9));
    CHECK_FALSE(is_critical(3.0));
    CHECK(is_critical(0.5));
    CHECK_THROWS_AS(is_critical(0.0), NonPositivePET);
    CHECK_THROWS_AS(is_critical(-2.0), NonPositivePET);
}

TEST_CASE("pedestrian invariant is enforced") {
    RawEvent r = base_raw();
    r.cat[kVruType] = "pedestrian";
    r.cat[kVruMovement] = "left turn";
    CHECK_THROWS_AS(recode_levels(r, default_recode_map()), InvalidEvent);

    r = base_raw();
    r.cat[kVruLocation] = "travel lane";
    CHECK_THROWS_AS(recode_levels(r, default_recode_map()), InvalidEvent);
}

TEST_CASE("one-hot encoding: full and baseline-dropped widths") {
    const auto events = sample_events(20, 4);
    const EncodedMatrix full = one_hot_encode(events, false);
    const EncodedMatrix dropped = one_hot_encode(events, true);

    // 5 continuous + 29 multi-level indicators + 5 binary columns
    CHECK(full.cols() == 5 + 29 + 5);
    // multi-level variables lose one column each
    CHECK(dropped.cols() == full.cols() - 7);

    const CriticalEvent& e = events[0];
    const std::size_t j = full.column_index("veh_movement." + e.level(kVehMovement));
    CHECK(full.at(0, j) == 1.0);

    // indicator block of each variable sums to one per row in the full encoding
    for (std::size_t i = 0; i < full.rows; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < full.cols(); ++c) {
            if (full.columns[c].variable == "veh_movement") s += full.at(i, c);
        }
        CHECK(s == 1.0);
    }
    CHECK(dropped.baseline_map.at("veh_movement") == "left_turn");
    CHECK(dropped.baseline_map.at("weather") == "clear");
    CHECK(dropped.baseline_map.at("proximity") == "high");
}

TEST_CASE("single event example from the indicator definition") {
    auto events = sample_events(1, 8);
    events[0].set_level(kVehMovement, "through");
    const EncodedMatrix full = one_hot_encode(events, false);
    CHECK(full.at(0, full.column_index("veh_movement.through")) == 1.0);
    CHECK(full.at(0, full.column_index("veh_movement.left_turn")) == 0.0);
    CHECK(full.at(0, full.column_index("veh_movement.right_turn")) == 0.0);

    const EncodedMatrix dropped = one_hot_encode(events, true);
    CHECK_THROWS_AS(dropped.column_index("veh_movement.left_turn"), DimensionMismatch);
    CHECK(dropped.at(0, dropped.column_index("veh_movement.through")) == 1.0);
    CHECK(dropped.at(0, dropped.column_index("veh_movement.right_turn")) == 0.0);
}

TEST_CASE("decode(encode(x)) round-trips, both encodings") {
    const auto events = sample_events(20, 21);
    for (bool drop : {false, true}) {
        const EncodedMatrix m = one_hot_encode(events, drop);
        for (std::size_t i = 0; i < m.rows; ++i) {
            const CriticalEvent back = decode_event(m, i);
            CHECK(back.cat == events[i].cat);
            CHECK(back.pet == events[i].pet);
            CHECK(back.vru_conflict_speed == events[i].vru_conflict_speed);
            CHECK(back.label == events[i].label);
        }
    }
}

TEST_CASE("projection to the baseline-dropped column set") {
    const auto events = sample_events(30, 33);
    const EncodedMatrix full = one_hot_encode(events, false);
    const EncodedMatrix projected = project_to_baseline_dropped(full);
    const EncodedMatrix direct = one_hot_encode(events, true);
    REQUIRE(projected.cols() == direct.cols());
    for (std::size_t j = 0; j < projected.cols(); ++j) {
        CHECK(projected.columns[j].name() == direct.columns[j].name());
    }
    CHECK(projected.values == direct.values);
}

TEST_CASE("empty dataset is rejected") {
    CHECK_THROWS_AS(one_hot_encode({}, false), EmptyDataset);
}

TEST_CASE("stratified split: proportions, determinism, partition") {
    auto events = sample_events(200, 60);
    for (std::size_t i = 0; i < events.size(); ++i) events[i].label = i < 40;

    const auto [train, test] = stratified_split(events, 0.2, 77);
    CHECK(train.size() + test.size() == events.size());
    std::size_t test_pos = 0;
    for (const auto& e : test) test_pos += *e.label ? 1 : 0;
    CHECK(test_pos == 8);  // round(40 * 0.2)
    CHECK(test.size() == 40);

    const auto [train2, test2] = stratified_split(events, 0.2, 77);
    CHECK(train2.size() == train.size());
    for (std::size_t i = 0; i < test.size(); ++i) CHECK(test2[i].cat == test[i].cat);

    std::vector<std::int8_t> labels(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) labels[i] = *events[i].label ? 1 : 0;
    const SplitIndices idx = stratified_split_indices(labels, 0.2, 77);
    std::set<std::size_t> seen(idx.train.begin(), idx.train.end());
    for (std::size_t i : idx.test) CHECK(seen.insert(i).second);
    CHECK(seen.size() == events.size());
}

TEST_CASE("stratified split: tiny exact case and degenerate errors") {
    auto events = sample_events(10, 3);
    for (std::size_t i = 0; i < events.size(); ++i) events[i].label = i < 5;
    const auto [train, test] = stratified_split(events, 0.2, 1);
    std::size_t pos = 0, neg = 0;
    for (const auto& e : test) (*e.label ? pos : neg)++;
    CHECK(pos == 1);
    CHECK(neg == 1);

    // a class whose test share rounds to zero
    auto few = sample_events(30, 9);
    for (std::size_t i = 0; i < few.size(); ++i) few[i].label = i < 2;
    CHECK_THROWS_AS(stratified_split(few, 0.2, 5), DegenerateSplit);
}

TEST_CASE("expected positives for the documented 1470/89 shape") {
    // 89 positives at fraction 0.2 -> round(17.8) = 18 test positives
    std::vector<std::int8_t> labels(1470, 0);
    for (std::size_t i = 0; i < 89; ++i) labels[i] = 1;
    const SplitIndices idx = stratified_split_indices(labels, 0.2, 123);
    std::size_t test_pos = 0;
    for (std::size_t i : idx.test) test_pos += labels[i] == 1 ? 1 : 0;
    CHECK((test_pos == 17 || test_pos == 18));
    CHECK(test_pos == 18);
}

TEST_CASE("csv round trip and diagnostics") {
    const auto events = sample_events(25, 14);
    std::ostringstream out;
    write_events_csv(events, out);

    std::istringstream in(out.str());
    const std::vector<RawEvent> raw = read_events_csv(in);
    REQUIRE(raw.size() == events.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const CriticalEvent again = recode_levels(raw[i], default_recode_map());
        CHECK(again.cat == events[i].cat);
        CHECK(again.pet == events[i].pet);  // exact: shortest round-trip formatting
        CHECK(again.label == events[i].label);
    }

    std::istringstream unknown("pet,mystery\n1.0,2.0\n");
    try {
        read_events_csv(unknown);
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(std::string(e.what()).find("mystery") != std::string::npos);
    }

    std::istringstream missing("pet,veh_median_speed\n1.0,2.0\n");
    CHECK_THROWS_AS(read_events_csv(missing), CsvError);
}
