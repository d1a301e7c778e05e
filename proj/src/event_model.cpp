#include "conflictlens/event_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "conflictlens/errors.hpp"
#include "conflictlens/rng.hpp"

namespace conflictlens {

const std::array<VariableSpec, kNumCatVars>& schema() {
    static const std::array<VariableSpec, kNumCatVars> vars = {{
        {"proximity", {"high", "low"}, false},
        {"vru_type", {"bicycle", "pedestrian"}, false},
        {"vehicle_type", {"car", "bicycle", "bus", "motorcycle"}, false},
        {"arrived_first", {"pedestrian", "bicycle", "bus", "car", "motorcycle"}, false},
        {"vru_location", {"crosswalk", "curb", "sidewalk", "travel_lane"}, false},
        {"veh_movement", {"left_turn", "through", "right_turn"}, false},
        {"nearside", {"no", "yes"}, true},
        {"vru_movement", {"crosswalk", "through", "left_turn", "right_turn"}, false},
        {"veh_signal", {"green", "red"}, false},
        {"vru_signal", {"green", "red"}, false},
        {"weather", {"clear", "sunny", "precipitation", "overcast"}, false},
        {"lighting",
         {"daylight", "twilight", "dark_no_streetlights", "dark_with_streetlights", "evening"},
         false},
    }};
    return vars;
}

const std::array<std::string, kNumContinuous>& continuous_names() {
    static const std::array<std::string, kNumContinuous> names = {
        "pet", "veh_median_speed", "veh_conflict_speed", "vru_median_speed",
        "vru_conflict_speed"};
    return names;
}

std::size_t level_index(CatVar var, const std::string& level) {
    const auto& levels = schema()[var].levels;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] == level) return i;
    }
    throw UnknownLevel("variable '" + schema()[var].name + "' has no level '" + level + "'");
}

double CriticalEvent::continuous(std::size_t i) const {
    switch (i) {
        case 0: return pet;
        case 1: return veh_median_speed;
        case 2: return veh_conflict_speed;
        case 3: return vru_median_speed;
        default: return vru_conflict_speed;
    }
}

void CriticalEvent::set_continuous(std::size_t i, double v) {
    switch (i) {
        case 0: pet = v; break;
        case 1: veh_median_speed = v; break;
        case 2: veh_conflict_speed = v; break;
        case 3: vru_median_speed = v; break;
        default: vru_conflict_speed = v; break;
    }
}

const std::string& CriticalEvent::level(CatVar var) const {
    return schema()[var].levels[cat[var]];
}

void CriticalEvent::set_level(CatVar var, const std::string& level) {
    cat[var] = static_cast<std::uint8_t>(level_index(var, level));
}

void validate(const CriticalEvent& e) {
    if (!std::isfinite(e.pet)) throw NonFiniteValue("pet is not finite");
    if (e.pet <= 0.0) throw NonPositivePET("pet must be > 0");
    for (std::size_t i = 1; i < kNumContinuous; ++i) {
        const double v = e.continuous(i);
        if (!std::isfinite(v)) throw NonFiniteValue(continuous_names()[i] + " is not finite");
        if (v < 0.0) throw InvalidEvent(continuous_names()[i] + " must be >= 0");
    }
    for (std::size_t v = 0; v < kNumCatVars; ++v) {
        if (e.cat[v] >= schema()[v].levels.size()) {
            throw InvalidEvent("level index out of range for " + schema()[v].name);
        }
    }
    if (e.level(kVruType) == "pedestrian") {
        if (e.level(kVruMovement) != "crosswalk") {
            throw InvalidEvent("pedestrian events must have vru_movement=crosswalk");
        }
        if (e.level(kVruLocation) == "travel_lane") {
            throw InvalidEvent("pedestrian events cannot have vru_location=travel_lane");
        }
    }
}

bool is_critical(double pet_seconds) {
    if (!(pet_seconds > 0.0)) throw NonPositivePET("pet must be > 0");
    return pet_seconds < 3.0;
}

// ---------------------------------------------------------------------------
// Recoding
// ---------------------------------------------------------------------------

RecodeMap::RecodeMap(std::vector<RecodeRule> rules) : rules_(std::move(rules)) {
    for (const auto& r : rules_) {
        level_index(r.variable, r.canonical_level);  // canonical side must be valid
        const auto key = std::make_pair(static_cast<std::size_t>(r.variable), r.raw_level);
        auto [it, inserted] = index_.emplace(key, r.canonical_level);
        if (!inserted && it->second != r.canonical_level) {
            throw InvalidEvent("conflicting recode rules for '" + r.raw_level + "'");
        }
    }
}

const std::string& RecodeMap::apply(CatVar var, const std::string& raw) const {
    const auto it = index_.find({static_cast<std::size_t>(var), raw});
    if (it == index_.end()) {
        throw UnknownLevel("variable '" + schema()[var].name + "' has no rule for level '" +
                           raw + "'");
    }
    return it->second;
}

const RecodeMap& default_recode_map() {
    static const RecodeMap map = [] {
        std::vector<RecodeRule> rules;
        // Identity rules over the canonical vocabulary.
        for (std::size_t v = 0; v < kNumCatVars; ++v) {
            for (const auto& level : schema()[v].levels) {
                rules.push_back({static_cast<CatVar>(v), level, level});
            }
        }
        // Heavy vehicles fold into "bus"; motorcycle stays separate.
        for (CatVar v : {kVehicleType, kArrivedFirst}) {
            for (const char* raw : {"articulated truck", "box truck", "single-unit truck",
                                    "pickup truck", "work-van"}) {
                rules.push_back({v, raw, "bus"});
            }
        }
        // Weather: rain and snow fold into "precipitation".
        rules.push_back({kWeather, "rain", "precipitation"});
        rules.push_back({kWeather, "snow", "precipitation"});
        // VRU location: crosswalk variants collapse.
        for (const char* raw : {"in crosswalk", "out of crosswalk", "near crosswalk"}) {
            rules.push_back({kVruLocation, raw, "crosswalk"});
        }
        rules.push_back({kVruLocation, "travel lane", "travel_lane"});
        // Signal states merge into green/red for both road users.
        for (CatVar v : {kVehSignal, kVruSignal}) {
            for (const char* raw : {"green ball", "green arrow", "yellow ball", "yellow arrow"}) {
                rules.push_back({v, raw, "green"});
            }
            rules.push_back({v, "red ball", "red"});
        }
        rules.push_back({kVruSignal, "walk", "green"});
        rules.push_back({kVruSignal, "do not walk", "red"});
        // Movements and lighting as space-separated raw text.
        for (CatVar v : {kVehMovement, kVruMovement}) {
            rules.push_back({v, "left turn", "left_turn"});
            rules.push_back({v, "right turn", "right_turn"});
        }
        rules.push_back({kLighting, "dark no streetlights", "dark_no_streetlights"});
        rules.push_back({kLighting, "dark with streetlights", "dark_with_streetlights"});
        // Nearside comes in as yes/no or a boolean literal.
        rules.push_back({kNearside, "true", "yes"});
        rules.push_back({kNearside, "false", "no"});
        rules.push_back({kNearside, "1", "yes"});
        rules.push_back({kNearside, "0", "no"});
        return RecodeMap(std::move(rules));
    }();
    return map;
}

namespace {

std::string lowercase(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

}  // namespace

CriticalEvent recode_levels(const RawEvent& raw, const RecodeMap& map) {
    CriticalEvent e;
    e.pet = raw.pet;
    e.veh_median_speed = raw.veh_median_speed;
    e.veh_conflict_speed = raw.veh_conflict_speed;
    e.vru_median_speed = raw.vru_median_speed;
    e.vru_conflict_speed = raw.vru_conflict_speed;
    e.label = raw.label;
    for (std::size_t i = 0; i < kNumContinuous; ++i) {
        if (!std::isfinite(e.continuous(i))) {
            throw NonFiniteValue(continuous_names()[i] + " is not finite");
        }
    }
    for (std::size_t v = 0; v < kNumCatVars; ++v) {
        const auto var = static_cast<CatVar>(v);
        e.set_level(var, map.apply(var, lowercase(raw.cat[v])));
    }
    validate(e);
    return e;
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

std::size_t EncodedMatrix::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].name() == name) return j;
    }
    throw DimensionMismatch("no column named '" + name + "'");
}

std::vector<double> EncodedMatrix::labels_as_double() const {
    std::vector<double> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw UnlabeledData("row " + std::to_string(i) + " has no label");
        y[i] = static_cast<double>(labels[i]);
    }
    return y;
}

EncodedMatrix one_hot_encode(const std::vector<CriticalEvent>& events, bool drop_baseline) {
    if (events.empty()) throw EmptyDataset("one_hot_encode requires at least one event");

    EncodedMatrix m;
    for (const auto& name : continuous_names()) m.columns.push_back({name, "", true});
    for (std::size_t v = 0; v < kNumCatVars; ++v) {
        const auto& spec = schema()[v];
        if (spec.boolean) {
            // single bare-named presence column; baseline is the "absent" level
            m.columns.push_back({spec.name, "", false});
            m.baseline_map[spec.name] = spec.levels[0];
        } else if (spec.levels.size() == 2) {
            m.columns.push_back({spec.name, spec.levels[1], false});
            m.baseline_map[spec.name] = spec.levels[0];
        } else {
            const std::size_t first = drop_baseline ? 1 : 0;
            for (std::size_t l = first; l < spec.levels.size(); ++l) {
                m.columns.push_back({spec.name, spec.levels[l], false});
            }
            if (drop_baseline) m.baseline_map[spec.name] = spec.levels[0];
        }
    }

    m.rows = events.size();
    m.values.assign(m.rows * m.cols(), 0.0);
    m.labels.assign(m.rows, -1);
    m.row_weights.assign(m.rows, 1.0);
    m.synthetic.assign(m.rows, 0);

    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        double* row = m.row(i);
        std::size_t j = 0;
        for (std::size_t c = 0; c < kNumContinuous; ++c) row[j++] = e.continuous(c);
        for (std::size_t v = 0; v < kNumCatVars; ++v) {
            const auto& spec = schema()[v];
            if (spec.boolean || spec.levels.size() == 2) {
                row[j++] = e.cat[v] == 1 ? 1.0 : 0.0;
            } else {
                const std::size_t first = drop_baseline ? 1 : 0;
                for (std::size_t l = first; l < spec.levels.size(); ++l) {
                    row[j++] = e.cat[v] == l ? 1.0 : 0.0;
                }
            }
        }
        if (e.label.has_value()) m.labels[i] = *e.label ? 1 : 0;
    }
    return m;
}

CriticalEvent decode_event(const EncodedMatrix& m, std::size_t row) {
    CriticalEvent e;
    const double* r = m.row(row);
    std::size_t j = 0;
    for (; j < kNumContinuous; ++j) e.set_continuous(j, r[j]);
    for (std::size_t v = 0; v < kNumCatVars; ++v) {
        const auto& spec = schema()[v];
        std::optional<std::size_t> hit;
        while (j < m.cols() && m.columns[j].variable == spec.name) {
            if (r[j] != 0.0) {
                const std::string& level = spec.boolean ? "yes" : m.columns[j].level;
                hit = level_index(static_cast<CatVar>(v), level);
            }
            ++j;
        }
        if (hit.has_value()) {
            e.cat[v] = static_cast<std::uint8_t>(*hit);
        } else {
            const auto it = m.baseline_map.find(spec.name);
            if (it == m.baseline_map.end()) {
                throw InvalidEvent("row " + std::to_string(row) + " has no level for " +
                                   spec.name + " and no baseline is recorded");
            }
            e.cat[v] = static_cast<std::uint8_t>(level_index(static_cast<CatVar>(v), it->second));
        }
    }
    if (row < m.labels.size() && m.labels[row] >= 0) e.label = m.labels[row] == 1;
    return e;
}

EncodedMatrix project_to_baseline_dropped(const EncodedMatrix& m) {
    EncodedMatrix out;
    std::vector<std::size_t> keep;
    for (const auto& name : continuous_names()) out.columns.push_back({name, "", true});
    for (std::size_t j = 0; j < kNumContinuous; ++j) keep.push_back(j);
    for (std::size_t v = 0; v < kNumCatVars; ++v) {
        const auto& spec = schema()[v];
        for (std::size_t l = 1; l < spec.levels.size(); ++l) {
            ColumnInfo info{spec.name, spec.boolean ? "" : spec.levels[l], false};
            keep.push_back(m.column_index(info.name()));
            out.columns.push_back(info);
        }
        out.baseline_map[spec.name] = spec.levels[0];
    }
    out.rows = m.rows;
    out.values.reserve(out.rows * out.cols());
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j : keep) out.values.push_back(m.at(i, j));
    }
    out.labels = m.labels;
    out.row_weights = m.row_weights;
    out.synthetic = m.synthetic;
    return out;
}

EncodedMatrix subset_rows(const EncodedMatrix& m, const std::vector<std::size_t>& rows) {
    EncodedMatrix out;
    out.columns = m.columns;
    out.baseline_map = m.baseline_map;
    out.rows = rows.size();
    out.values.reserve(rows.size() * m.cols());
    for (std::size_t i : rows) {
        out.values.insert(out.values.end(), m.row(i), m.row(i) + m.cols());
        out.labels.push_back(m.labels[i]);
        out.row_weights.push_back(m.row_weights[i]);
        out.synthetic.push_back(m.synthetic[i]);
    }
    return out;
}

std::vector<double> column_means(const EncodedMatrix& m) {
    std::vector<double> means(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) means[j] += r[j];
    }
    for (double& v : means) v /= static_cast<double>(m.rows);
    return means;
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

SplitIndices stratified_split_indices(const std::vector<std::int8_t>& labels,
                                      double test_fraction, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw UnlabeledData("row " + std::to_string(i) + " has no label");
        (labels[i] == 1 ? pos : neg).push_back(i);
    }
    if (pos.empty() || neg.empty()) {
        throw SingleClass("stratified split requires both label classes");
    }

    Rng rng(seed);
    SplitIndices out;
    for (auto* cls : {&neg, &pos}) {
        rng.shuffle(*cls);
        const auto n_test = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(cls->size())));
        if (n_test == 0 || n_test == cls->size()) {
            throw DegenerateSplit("a label class would land entirely in one part");
        }
        out.test.insert(out.test.end(), cls->begin(), cls->begin() + n_test);
        out.train.insert(out.train.end(), cls->begin() + n_test, cls->end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::pair<std::vector<CriticalEvent>, std::vector<CriticalEvent>> stratified_split(
    const std::vector<CriticalEvent>& events, double test_fraction, std::uint64_t seed) {
    std::vector<std::int8_t> labels(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!events[i].label.has_value()) {
            throw UnlabeledData("event " + std::to_string(i) + " has no label");
        }
        labels[i] = *events[i].label ? 1 : 0;
    }
    const SplitIndices idx = stratified_split_indices(labels, test_fraction, seed);
    std::pair<std::vector<CriticalEvent>, std::vector<CriticalEvent>> out;
    for (std::size_t i : idx.train) out.first.push_back(events[i]);
    for (std::size_t i : idx.test) out.second.push_back(events[i]);
    return out;
}

}  // namespace conflictlens
