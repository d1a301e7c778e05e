#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace conflictlens {

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

// Categorical variables of a critical event, in canonical order. The first
// level of each variable is the baseline dropped under baseline-dropped
// encoding.
enum CatVar : std::size_t {
    kProximity = 0,
    kVruType,
    kVehicleType,
    kArrivedFirst,
    kVruLocation,
    kVehMovement,
    kNearside,
    kVruMovement,
    kVehSignal,
    kVruSignal,
    kWeather,
    kLighting,
    kNumCatVars,
};

constexpr std::size_t kNumContinuous = 5;  // pet + four speeds

struct VariableSpec {
    std::string name;
    std::vector<std::string> levels;  // levels[0] is the baseline
    bool boolean = false;             // encoded as a single bare-named column
};

// Canonical level sets (and their order) for every categorical variable.
const std::array<VariableSpec, kNumCatVars>& schema();

const std::array<std::string, kNumContinuous>& continuous_names();

// Index of `level` within `var`'s canonical levels; throws UnknownLevel.
std::size_t level_index(CatVar var, const std::string& level);

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

// As read from CSV, before recoding: raw level strings, untouched.
struct RawEvent {
    double pet = 0.0;
    double veh_median_speed = 0.0;
    double veh_conflict_speed = 0.0;
    double vru_median_speed = 0.0;
    double vru_conflict_speed = 0.0;
    std::array<std::string, kNumCatVars> cat;
    std::optional<bool> label;
};

// One observed interaction with canonical categorical levels. cat[v] indexes
// schema()[v].levels.
struct CriticalEvent {
    double pet = 0.0;
    double veh_median_speed = 0.0;
    double veh_conflict_speed = 0.0;
    double vru_median_speed = 0.0;
    double vru_conflict_speed = 0.0;
    std::array<std::uint8_t, kNumCatVars> cat{};
    std::optional<bool> label;

    double continuous(std::size_t i) const;
    void set_continuous(std::size_t i, double v);
    const std::string& level(CatVar var) const;
    void set_level(CatVar var, const std::string& level);
};

// Throws (NonPositivePET, NonFiniteValue, InvalidEvent) when an invariant is
// broken: pet > 0, speeds >= 0 and finite, pedestrian movement/location
// consistency.
void validate(const CriticalEvent& event);

// true iff pet < 3 seconds; throws NonPositivePET for pet <= 0.
bool is_critical(double pet_seconds);

// ---------------------------------------------------------------------------
// Recoding
// ---------------------------------------------------------------------------

struct RecodeRule {
    CatVar variable;
    std::string raw_level;
    std::string canonical_level;
};

// Ordered level-grouping rules; lookup is by (variable, lowercased raw).
class RecodeMap {
public:
    RecodeMap() = default;
    explicit RecodeMap(std::vector<RecodeRule> rules);

    // Canonical level for a raw one; throws UnknownLevel when unmapped.
    const std::string& apply(CatVar var, const std::string& raw) const;

    const std::vector<RecodeRule>& rules() const { return rules_; }

private:
    std::vector<RecodeRule> rules_;
    std::map<std::pair<std::size_t, std::string>, std::string> index_;
};

// The shipped map: heavy-vehicle grouping, precipitation, crosswalk and
// signal-state merges, plus identity rules for every canonical level.
const RecodeMap& default_recode_map();

CriticalEvent recode_levels(const RawEvent& raw, const RecodeMap& map);

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

struct ColumnInfo {
    std::string variable;
    std::string level;  // empty for continuous and boolean columns
    bool continuous = false;

    std::string name() const { return level.empty() ? variable : variable + "." + level; }
};

// Numeric design matrix (row-major) with labels, per-row weights, and the
// metadata needed to decode a row back to categorical levels.
struct EncodedMatrix {
    std::size_t rows = 0;
    std::vector<ColumnInfo> columns;
    std::vector<double> values;             // rows x columns.size()
    std::vector<std::int8_t> labels;        // 0/1, -1 when unscored
    std::vector<double> row_weights;        // default 1
    std::vector<std::uint8_t> synthetic;    // 1 for SMOTE-appended rows
    std::map<std::string, std::string> baseline_map;  // variable -> dropped level

    std::size_t cols() const { return columns.size(); }
    double* row(std::size_t i) { return values.data() + i * cols(); }
    const double* row(std::size_t i) const { return values.data() + i * cols(); }
    double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }

    std::size_t column_index(const std::string& name) const;  // throws DimensionMismatch

    // Throws UnlabeledData when any row lacks a label.
    std::vector<double> labels_as_double() const;
};

// drop_baseline=false: n indicator columns per n-level categorical (tree
// models); drop_baseline=true: the baseline level is dropped (logistic
// model). Binary and boolean variables always contribute one column.
EncodedMatrix one_hot_encode(const std::vector<CriticalEvent>& events, bool drop_baseline);

// Inverse of one_hot_encode for one row.
CriticalEvent decode_event(const EncodedMatrix& m, std::size_t row);

// Keeps the matrix's rows but re-expresses them in the baseline-dropped
// column set (used after SMOTE, which requires the full encoding).
EncodedMatrix project_to_baseline_dropped(const EncodedMatrix& m);

// Copy of the selected rows, preserving column metadata.
EncodedMatrix subset_rows(const EncodedMatrix& m, const std::vector<std::size_t>& rows);

// Per-column means (used for linear explanations and reports).
std::vector<double> column_means(const EncodedMatrix& m);

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Stratified by label; per class, round(n_c * test_fraction) rows go to
// test. Deterministic for a fixed seed; throws DegenerateSplit when a class
// would land entirely in one part.
SplitIndices stratified_split_indices(const std::vector<std::int8_t>& labels,
                                      double test_fraction, std::uint64_t seed);

std::pair<std::vector<CriticalEvent>, std::vector<CriticalEvent>> stratified_split(
    const std::vector<CriticalEvent>& events, double test_fraction, std::uint64_t seed);

}  // namespace conflictlens
