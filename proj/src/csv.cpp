#include "conflictlens/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "conflictlens/errors.hpp"

namespace conflictlens {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (quoted) {
            if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

double parse_double(const std::string& s, const std::string& column, std::size_t line_no) {
    double v = 0.0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw CsvError("line " + std::to_string(line_no) + ": column '" + column +
                       "' has non-numeric value '" + s + "'");
    }
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<RawEvent> read_events_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw CsvError("empty input: header row required");
    const std::vector<std::string> header = split_line(line);

    // column name -> handler slot
    std::map<std::string, int> known;  // 0..4 continuous, 100+v categorical, -1 label
    for (std::size_t i = 0; i < kNumContinuous; ++i) {
        known[continuous_names()[i]] = static_cast<int>(i);
    }
    for (std::size_t v = 0; v < kNumCatVars; ++v) {
        known[schema()[v].name] = 100 + static_cast<int>(v);
    }
    known["confirmed_conflict"] = -1;

    std::vector<int> slots(header.size());
    std::vector<std::string> unknown;
    std::map<std::string, bool> seen;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto it = known.find(header[i]);
        if (it == known.end()) {
            unknown.push_back(header[i]);
            continue;
        }
        if (seen[header[i]]) throw CsvError("duplicate column '" + header[i] + "'");
        seen[header[i]] = true;
        slots[i] = it->second;
    }
    if (!unknown.empty()) {
        std::string msg = "unknown columns:";
        for (const auto& u : unknown) msg += " '" + u + "'";
        throw CsvError(msg);
    }
    for (const auto& [name, slot] : known) {
        if (slot != -1 && !seen[name]) throw CsvError("missing required column '" + name + "'");
    }

    std::vector<RawEvent> events;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != header.size()) {
            throw CsvError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()));
        }
        RawEvent e;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const int slot = slots[i];
            if (slot == -1) {
                const std::string& s = fields[i];
                if (s.empty()) continue;
                if (s == "1") {
                    e.label = true;
                } else if (s == "0") {
                    e.label = false;
                } else {
                    throw CsvError("line " + std::to_string(line_no) +
                                   ": confirmed_conflict must be 0, 1, or empty, got '" + s + "'");
                }
            } else if (slot < 100) {
                const double v = parse_double(fields[i], header[i], line_no);
                switch (slot) {
                    case 0: e.pet = v; break;
                    case 1: e.veh_median_speed = v; break;
                    case 2: e.veh_conflict_speed = v; break;
                    case 3: e.vru_median_speed = v; break;
                    default: e.vru_conflict_speed = v; break;
                }
            } else {
                e.cat[static_cast<std::size_t>(slot - 100)] = fields[i];
            }
        }
        events.push_back(std::move(e));
    }
    return events;
}

std::vector<RawEvent> read_events_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open '" + path + "'");
    return read_events_csv(in);
}

void write_events_csv(const std::vector<CriticalEvent>& events, std::ostream& out) {
    for (std::size_t i = 0; i < kNumContinuous; ++i) {
        if (i) out << ',';
        out << continuous_names()[i];
    }
    for (std::size_t v = 0; v < kNumCatVars; ++v) out << ',' << schema()[v].name;
    out << ",confirmed_conflict\n";
    for (const auto& e : events) {
        for (std::size_t i = 0; i < kNumContinuous; ++i) {
            if (i) out << ',';
            out << format_double(e.continuous(i));
        }
        for (std::size_t v = 0; v < kNumCatVars; ++v) {
            out << ',' << e.level(static_cast<CatVar>(v));
        }
        out << ',';
        if (e.label.has_value()) out << (*e.label ? '1' : '0');
        out << '\n';
    }
}

void write_events_csv_file(const std::vector<CriticalEvent>& events, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CsvError("cannot open '" + path + "' for writing");
    write_events_csv(events, out);
}

}  // namespace conflictlens
