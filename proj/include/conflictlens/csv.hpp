#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "conflictlens/event_model.hpp"

namespace conflictlens {

// Canonical CSV layout: header required, UTF-8, "." decimal separator, one
// row per event. Columns are the schema field names in canonical order; the
// label column is `confirmed_conflict` with values 0/1 or empty. Unknown
// columns are rejected with a diagnostic listing them.

std::vector<RawEvent> read_events_csv(std::istream& in);
std::vector<RawEvent> read_events_csv_file(const std::string& path);

void write_events_csv(const std::vector<CriticalEvent>& events, std::ostream& out);
void write_events_csv_file(const std::vector<CriticalEvent>& events, const std::string& path);

// Shortest round-trip formatting (std::to_chars), so a written value parses
// back to the identical double.
std::string format_double(double v);

}  // namespace conflictlens
