#pragma once

#include "jonesq/measure.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>

namespace jonesq {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

/// CSV with header `x1,...,xd,w` and one atom per row.
DiscreteMeasure read_measure_csv(std::istream& in);
void write_measure_csv(std::ostream& out, const DiscreteMeasure& measure);

/// JSON `{ "dim": d, "points": [[...], ...], "weights": [...] }`.
DiscreteMeasure measure_from_json(const nlohmann::json& j);
nlohmann::json measure_to_json(const DiscreteMeasure& measure);

/// Dispatches on the file extension (.csv or .json).
DiscreteMeasure load_measure(const std::string& path);
void save_measure(const std::string& path, const DiscreteMeasure& measure);

}  // namespace jonesq
