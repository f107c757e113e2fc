#include "jonesq/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace jonesq {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("double formatting failed");
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& field, std::size_t line) {
  std::size_t a = field.find_first_not_of(" \t\r");
  std::size_t b = field.find_last_not_of(" \t\r");
  if (a == std::string::npos) throw std::runtime_error("empty field on line " + std::to_string(line));
  const std::string s = field.substr(a, b - a + 1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("malformed number '" + s + "' on line " + std::to_string(line));
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

DiscreteMeasure read_measure_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("missing CSV header");
  const auto cols = split_csv(header);
  if (cols.size() < 2) throw std::runtime_error("CSV header needs at least one coordinate and w");
  const std::size_t d = cols.size() - 1;
  std::vector<double> coords;
  std::vector<double> weights;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != d + 1)
      throw std::runtime_error("line " + std::to_string(lineno) + " has " +
                               std::to_string(cells.size()) + " fields, expected " +
                               std::to_string(d + 1));
    for (std::size_t k = 0; k < d; ++k) coords.push_back(parse_double(cells[k], lineno));
    weights.push_back(parse_double(cells[d], lineno));
  }
  const auto m = static_cast<Eigen::Index>(weights.size());
  Matrix p = Eigen::Map<const Matrix>(coords.data(), static_cast<Eigen::Index>(d), m);
  Vector w = Eigen::Map<const Vector>(weights.data(), m);
  return DiscreteMeasure(std::move(p), std::move(w));
}

void write_measure_csv(std::ostream& out, const DiscreteMeasure& measure) {
  for (int k = 0; k < measure.dim(); ++k) out << 'x' << (k + 1) << ',';
  out << "w\n";
  for (std::size_t i = 0; i < measure.size(); ++i) {
    const auto p = measure.point(i);
    for (int k = 0; k < measure.dim(); ++k) out << format_double(p[k]) << ',';
    out << format_double(measure.weight(i)) << '\n';
  }
}

DiscreteMeasure measure_from_json(const nlohmann::json& j) {
  const int d = j.at("dim").get<int>();
  const auto& pts = j.at("points");
  const auto& ws = j.at("weights");
  if (!pts.is_array() || !ws.is_array() || pts.size() != ws.size())
    throw std::runtime_error("points and weights must be arrays of equal length");
  Matrix p(d, static_cast<Eigen::Index>(pts.size()));
  Vector w(static_cast<Eigen::Index>(ws.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!pts[i].is_array() || pts[i].size() != static_cast<std::size_t>(d))
      throw std::runtime_error("point " + std::to_string(i) + " does not have dim coordinates");
    for (int k = 0; k < d; ++k) p(k, static_cast<Eigen::Index>(i)) = pts[i][static_cast<std::size_t>(k)].get<double>();
    w[static_cast<Eigen::Index>(i)] = ws[i].get<double>();
  }
  if (d < 1) throw std::runtime_error("dim must be positive");
  return DiscreteMeasure(std::move(p), std::move(w));
}

nlohmann::json measure_to_json(const DiscreteMeasure& measure) {
  nlohmann::json pts = nlohmann::json::array();
  nlohmann::json ws = nlohmann::json::array();
  for (std::size_t i = 0; i < measure.size(); ++i) {
    nlohmann::json p = nlohmann::json::array();
    for (int k = 0; k < measure.dim(); ++k) p.push_back(measure.point(i)[k]);
    pts.push_back(std::move(p));
    ws.push_back(measure.weight(i));
  }
  return {{"dim", measure.dim()}, {"points", std::move(pts)}, {"weights", std::move(ws)}};
}

namespace {
bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace

DiscreteMeasure load_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  if (ends_with(path, ".json")) {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
    }
    return measure_from_json(j);
  }
  return read_measure_csv(in);
}

void save_measure(const std::string& path, const DiscreteMeasure& measure) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (ends_with(path, ".json")) out << measure_to_json(measure).dump() << '\n';
  else write_measure_csv(out, measure);
}

}  // namespace jonesq
