#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace jonesq::cli {

struct RunConfig {
  std::string command;
  std::string input;      ///< measure file (.csv / .json)
  std::string spec;       ///< generator spec file (.json)
  std::string out = ".";  ///< output directory
  std::string kind = "beta";
  std::string corpus;     ///< verify: directory of generator specs
  int n = 1;
  double p = 2.0;
  double r_max = 0.0;  ///< 0: diameter bound of the data
  double r_min = 0.0;  ///< 0: r_max / 256
  double ratio = 0.5;
  double M = 1e4;
  double N = 1e3;
  double r0 = 0.0;
  double resolution = 1.0 / 16.0;
  int budget = 12;
  int depth = 5;
  std::size_t points = 20;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;  ///< 0: all hardware threads; never affects the reports
};

/// `count` distinct indices below `size` in increasing order, fixed by the seed.
std::vector<std::size_t> sample_points(std::size_t size, std::size_t count, std::uint64_t seed);

/// Throws std::invalid_argument on out-of-range parameters.
void validate(const RunConfig& config);

/// Everything that determines the reports (workers excluded).
nlohmann::json config_echo(const RunConfig& config);

/// Runs one command; returns the process exit status. Diagnostics go to `err`.
int run(const RunConfig& config, std::ostream& err);

/// Parses argv with CLI11 and dispatches.
int main_entry(int argc, char** argv);

}  // namespace jonesq::cli
