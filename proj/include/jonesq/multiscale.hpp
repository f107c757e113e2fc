#pragma once

#include "jonesq/measure.hpp"
#include "jonesq/plane_fit.hpp"
#include "jonesq/transport.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace jonesq {

/// Radii r_j = r_max * ratio^j, j = 0, 1, ..., down to the last one >= r_min.
class ScaleGrid {
 public:
  ScaleGrid(double r_max, double r_min, double ratio = 0.5);
  /// r_max, r_max / 2, ..., r_max * 2^-halvings.
  static ScaleGrid dyadic(double r_max, int halvings);

  double r_max() const { return r_max_; }
  double r_min() const { return r_min_; }
  double ratio() const { return ratio_; }
  const std::vector<double>& radii() const { return radii_; }
  std::size_t size() const { return radii_.size(); }
  /// Riemann weight ln(1 / ratio) attached to every scale.
  double weight() const;

 private:
  double r_max_;
  double r_min_;
  double ratio_;
  std::vector<double> radii_;
};

enum class CoefficientKind { beta, alpha };

const char* to_string(CoefficientKind kind);
CoefficientKind coefficient_kind_from_string(const std::string& name);

struct ScaleRecord {
  double radius = 0.0;
  double value = 0.0;
  double partial_sum = 0.0;
  bool empty = false;   ///< no mass in the ball (beta) or in 3B (alpha)
  bool failed = false;  ///< coefficient threw; contributes 0
  std::string error;
};

struct JonesProfile {
  Vector x;
  CoefficientKind kind = CoefficientKind::beta;
  int n = 1;
  double p = 2.0;
  double ratio = 0.5;
  std::vector<ScaleRecord> scales;
  /// The grid's smallest radius lies below the measure's smallest atom spacing.
  bool below_spacing = false;

  double total() const { return scales.empty() ? 0.0 : scales.back().partial_sum; }
};

struct JonesConfig {
  AlphaConfig alpha;
  IrlsConfig irls;
};

/// Partial sums S_k = ln(1/ratio) * sum_{j <= k} value(x, r_j)^2. Per-scale failures are
/// flagged and contribute 0.
JonesProfile jones_function(const DiscreteMeasure& measure, const SpatialIndex& index,
                            const Eigen::Ref<const Vector>& x, int n, double p,
                            const ScaleGrid& grid, CoefficientKind kind,
                            const JonesConfig& config = {});

struct ProfileStats {
  double total = 0.0;
  /// (S_last - S_half) / S_last with half = last / 2; 0 when S_last <= flat_floor.
  double tail_fraction = 0.0;
  /// Least-squares line S_k ~ intercept + slope * k.
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool flat = false;     ///< S_last <= flat_floor
  bool plateau = false;  ///< flat or tail_fraction <= plateau_threshold
  int failed_scales = 0;
};

ProfileStats profile_stats(const JonesProfile& profile, double plateau_threshold = 0.05,
                           double flat_floor = 1e-9);

/// CSV rows `x1..xd,r,value,partial_sum,flags` (header included when asked).
void write_profile_csv(std::ostream& out, const JonesProfile& profile, bool header);
nlohmann::json stats_to_json(const ProfileStats& stats);

}  // namespace jonesq
