#include "jonesq/multiscale.hpp"

#include "jonesq/io.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace jonesq {

ScaleGrid::ScaleGrid(double r_max, double r_min, double ratio)
    : r_max_(r_max), r_min_(r_min), ratio_(ratio) {
  if (!(r_max > 0.0) || !(r_min > 0.0) || r_min > r_max)
    throw std::invalid_argument("scale grid needs 0 < r_min <= r_max");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("scale ratio must lie in (0, 1)");
  // Relative slack so that r_max * 2^-k with r_min = r_max * 2^-k keeps the last scale.
  for (double r = r_max; r >= r_min * (1.0 - 1e-12); r *= ratio) radii_.push_back(r);
}

ScaleGrid ScaleGrid::dyadic(double r_max, int halvings) {
  if (halvings < 0) throw std::invalid_argument("negative halving count");
  return ScaleGrid(r_max, std::ldexp(r_max, -halvings), 0.5);
}

double ScaleGrid::weight() const { return std::log(1.0 / ratio_); }

const char* to_string(CoefficientKind kind) {
  return kind == CoefficientKind::beta ? "beta" : "alpha";
}

CoefficientKind coefficient_kind_from_string(const std::string& name) {
  if (name == "beta") return CoefficientKind::beta;
  if (name == "alpha") return CoefficientKind::alpha;
  throw std::invalid_argument("unknown coefficient kind: " + name);
}

JonesProfile jones_function(const DiscreteMeasure& measure, const SpatialIndex& index,
                            const Eigen::Ref<const Vector>& x, int n, double p,
                            const ScaleGrid& grid, CoefficientKind kind,
                            const JonesConfig& config) {
  if (x.size() != measure.dim()) throw std::invalid_argument("point dimension mismatch");
  if (kind == CoefficientKind::beta && !(p >= 1.0 && p <= 2.0))
    throw std::invalid_argument("p must lie in [1, 2]");
  JonesProfile prof;
  prof.x = x;
  prof.kind = kind;
  prof.n = n;
  prof.p = kind == CoefficientKind::alpha ? 1.0 : p;
  prof.ratio = grid.ratio();
  if (measure.size() > 1) prof.below_spacing = grid.radii().back() < min_spacing(measure, index);

  const double w = grid.weight();
  double sum = 0.0;
  for (double r : grid.radii()) {
    ScaleRecord rec;
    rec.radius = r;
    const Ball ball(Vector(x), r);
    try {
      if (kind == CoefficientKind::beta) {
        const BetaRecord b = beta(measure, index, ball, n, p, config.irls);
        rec.value = b.value;
        rec.empty = b.empty_region;
      } else {
        const AlphaRecord a = alpha(measure, index, ball, n, config.alpha);
        rec.value = a.value;
        rec.empty = a.empty;
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
      rec.value = 0.0;
    }
    sum += w * rec.value * rec.value;
    rec.partial_sum = sum;
    prof.scales.push_back(std::move(rec));
  }
  return prof;
}

ProfileStats profile_stats(const JonesProfile& profile, double plateau_threshold,
                           double flat_floor) {
  ProfileStats st;
  const auto& s = profile.scales;
  if (s.empty()) {
    st.flat = st.plateau = true;
    return st;
  }
  for (const auto& rec : s) st.failed_scales += rec.failed ? 1 : 0;
  st.total = s.back().partial_sum;
  const std::size_t last = s.size() - 1;
  const std::size_t half = last / 2;
  st.flat = st.total <= flat_floor;
  st.tail_fraction = st.flat ? 0.0 : (st.total - s[half].partial_sum) / st.total;
  st.plateau = st.flat || st.tail_fraction <= plateau_threshold;

  const double k = static_cast<double>(s.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    mx += static_cast<double>(j);
    my += s[j].partial_sum;
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double dx = static_cast<double>(j) - mx;
    const double dy = s[j].partial_sum - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  st.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  st.intercept = my - st.slope * mx;
  // A constant profile is fitted exactly by a flat line.
  st.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return st;
}

void write_profile_csv(std::ostream& out, const JonesProfile& profile, bool header) {
  const auto d = profile.x.size();
  if (header) {
    for (Eigen::Index k = 0; k < d; ++k) out << 'x' << (k + 1) << ',';
    out << "r,value,partial_sum,flags\n";
  }
  for (const auto& rec : profile.scales) {
    for (Eigen::Index k = 0; k < d; ++k) out << format_double(profile.x[k]) << ',';
    out << format_double(rec.radius) << ',' << format_double(rec.value) << ','
        << format_double(rec.partial_sum) << ',';
    std::string flags;
    if (rec.empty) flags += "empty";
    if (rec.failed) flags += std::string(flags.empty() ? "" : ";") + "failed";
    out << flags << '\n';
  }
}

nlohmann::json stats_to_json(const ProfileStats& st) {
  return {{"total", st.total},         {"tail_fraction", st.tail_fraction},
          {"slope", st.slope},         {"intercept", st.intercept},
          {"r_squared", st.r_squared}, {"flat", st.flat},
          {"plateau", st.plateau},     {"failed_scales", st.failed_scales}};
}

}  // namespace jonesq
