#pragma once

#include "jonesq/measure.hpp"
#include "jonesq/network_simplex.hpp"
#include "jonesq/plane_fit.hpp"

#include <cstddef>

namespace jonesq {

struct TransportConfig {
  /// Positive-by-negative pair counts above this use nearest-neighbour arcs plus
  /// constraint generation instead of the complete bipartite arc set.
  std::size_t dense_pair_limit = 60000;
  int neighbours = 8;
  int max_rounds = 500;
  double feasibility_tolerance = 1e-9;
  NetworkSimplexOptions simplex;
};

/// Signed test-function LP for dist_B: merged support inside the open ball, net masses
/// sigma - mu per point, and the distance of every point to the complement of the ball.
/// Atoms on the sphere or outside are dropped (admissible test functions vanish there);
/// points whose net mass cancels exactly are dropped as well.
class LipschitzTestProblem {
 public:
  LipschitzTestProblem(const DiscreteMeasure& sigma, const DiscreteMeasure& mu, const Ball& ball);

  const Ball& ball() const { return ball_; }
  const Matrix& points() const { return points_; }
  const Vector& signed_mass() const { return signed_mass_; }
  const Vector& boundary_distance() const { return boundary_distance_; }
  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }

 private:
  Ball ball_;
  Matrix points_;
  Vector signed_mass_;
  Vector boundary_distance_;
};

/// 1-Lipschitz function supported in the ball: the McShane extension from the sink atoms,
/// clamped between -dist(., complement) and +dist(., complement).
class TestFunction {
 public:
  TestFunction() = default;
  TestFunction(Ball ball, Matrix anchors, Vector values);
  double operator()(const Eigen::Ref<const Vector>& y) const;

 private:
  Ball ball_;
  Matrix anchors_;
  Vector values_;
};

struct BoundedLipschitzResult {
  double value = 0.0;
  /// Optimal admissible test function and its values at the problem points.
  TestFunction test_function;
  Vector values;
  long pivots = 0;
  int rounds = 0;
  std::size_t arcs = 0;
};

BoundedLipschitzResult solve_bounded_lipschitz(const LipschitzTestProblem& problem,
                                               const TransportConfig& config = {});

/// dist_B(sigma, mu): sup of |int f dsigma - int f dmu| over 1-Lipschitz f supported in B.
double bounded_lipschitz_distance(const DiscreteMeasure& sigma, const DiscreteMeasure& mu,
                                  const Ball& ball, const TransportConfig& config = {});

struct PlaneMeasure {
  DiscreteMeasure measure;
  bool meets_ball = true;
};

/// a * H^n on the plane, restricted to the closed 3B, as atoms of weight a * h^n on the
/// square grid of spacing h anchored at the projection of the ball center.
/// Throws std::invalid_argument unless 0 < h <= r / 8 and a >= 0.
PlaneMeasure discretize_plane_measure(const AffinePlane& plane, const Ball& ball, double amplitude,
                                      double spacing);

/// How a * H^n on the plane inside closed 3B becomes atoms. Both use the cells of side h
/// centred on the grid nodes, and each cell carries mass a * h^n placed inside the cell.
enum class PlaneDiscretization {
  grid,        ///< the node itself
  cell_split   ///< the projections of the region's atoms in the cell, split by their weights;
               ///< the node when the cell holds none
};

struct PlaneQuadrature {
  Matrix nodes;
  Vector weights;  ///< per unit amplitude; they sum to h^n over each cell
};

/// Quadrature of H^n on the plane inside closed 3B. `region` is only used by cell_split.
PlaneQuadrature plane_quadrature(const AffinePlane& plane, const Ball& ball, double spacing,
                                 PlaneDiscretization kind, const DiscreteMeasure& region);

enum class AmplitudeSearch { cutting_plane, golden_section };

struct AlphaConfig {
  double resolution = 1.0 / 16.0;  ///< grid spacing h as a fraction of r
  PlaneDiscretization discretization = PlaneDiscretization::grid;
  int plane_budget = 12;           ///< plane evaluations after the seed
  double mass_margin = 4.0;        ///< plane mass at the upper amplitude bracket, over mu(3B)
  AmplitudeSearch amplitude_search = AmplitudeSearch::cutting_plane;
  int amplitude_iterations = 60;
  double amplitude_tolerance = 1e-7;  ///< relative gap between best value and lower model
  TransportConfig transport;
};

struct AlphaRecord {
  double value = 0.0;
  AffinePlane plane;
  double amplitude = 0.0;
  double resolution = 0.0;  ///< absolute grid spacing
  double distance = 0.0;    ///< dist_{3B}(mu, a H^n_L) at the reported pair
  int plane_evaluations = 0;
  int transport_solves = 0;
  bool empty = false;       ///< no mass in 3B
  bool bracket_hit = false; ///< optimum at the upper amplitude bracket
};

struct AmplitudeFit {
  double amplitude = 0.0;
  double distance = 0.0;
  int solves = 0;
  bool bracket_hit = false;
};

/// min over a >= 0 of dist_{3B}(region, a H^n_L) for a fixed plane. `region` is mu on 3B.
/// A positive `hint` (a nearby optimum) seeds the bracket.
AmplitudeFit fit_amplitude(const DiscreteMeasure& region, const AffinePlane& plane,
                           const Ball& ball, double spacing, const AlphaConfig& config = {},
                           double hint = 0.0);

/// Plane through the projection of the ball center moved, if needed, so it meets the
/// closed ball.
AffinePlane clamp_to_ball(const AffinePlane& plane, const Ball& ball);

AlphaRecord alpha(const DiscreteMeasure& measure, const SpatialIndex& index, const Ball& ball,
                  int n, const AlphaConfig& config = {});

}  // namespace jonesq
