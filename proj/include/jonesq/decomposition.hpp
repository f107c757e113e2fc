#pragma once

#include "jonesq/graph.hpp"
#include "jonesq/measure.hpp"
#include "jonesq/multiscale.hpp"
#include "jonesq/transport.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace jonesq {

// ---------------------------------------------------------------------------
// Whitney cubes of the complement of a Lipschitz graph

struct WhitneyConfig {
  double dilation = 24.0;   ///< R in "R Q meets the graph"
  int max_depth = 8;        ///< levels below the region cube
  double sample_spacing = 0.0;  ///< graph parameter spacing; 0 picks side(max_depth) / 8
};

struct WhitneyCube {
  DyadicCube cube;
  Box box;
  double side = 0.0;
  double distance_lower = 0.0;  ///< certified lower bound for dist(Q, graph)
  double distance_upper = 0.0;
  // Verification flags, filled by the verification pass.
  bool separated = false;   ///< 10Q misses the graph
  bool reaches = false;     ///< R Q meets the graph
  bool diam_below = false;  ///< diam(Q) < dist(Q, graph)
  int neighbours = 0;       ///< cubes Q' with 10Q' meeting 10Q
  double neighbour_side_ratio = 1.0;  ///< largest side ratio among those neighbours
};

struct WhitneyDecomposition {
  DyadicLattice lattice;
  DyadicCube region;
  WhitneyConfig config;
  double sample_spacing = 0.0;
  double slack = 0.0;
  std::vector<WhitneyCube> cubes;
  /// Cells at the depth cap that could not be certified.
  std::vector<WhitneyCube> unresolved;
  int max_neighbours = 0;
  double max_side_ratio = 1.0;

  bool all_valid() const;
};

/// Maximal dyadic subcubes of `region` whose 10-fold dilation is certified disjoint from the
/// graph. Runs the verification pass before returning.
WhitneyDecomposition whitney_decompose(const LipschitzGraph& graph, const DyadicLattice& lattice,
                                       const DyadicCube& region, const WhitneyConfig& config = {});

/// Recomputes the per-cube flags and neighbour statistics.
void verify_whitney(WhitneyDecomposition& decomposition, const GraphDistance& distance);

nlohmann::json to_json(const WhitneyDecomposition& decomposition);

// ---------------------------------------------------------------------------
// Exceptional set

struct ExceptionalBall {
  std::size_t sample = 0;  ///< index of the graph sample it is centred on
  Vector center;
  double r_x = 0.0;        ///< Delta_i = B(center, 5 r_x)
  Ball delta() const { return Ball(center, 5.0 * r_x); }
};

class ExceptionalSet {
 public:
  ExceptionalSet() = default;
  ExceptionalSet(double threshold, int n, std::vector<ExceptionalBall> balls, std::size_t h0_count);

  double threshold() const { return threshold_; }
  int n() const { return n_; }
  const std::vector<ExceptionalBall>& balls() const { return balls_; }
  std::size_t h0_count() const { return h0_count_; }
  bool empty() const { return balls_.empty(); }

  bool in_h(const Eigen::Ref<const Vector>& y) const { return in_hk(y, 1.0); }
  /// y in the union of the k-fold dilations of the Delta_i.
  bool in_hk(const Eigen::Ref<const Vector>& y, double k) const;

 private:
  double threshold_ = 0.0;
  int n_ = 1;
  std::vector<ExceptionalBall> balls_;
  std::size_t h0_count_ = 0;
};

/// Largest r >= r_lo with mu(closed B(x, r)) >= M r^n, if any.
std::optional<double> critical_radius(const DiscreteMeasure& measure, const SpatialIndex& index,
                                      const Eigen::Ref<const Vector>& x, int n, double threshold,
                                      double r_lo);

/// Points of H_0 among the samples (radii below the smallest grid radius are ignored), with
/// r_x the largest radius of density >= M, then a greedy covering by decreasing r_x that keeps
/// the balls B(x_i, r_x) pairwise disjoint.
ExceptionalSet exceptional_set(const DiscreteMeasure& measure, const SpatialIndex& index,
                               const Matrix& samples, int n, double threshold,
                               const RadiusGrid& grid);

struct ExceptionalCheck {
  bool fifth_balls_disjoint = true;
  bool density_sandwich = true;
  bool covers_h0 = true;
  double min_inner_density = 0.0;  ///< min mu(Delta/5) / r(Delta/5)^n
  double max_outer_density = 0.0;  ///< max mu(Delta) / r(Delta)^n
};

ExceptionalCheck verify_exceptional(const ExceptionalSet& set, const DiscreteMeasure& measure,
                                    const SpatialIndex& index, const Matrix& samples,
                                    const RadiusGrid& grid, double tolerance = 1e-12);

nlohmann::json to_json(const ExceptionalSet& set);

// ---------------------------------------------------------------------------
// Gamma cubes

struct GammaCube {
  int level = 0;
  std::vector<std::int64_t> index;
  Vector parameter_lower;
  double side = 0.0;
  Vector center;           ///< (u_Q, A(u_Q)) for the parameter center u_Q
  double diameter = 0.0;   ///< of the sampled graph piece
  Ball ball;               ///< B_Q, radius 3 diam
  bool good = true;        ///< not contained in H^9
  int parent = -1;
  std::vector<int> children;
};

struct GammaTree {
  std::vector<GammaCube> cubes;  ///< breadth first; cubes[0] is the root

  /// Indices of the root and its descendants up to `depth` levels below it.
  std::vector<int> subtree(int root, int depth) const;
};

/// Dyadic Gamma-cubes over the parameter cube [lower, lower + side)^n, `levels` levels below
/// the root. Diameters and the H^9 test use (subsamples + 1)^n graph points per cube.
GammaTree gamma_cubes(const LipschitzGraph& graph, const Vector& lower, double side, int levels,
                      const ExceptionalSet* exceptional = nullptr, int subsamples = 8);

nlohmann::json to_json(const GammaTree& tree);

// ---------------------------------------------------------------------------
// Stopping cubes

enum class CubeLabel { high_density, low_density, big_alpha, good, below_stop, ineligible };

const char* to_string(CubeLabel label);

struct StoppingConfig {
  double M = 1e4;
  double N = 1e3;
  double r0 = 0.0;      ///< 0 means 10 * diam(R): every cube is eligible
  int max_depth = 5;    ///< levels below R
  /// Scale grid for the F(N) alpha sums; default: the larger of the data's diameter bound and
  /// diam(R), then 8 halvings.
  std::optional<ScaleGrid> f_grid;
  AlphaConfig alpha;
  unsigned workers = 1;
};

struct StoppedCube {
  DyadicCube cube;
  int depth = 0;
  CubeLabel label = CubeLabel::ineligible;
  double mass = 0.0;       ///< mu(Q)
  double mass_3q = 0.0;    ///< mu(3Q)
  double mass_ball = 0.0;  ///< mu(B_Q), B_Q = closed B(x_Q, 3 diam Q)
  double side = 0.0;
  double diameter = 0.0;
  int parent = -1;
  /// Atom of Q found in F (-1 when none was needed or none exists).
  long witness = -1;
};

struct StoppedTree {
  DyadicLattice lattice;
  DyadicCube root;
  StoppingConfig config;
  double r0 = 0.0;
  std::vector<StoppedCube> cubes;  ///< breadth first; cubes[0] is R
  double root_mass = 0.0;
  double stopped_mass = 0.0;       ///< mu(R intersected with the union of Stop)
  std::size_t alpha_profiles = 0;  ///< full alpha sums evaluated for F membership

  std::vector<int> stop_cubes() const;
  std::vector<int> good_cubes() const;
};

/// Alpha square sum over the grid, or an upper bound for it: with `bound_only` the value at
/// a = 0 (sum of w dist(y, complement of 3B) / r^(n+1)) replaces every alpha.
double alpha_square_sum(const DiscreteMeasure& measure, const SpatialIndex& index,
                        const Eigen::Ref<const Vector>& x, int n, const ScaleGrid& grid,
                        const AlphaConfig& config, bool bound_only);

StoppedTree stopping_classify(const DiscreteMeasure& measure, const SpatialIndex& index,
                              const DyadicLattice& lattice, const DyadicCube& root, int n,
                              const StoppingConfig& config = {});

struct StoppingCheck {
  bool stops_disjoint = true;
  bool stops_maximal = true;
  bool labels_consistent = true;
  double stopped_fraction = 0.0;
};

StoppingCheck verify_stopping(const StoppedTree& tree);

nlohmann::json to_json(const StoppedTree& tree);

}  // namespace jonesq
