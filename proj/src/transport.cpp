#include "jonesq/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <unordered_set>

namespace jonesq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double boundary_gap(const Ball& ball, const Eigen::Ref<const Vector>& y) {
  return ball.radius - (y - ball.center).norm();
}

}  // namespace

// ---------------------------------------------------------------------------
// LipschitzTestProblem

LipschitzTestProblem::LipschitzTestProblem(const DiscreteMeasure& sigma, const DiscreteMeasure& mu,
                                           const Ball& ball)
    : ball_(ball) {
  const int d = static_cast<int>(ball.center.size());
  if (sigma.dim() != d || mu.dim() != d) throw std::invalid_argument("dimension mismatch");

  struct Atom {
    Eigen::Index column;
    bool from_sigma;
  };
  std::vector<Atom> atoms;
  auto collect = [&](const DiscreteMeasure& m, bool positive) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m.weight(i) == 0.0) continue;
      if (boundary_gap(ball, m.point(i)) <= 0.0) continue;
      atoms.push_back({static_cast<Eigen::Index>(i), positive});
    }
  };
  collect(sigma, true);
  collect(mu, false);
  auto coords = [&](const Atom& a) {
    return a.from_sigma ? sigma.point(static_cast<std::size_t>(a.column))
                        : mu.point(static_cast<std::size_t>(a.column));
  };
  std::stable_sort(atoms.begin(), atoms.end(), [&](const Atom& a, const Atom& b) {
    const auto pa = coords(a);
    const auto pb = coords(b);
    for (int k = 0; k < d; ++k) {
      if (pa[k] < pb[k]) return true;
      if (pb[k] < pa[k]) return false;
    }
    return false;
  });

  std::vector<Eigen::Index> first;  // representative atom of each merged point
  std::vector<double> net;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const Atom& a = atoms[k];
    const double w = a.from_sigma ? sigma.weight(static_cast<std::size_t>(a.column))
                                  : -mu.weight(static_cast<std::size_t>(a.column));
    if (!first.empty() && coords(atoms[static_cast<std::size_t>(first.back())]) == coords(a)) {
      net.back() += w;
    } else {
      first.push_back(static_cast<Eigen::Index>(k));
      net.push_back(w);
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < net.size(); ++k)
    if (net[k] != 0.0) keep.push_back(k);

  points_.resize(d, static_cast<Eigen::Index>(keep.size()));
  signed_mass_.resize(static_cast<Eigen::Index>(keep.size()));
  boundary_distance_.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    points_.col(col) = coords(atoms[static_cast<std::size_t>(first[keep[k]])]);
    signed_mass_[col] = net[keep[k]];
    boundary_distance_[col] = boundary_gap(ball, points_.col(col));
  }
}

// ---------------------------------------------------------------------------
// TestFunction

TestFunction::TestFunction(Ball ball, Matrix anchors, Vector values)
    : ball_(std::move(ball)), anchors_(std::move(anchors)), values_(std::move(values)) {}

double TestFunction::operator()(const Eigen::Ref<const Vector>& y) const {
  const double gap = boundary_gap(ball_, y);
  if (gap <= 0.0) return 0.0;
  double g = gap;
  for (Eigen::Index j = 0; j < anchors_.cols(); ++j)
    g = std::min(g, values_[j] + (y - anchors_.col(j)).norm());
  return std::max(-gap, g);
}

// ---------------------------------------------------------------------------
// dist_B by min-cost transshipment
//
// The dual of  max sum_k f_k s_k  s.t. f_i - f_j <= |x_i - x_j|, |f_k| <= dc_k  is a
// transshipment from the positive atoms to the negative atoms and to a boundary node, with
// arc costs |x_i - x_j| between atoms and dc_k to or from the boundary. Metric costs make
// positive-to-negative arcs sufficient for the dense route.

namespace {

struct Bipartite {
  std::vector<Eigen::Index> pos;
  std::vector<Eigen::Index> neg;
};

void add_pair_arc(std::vector<FlowArc>& arcs, const LipschitzTestProblem& pb, const Bipartite& bp,
                  std::size_t i, std::size_t j) {
  const double c = (pb.points().col(bp.pos[i]) - pb.points().col(bp.neg[j])).norm();
  arcs.push_back({static_cast<int>(i), static_cast<int>(bp.pos.size() + j), c});
}

}  // namespace

BoundedLipschitzResult solve_bounded_lipschitz(const LipschitzTestProblem& problem,
                                               const TransportConfig& config) {
  Bipartite bp;
  const Vector& s = problem.signed_mass();
  const Vector& dc = problem.boundary_distance();
  for (Eigen::Index k = 0; k < s.size(); ++k) (s[k] > 0.0 ? bp.pos : bp.neg).push_back(k);
  const std::size_t np = bp.pos.size();
  const std::size_t nn = bp.neg.size();
  const int boundary = static_cast<int>(np + nn);
  const int node_count = boundary + 1;

  std::vector<double> supply(static_cast<std::size_t>(node_count), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    supply[i] = s[bp.pos[i]];
    total += supply[i];
  }
  for (std::size_t j = 0; j < nn; ++j) {
    supply[np + j] = s[bp.neg[j]];
    total += supply[np + j];
  }
  supply[static_cast<std::size_t>(boundary)] = -total;

  std::vector<FlowArc> arcs;
  for (std::size_t i = 0; i < np; ++i) arcs.push_back({static_cast<int>(i), boundary, dc[bp.pos[i]]});
  for (std::size_t j = 0; j < nn; ++j)
    arcs.push_back({boundary, static_cast<int>(np + j), dc[bp.neg[j]]});

  const bool dense = np * nn <= config.dense_pair_limit;
  const std::size_t atoms = np + nn;
  auto node_point = [&](std::size_t v) {
    return problem.points().col(v < np ? bp.pos[v] : bp.neg[v - np]);
  };
  auto distance = [&](std::size_t u, std::size_t v) { return (node_point(u) - node_point(v)).norm(); };

  // Sparse route: the same LP with all-pairs constraints is a transshipment on the complete
  // graph, so flow may pass through atoms of either sign. Start from symmetric k-nearest-
  // neighbour arcs (plus boundary arcs both ways) and add the violated pairs.
  std::unordered_set<std::uint64_t> present;
  auto add_arc = [&](std::size_t u, std::size_t v) {
    if (present.insert(static_cast<std::uint64_t>(u) * atoms + v).second)
      arcs.push_back({static_cast<int>(u), static_cast<int>(v), distance(u, v)});
  };
  if (dense) {
    arcs.reserve(arcs.size() + np * nn);
    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t j = 0; j < nn; ++j) add_pair_arc(arcs, problem, bp, i, j);
  } else {
    for (std::size_t i = 0; i < np; ++i) arcs.push_back({boundary, static_cast<int>(i), dc[bp.pos[i]]});
    for (std::size_t j = 0; j < nn; ++j)
      arcs.push_back({static_cast<int>(np + j), boundary, dc[bp.neg[j]]});
    const std::size_t k = std::min(atoms - 1, static_cast<std::size_t>(std::max(1, config.neighbours)));
    // Nearest atoms of any sign and, separately, of the opposite sign: when the two
    // measures sit on different sets the mixed pairs carry the flow.
    std::vector<std::pair<double, std::size_t>> row, cross;
    for (std::size_t u = 0; u < atoms; ++u) {
      row.clear();
      cross.clear();
      for (std::size_t v = 0; v < atoms; ++v) {
        if (v == u) continue;
        const double d2 = (node_point(u) - node_point(v)).squaredNorm();
        row.emplace_back(d2, v);
        if ((u < np) != (v < np)) cross.emplace_back(d2, v);
      }
      const std::size_t kc = std::min(k, cross.size());
      std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
      std::partial_sort(cross.begin(), cross.begin() + static_cast<std::ptrdiff_t>(kc), cross.end());
      for (std::size_t t = 0; t < k; ++t) {
        add_arc(u, row[t].second);
        add_arc(row[t].second, u);
      }
      for (std::size_t t = 0; t < kc; ++t) {
        add_arc(u, cross[t].second);
        add_arc(cross[t].second, u);
      }
    }
    // kNN graphs split where the density jumps (dense atoms next to coarse plane nodes).
    // Boruvka steps join every component to its nearest neighbour until connected.
    std::vector<std::size_t> parent(atoms);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto root = [&](std::size_t v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      const auto u = static_cast<std::size_t>(arcs[a].source);
      const auto v = static_cast<std::size_t>(arcs[a].target);
      if (u < atoms && v < atoms) parent[root(u)] = root(v);
    }
    for (;;) {
      std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> best(
          atoms, {kInf, {0, 0}});
      bool split = false;
      for (std::size_t u = 0; u < atoms; ++u)
        for (std::size_t v = 0; v < atoms; ++v) {
          const std::size_t cu = root(u);
          if (cu == root(v)) continue;
          split = true;
          const double d2 = (node_point(u) - node_point(v)).squaredNorm();
          if (d2 < best[cu].first) best[cu] = {d2, {u, v}};
        }
      if (!split) break;
      for (std::size_t c = 0; c < atoms; ++c) {
        if (best[c].first == kInf) continue;
        const auto [u, v] = best[c].second;
        add_arc(u, v);
        add_arc(v, u);
        parent[root(u)] = root(v);
      }
    }
  }

  BoundedLipschitzResult out;
  FlowSolution sol;
  std::vector<double> f(static_cast<std::size_t>(boundary));
  const double tol = config.feasibility_tolerance * problem.ball().radius;
  // Sparse rounds only append arcs, so one solver resumes from the last optimal tree.
  // Points lie in the open ball, so no arc costs more than its diameter.
  std::optional<NetworkSimplex> incremental;
  std::size_t fed = 0;
  for (int round = 0;; ++round) {
    if (dense) {
      sol = solve_min_cost_flow(node_count, supply, arcs, config.simplex);
    } else {
      if (!incremental)
        incremental.emplace(node_count, supply, 2.0 * problem.ball().radius * (1.0 + 1e-9), config.simplex);
      for (; fed < arcs.size(); ++fed) incremental->add_arc(arcs[fed]);
      sol = incremental->solve();
    }
    out.pivots += sol.iterations;
    out.rounds = round + 1;
    const double pi0 = sol.potential[static_cast<std::size_t>(boundary)];
    for (int v = 0; v < boundary; ++v) f[static_cast<std::size_t>(v)] = pi0 - sol.potential[static_cast<std::size_t>(v)];
    if (dense) break;

    // Arc u -> v carries the constraint f_u - f_v <= |x_u - x_v|. Check every pair and add
    // the worst offenders of every row.
    std::size_t added = 0;
    const std::size_t per_row = static_cast<std::size_t>(std::max(1, config.neighbours));
    std::vector<std::pair<double, std::size_t>> bad;
    for (std::size_t u = 0; u < atoms; ++u) {
      bad.clear();
      for (std::size_t v = 0; v < atoms; ++v) {
        if (v == u || f[u] - f[v] <= tol) continue;
        const double excess = f[u] - f[v] - distance(u, v);
        if (excess > tol) bad.emplace_back(-excess, v);
      }
      const std::size_t take = std::min(per_row, bad.size());
      std::partial_sort(bad.begin(), bad.begin() + static_cast<std::ptrdiff_t>(take), bad.end());
      for (std::size_t t = 0; t < take; ++t) {
        add_arc(u, bad[t].second);
        ++added;
      }
    }
    if (added == 0) break;
    if (round + 1 >= config.max_rounds)
      throw SolverError("constraint generation did not close after " +
                        std::to_string(config.max_rounds) + " rounds (" +
                        std::to_string(added) + " pairs still violated)");
  }
  out.arcs = arcs.size();

  Matrix anchors(problem.points().rows(), static_cast<Eigen::Index>(nn));
  Vector anchor_values(static_cast<Eigen::Index>(nn));
  for (std::size_t j = 0; j < nn; ++j) {
    anchors.col(static_cast<Eigen::Index>(j)) = problem.points().col(bp.neg[j]);
    anchor_values[static_cast<Eigen::Index>(j)] = f[np + j];
  }
  out.test_function = TestFunction(problem.ball(), std::move(anchors), std::move(anchor_values));
  out.values.resize(static_cast<Eigen::Index>(problem.size()));
  for (Eigen::Index k = 0; k < out.values.size(); ++k)
    out.values[k] = out.test_function(problem.points().col(k));
  out.value = std::max(0.0, sol.cost);
  return out;
}

double bounded_lipschitz_distance(const DiscreteMeasure& sigma, const DiscreteMeasure& mu,
                                  const Ball& ball, const TransportConfig& config) {
  return solve_bounded_lipschitz(LipschitzTestProblem(sigma, mu, ball), config).value;
}

// ---------------------------------------------------------------------------
// Plane measures

namespace {

struct PlaneGrid {
  Matrix nodes;
  std::map<std::vector<long>, Eigen::Index> lookup;  // integer offsets -> column
};

PlaneGrid plane_grid_indexed(const AffinePlane& plane, const Ball& ball, double spacing) {
  const Ball big = ball.scaled(3.0);
  const Vector anchor = plane.project(ball.center);
  const int n = plane.n();
  const auto reach = static_cast<long>(std::floor(big.radius / spacing)) + 1;
  std::vector<long> k(static_cast<std::size_t>(n), -reach);
  std::vector<double> coords;
  PlaneGrid out;
  Vector offset(n);
  while (true) {
    for (int t = 0; t < n; ++t) offset[t] = spacing * static_cast<double>(k[static_cast<std::size_t>(t)]);
    const Vector p = anchor + plane.frame() * offset;
    if (big.contains(p)) {
      out.lookup.emplace(k, static_cast<Eigen::Index>(coords.size()) / plane.dim());
      coords.insert(coords.end(), p.data(), p.data() + p.size());
    }
    int t = 0;
    while (t < n && ++k[static_cast<std::size_t>(t)] > reach) k[static_cast<std::size_t>(t++)] = -reach;
    if (t == n) break;
  }
  const auto count = static_cast<Eigen::Index>(coords.size()) / plane.dim();
  out.nodes = Eigen::Map<const Matrix>(coords.data(), plane.dim(), count);
  return out;
}

Matrix plane_grid(const AffinePlane& plane, const Ball& ball, double spacing) {
  return plane_grid_indexed(plane, ball, spacing).nodes;
}

void check_grid_args(const AffinePlane& plane, const Ball& ball, double spacing) {
  if (plane.dim() != ball.center.size()) throw std::invalid_argument("plane/ball dimension mismatch");
  if (!(spacing > 0.0) || spacing > ball.radius / 8.0 * (1.0 + 1e-12))
    throw std::invalid_argument("grid spacing must satisfy 0 < h <= r/8");
}

}  // namespace

PlaneMeasure discretize_plane_measure(const AffinePlane& plane, const Ball& ball, double amplitude,
                                      double spacing) {
  check_grid_args(plane, ball, spacing);
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
    throw std::invalid_argument("amplitude must be finite and nonnegative");
  PlaneMeasure out{DiscreteMeasure(plane.dim()), true};
  if (!ball.scaled(3.0).contains(plane.project(ball.center))) {
    out.meets_ball = false;
    return out;
  }
  if (amplitude == 0.0) return out;
  Matrix grid = plane_grid(plane, ball, spacing);
  const Vector w = Vector::Constant(grid.cols(), amplitude * std::pow(spacing, plane.n()));
  out.measure = DiscreteMeasure(std::move(grid), w);
  return out;
}

PlaneQuadrature plane_quadrature(const AffinePlane& plane, const Ball& ball, double spacing,
                                 PlaneDiscretization kind, const DiscreteMeasure& region) {
  check_grid_args(plane, ball, spacing);
  PlaneGrid grid = plane_grid_indexed(plane, ball, spacing);
  const double cell = std::pow(spacing, plane.n());
  const Eigen::Index count = grid.nodes.cols();
  if (kind == PlaneDiscretization::grid || region.empty())
    return {std::move(grid.nodes), Vector::Constant(count, cell)};

  // Atoms of the region by cell, in index order.
  const Vector anchor = plane.project(ball.center);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(count));
  std::vector<double> cell_mass(static_cast<std::size_t>(count), 0.0);
  std::vector<long> k(static_cast<std::size_t>(plane.n()));
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (!(region.weight(i) > 0.0)) continue;
    const Vector u = plane.frame().transpose() * (region.point(i) - anchor) / spacing;
    for (int t = 0; t < plane.n(); ++t) k[static_cast<std::size_t>(t)] = std::lround(u[t]);
    const auto it = grid.lookup.find(k);
    if (it == grid.lookup.end()) continue;
    members[static_cast<std::size_t>(it->second)].push_back(i);
    cell_mass[static_cast<std::size_t>(it->second)] += region.weight(i);
  }
  std::size_t total = 0;
  for (const auto& m : members) total += std::max<std::size_t>(1, m.size());
  PlaneQuadrature out{Matrix(plane.dim(), static_cast<Eigen::Index>(total)),
                      Vector(static_cast<Eigen::Index>(total))};
  Eigen::Index col = 0;
  for (Eigen::Index q = 0; q < count; ++q) {
    const auto& m = members[static_cast<std::size_t>(q)];
    if (m.empty()) {
      out.nodes.col(col) = grid.nodes.col(q);
      out.weights[col++] = cell;
      continue;
    }
    for (std::size_t i : m) {
      out.nodes.col(col) = plane.project(region.point(i));
      out.weights[col++] = cell * region.weight(i) / cell_mass[static_cast<std::size_t>(q)];
    }
  }
  return out;
}

AffinePlane clamp_to_ball(const AffinePlane& plane, const Ball& ball) {
  const Vector anchor = plane.project(ball.center);
  const Vector v = anchor - ball.center;
  const double t = v.norm();
  if (t <= ball.radius) return plane;
  const double target = ball.radius * (1.0 - 1e-12);
  return AffinePlane(plane.base() - v * (1.0 - target / t), plane.frame());
}

// ---------------------------------------------------------------------------
// Amplitude search
//
// F(a) = dist_{3B}(mu, a * nu) is convex and piecewise linear in a. An optimal test
// function h at a gives the exact cut F(b) >= F(a) - (b - a) * sum_q c_q h(q), so a
// two-sided cutting-plane search on the bracket [0, a_max] terminates with a certificate.

namespace {

struct Cut {
  double a = 0.0;
  double value = 0.0;
  double slope = 0.0;
};

class AmplitudeObjective {
 public:
  AmplitudeObjective(const DiscreteMeasure& region, PlaneQuadrature quadrature, const Ball& big,
                     const TransportConfig& transport)
      : region_(region), nodes_(std::move(quadrature)), big_(big), transport_(transport) {}

  Cut operator()(double a) {
    // At a = 0 the optimal test function is dist(., complement of 3B) itself.
    if (a == 0.0) {
      double value = 0.0;
      for (std::size_t i = 0; i < region_.size(); ++i)
        value += region_.weight(i) * std::max(0.0, boundary_gap(big_, region_.point(i)));
      double s = 0.0;
      for (Eigen::Index q = 0; q < nodes_.nodes.cols(); ++q)
        s += nodes_.weights[q] * std::max(0.0, boundary_gap(big_, nodes_.nodes.col(q)));
      return Cut{0.0, value, -s};
    }
    ++solves;
    const DiscreteMeasure nu(nodes_.nodes, a * nodes_.weights);
    const auto res = solve_bounded_lipschitz(LipschitzTestProblem(region_, nu, big_), transport_);
    double s = 0.0;
    for (Eigen::Index q = 0; q < nodes_.nodes.cols(); ++q)
      s += nodes_.weights[q] * res.test_function(nodes_.nodes.col(q));
    return Cut{a, res.value, -s};
  }

  int solves = 0;

 private:
  const DiscreteMeasure& region_;
  PlaneQuadrature nodes_;
  Ball big_;
  const TransportConfig& transport_;
};

}  // namespace

AmplitudeFit fit_amplitude(const DiscreteMeasure& region, const AffinePlane& plane,
                           const Ball& ball, double spacing, const AlphaConfig& config,
                           double hint) {
  check_grid_args(plane, ball, spacing);
  AmplitudeFit out;
  const double region_mass = region.total_mass();
  PlaneQuadrature quadrature = plane_quadrature(plane, ball, spacing, config.discretization, region);
  const double plane_mass = quadrature.weights.sum();
  const Ball big = ball.scaled(3.0);
  AmplitudeObjective objective(region, std::move(quadrature), big, config.transport);

  Cut lo = objective(0.0);
  out.distance = lo.value;
  if (!(region_mass > 0.0) || !(plane_mass > 0.0) || lo.slope >= 0.0) return out;

  const double a_max = config.mass_margin * region_mass / plane_mass;
  Cut best = lo;
  auto consider = [&](const Cut& c) {
    if (c.value < best.value) best = c;
  };

  if (config.amplitude_search == AmplitudeSearch::golden_section) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 0.0;
    double b = a_max;
    Cut c1 = objective(b - g * (b - a));
    Cut c2 = objective(a + g * (b - a));
    consider(c1);
    consider(c2);
    for (int it = 0; it < config.amplitude_iterations; ++it) {
      if (c1.value <= c2.value) {
        b = c2.a;
        c2 = c1;
        c1 = objective(b - g * (b - a));
        consider(c1);
      } else {
        a = c1.a;
        c1 = c2;
        c2 = objective(a + g * (b - a));
        consider(c2);
      }
    }
    consider(objective(a_max));
    out.bracket_hit = best.a == a_max;
  } else {
    // Bracket [lo, hi] with slope(lo) < 0 < slope(hi), starting near the hint when given.
    std::optional<Cut> hi;
    if (hint > 0.0 && hint < a_max) {
      const Cut c = objective(hint);
      consider(c);
      if (c.slope < 0.0) {
        lo = c;
        const Cut probe = objective(std::min(a_max, 1.5 * hint));
        consider(probe);
        if (probe.slope > 0.0) hi = probe;
        else lo = probe;
      } else if (c.slope > 0.0) {
        hi = c;
      } else {
        lo = c;
        hi = c;
      }
    }
    if (!hi && lo.a < a_max) {
      const Cut top = objective(a_max);
      consider(top);
      if (top.slope > 0.0) hi = top;
      else out.bracket_hit = true;
    } else if (!hi) {
      out.bracket_hit = true;
    }
    if (hi && hi->a > lo.a) {
      const double scale_abs = 1e-14 * std::max(out.distance, 1e-300);
      int slow = 0;
      for (int it = 0; it < config.amplitude_iterations; ++it) {
        const double a_cross = (hi->value - lo.value + lo.slope * lo.a - hi->slope * hi->a) /
                               (lo.slope - hi->slope);
        const double lower = lo.value + lo.slope * (a_cross - lo.a);
        if (best.value - lower <= config.amplitude_tolerance * best.value + scale_abs) break;
        const double width = hi->a - lo.a;
        double a = a_cross;
        if (!(a > lo.a && a < hi->a) || slow >= 2) {
          a = 0.5 * (lo.a + hi->a);
          slow = 0;
        }
        const Cut c = objective(a);
        consider(c);
        if (c.slope < 0.0) lo = c;
        else if (c.slope > 0.0) hi = c;
        else break;
        slow = (hi->a - lo.a > 0.7 * width) ? slow + 1 : 0;
      }
    }
  }
  out.amplitude = best.a;
  out.distance = best.value;
  out.solves = objective.solves;
  return out;
}

// ---------------------------------------------------------------------------
// alpha

AlphaRecord alpha(const DiscreteMeasure& measure, const SpatialIndex& index, const Ball& ball,
                  int n, const AlphaConfig& config) {
  if (n < 1 || n >= measure.dim())
    throw std::invalid_argument("plane dimension n must satisfy 1 <= n < d");
  const double r = ball.radius;
  const double spacing = config.resolution * r;
  AlphaRecord rec;
  rec.resolution = spacing;
  const DiscreteMeasure region = restrict(measure, index, ball.scaled(3.0));
  if (!(region.total_mass() > 0.0)) {
    rec.empty = true;
    rec.plane = AffinePlane::coordinate(ball.center, n);
    return rec;
  }

  double hint = 0.0;
  auto evaluate = [&](const AffinePlane& plane) {
    AmplitudeFit fit = fit_amplitude(region, plane, ball, spacing, config, hint);
    rec.transport_solves += fit.solves;
    return fit;
  };

  AffinePlane current = clamp_to_ball(fit_plane_l2(region, n).plane, ball);
  AmplitudeFit current_fit = evaluate(current);
  hint = current_fit.amplitude;

  const int d = measure.dim();
  double shift = 0.25 * r;
  double angle = 0.25;
  int used = 0;
  while (used < config.plane_budget && (shift > 1e-6 * r || angle > 1e-6)) {
    const Matrix normals = current.normal_basis();
    const Vector anchor = current.project(ball.center);
    AffinePlane best_plane = current;
    AmplitudeFit best_fit = current_fit;
    bool improved = false;
    auto try_plane = [&](const AffinePlane& candidate) {
      if (used >= config.plane_budget) return;
      ++used;
      const AffinePlane clamped = clamp_to_ball(candidate, ball);
      const AmplitudeFit fit = evaluate(clamped);
      if (fit.distance < best_fit.distance * (1.0 - 1e-12)) {
        best_fit = fit;
        best_plane = clamped;
        improved = true;
      }
    };
    for (int j = 0; j < d - n; ++j)
      for (double sign : {1.0, -1.0})
        try_plane(AffinePlane(anchor + sign * shift * normals.col(j), current.frame()));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d - n; ++j)
        for (double sign : {1.0, -1.0}) {
          Matrix frame = current.frame();
          frame.col(i) = std::cos(angle) * current.frame().col(i) +
                         std::sin(sign * angle) * normals.col(j);
          frame.col(i).normalize();
          try_plane(AffinePlane(anchor, frame));
        }
    if (improved) {
      hint = best_fit.amplitude;
      current = best_plane;
      current_fit = best_fit;
    } else {
      shift *= 0.5;
      angle *= 0.5;
    }
  }

  rec.plane = current;
  rec.amplitude = current_fit.amplitude;
  rec.distance = current_fit.distance;
  rec.bracket_hit = current_fit.bracket_hit;
  rec.plane_evaluations = used + 1;
  rec.value = current_fit.distance / std::pow(r, n + 1);
  return rec;
}

}  // namespace jonesq
