#include "jonesq/decomposition.hpp"

#include "jonesq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

namespace jonesq {

namespace {

bool interiors_meet(const Box& a, const Box& b) {
  for (Eigen::Index k = 0; k < a.lower.size(); ++k)
    if (!(a.lower[k] < b.upper[k] && b.lower[k] < a.upper[k])) return false;
  return true;
}

double sphere_gap(const Ball& big, const Eigen::Ref<const Vector>& y) {
  return std::max(0.0, big.radius - (y - big.center).norm());
}

}  // namespace

// ---------------------------------------------------------------------------
// Whitney

bool WhitneyDecomposition::all_valid() const {
  return std::all_of(cubes.begin(), cubes.end(),
                     [](const WhitneyCube& c) { return c.separated && c.reaches && c.diam_below; });
}

WhitneyDecomposition whitney_decompose(const LipschitzGraph& graph, const DyadicLattice& lattice,
                                       const DyadicCube& region, const WhitneyConfig& config) {
  if (lattice.origin.size() != graph.d()) throw std::invalid_argument("lattice/graph dimension mismatch");
  if (config.max_depth < 0) throw std::invalid_argument("negative Whitney depth");
  if (!(config.dilation > 10.0)) throw std::invalid_argument("Whitney dilation must exceed 10");
  WhitneyDecomposition out;
  out.lattice = lattice;
  out.region = region;
  out.config = config;
  const double spacing = config.sample_spacing > 0.0
                             ? config.sample_spacing
                             : lattice.side(region.level + config.max_depth) / 8.0;
  const GraphDistance dist(graph, spacing);
  out.sample_spacing = dist.spacing();
  out.slack = dist.slack();

  std::deque<DyadicCube> queue{region};
  while (!queue.empty()) {
    DyadicCube cube = std::move(queue.front());
    queue.pop_front();
    WhitneyCube w;
    w.box = lattice.box(cube);
    w.side = lattice.side(cube.level);
    w.distance_lower = dist.lower(w.box);
    w.distance_upper = dist.upper(w.box);
    const bool accept = dist.lower(w.box.scaled(10.0)) > 0.0 &&
                        lattice.diameter(cube) < w.distance_lower;
    w.cube = cube;
    if (accept) {
      out.cubes.push_back(std::move(w));
    } else if (cube.level - region.level < config.max_depth) {
      for (auto& child : lattice.children(cube)) queue.push_back(std::move(child));
    } else {
      out.unresolved.push_back(std::move(w));
    }
  }
  verify_whitney(out, dist);
  return out;
}

void verify_whitney(WhitneyDecomposition& dec, const GraphDistance& dist) {
  const auto& lattice = dec.lattice;
  std::vector<Box> ten;
  ten.reserve(dec.cubes.size());
  for (auto& w : dec.cubes) {
    w.separated = dist.lower(w.box.scaled(10.0)) > 0.0;
    w.reaches = dist.certainly_meets(w.box.scaled(dec.config.dilation));
    w.diam_below = lattice.diameter(w.cube) < dist.lower(w.box);
    ten.push_back(w.box.scaled(10.0));
  }
  // Sweep on the first coordinate keeps the pair scan near linear for thin layers.
  std::vector<std::size_t> order(dec.cubes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ten[a].lower[0] < ten[b].lower[0]; });
  for (auto& w : dec.cubes) {
    w.neighbours = 0;
    w.neighbour_side_ratio = 1.0;
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t a = order[i];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const std::size_t b = order[j];
      if (ten[b].lower[0] >= ten[a].upper[0]) break;
      if (!interiors_meet(ten[a], ten[b])) continue;
      auto& wa = dec.cubes[a];
      auto& wb = dec.cubes[b];
      ++wa.neighbours;
      ++wb.neighbours;
      const double ratio = std::max(wa.side / wb.side, wb.side / wa.side);
      wa.neighbour_side_ratio = std::max(wa.neighbour_side_ratio, ratio);
      wb.neighbour_side_ratio = std::max(wb.neighbour_side_ratio, ratio);
    }
  }
  dec.max_neighbours = 0;
  dec.max_side_ratio = 1.0;
  for (const auto& w : dec.cubes) {
    dec.max_neighbours = std::max(dec.max_neighbours, w.neighbours);
    dec.max_side_ratio = std::max(dec.max_side_ratio, w.neighbour_side_ratio);
  }
}

namespace {

nlohmann::json box_json(const Box& b) {
  return {{"lower", std::vector<double>(b.lower.data(), b.lower.data() + b.lower.size())},
          {"upper", std::vector<double>(b.upper.data(), b.upper.data() + b.upper.size())}};
}

nlohmann::json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

nlohmann::json to_json(const WhitneyDecomposition& dec) {
  nlohmann::json cubes = nlohmann::json::array();
  for (const auto& w : dec.cubes)
    cubes.push_back({{"level", w.cube.level},
                     {"index", w.cube.index},
                     {"box", box_json(w.box)},
                     {"side", w.side},
                     {"distance_lower", w.distance_lower},
                     {"distance_upper", w.distance_upper},
                     {"separated", w.separated},
                     {"reaches", w.reaches},
                     {"diam_below_distance", w.diam_below},
                     {"neighbours", w.neighbours},
                     {"neighbour_side_ratio", w.neighbour_side_ratio}});
  nlohmann::json unresolved = nlohmann::json::array();
  for (const auto& w : dec.unresolved)
    unresolved.push_back({{"level", w.cube.level}, {"index", w.cube.index}, {"box", box_json(w.box)}});
  return {{"region", {{"level", dec.region.level}, {"index", dec.region.index}}},
          {"dilation", dec.config.dilation},
          {"max_depth", dec.config.max_depth},
          {"sample_spacing", dec.sample_spacing},
          {"certification_slack", dec.slack},
          {"max_neighbours", dec.max_neighbours},
          {"max_side_ratio", dec.max_side_ratio},
          {"all_valid", dec.all_valid()},
          {"cubes", std::move(cubes)},
          {"unresolved", std::move(unresolved)}};
}

// ---------------------------------------------------------------------------
// Exceptional set

ExceptionalSet::ExceptionalSet(double threshold, int n, std::vector<ExceptionalBall> balls,
                               std::size_t h0_count)
    : threshold_(threshold), n_(n), balls_(std::move(balls)), h0_count_(h0_count) {}

bool ExceptionalSet::in_hk(const Eigen::Ref<const Vector>& y, double k) const {
  return std::any_of(balls_.begin(), balls_.end(), [&](const ExceptionalBall& b) {
    return (y - b.center).norm() <= k * 5.0 * b.r_x;
  });
}

std::optional<double> critical_radius(const DiscreteMeasure& measure, const SpatialIndex& index,
                                      const Eigen::Ref<const Vector>& x, int n, double threshold,
                                      double r_lo) {
  if (!(threshold > 0.0) || !(r_lo > 0.0)) throw std::invalid_argument("bad density threshold");
  const double total = measure.total_mass();
  if (!(total > 0.0)) return std::nullopt;
  // Beyond (total / M)^(1/n) the density is below M whatever the mass.
  const double reach = std::max(r_lo, std::pow(total / threshold, 1.0 / n)) * (1.0 + 1e-9);
  const auto hits = index.ball_query(Ball(Vector(x), reach));
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(hits.size());
  for (auto i : hits) atoms.emplace_back((measure.point(i) - x).norm(), measure.weight(i));
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::optional<double> best;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    cumulative += atoms[k].second;
    if (k + 1 < atoms.size() && atoms[k + 1].first == atoms[k].first) continue;
    const double rho = std::pow(cumulative / threshold, 1.0 / n);
    if (rho >= atoms[k].first && rho >= r_lo) best = std::max(best.value_or(0.0), rho);
  }
  return best;
}

ExceptionalSet exceptional_set(const DiscreteMeasure& measure, const SpatialIndex& index,
                               const Matrix& samples, int n, double threshold,
                               const RadiusGrid& grid) {
  if (grid.empty()) throw std::invalid_argument("empty radius grid");
  if (samples.rows() != measure.dim()) throw std::invalid_argument("sample dimension mismatch");
  const double r_lo = grid.radii().front();
  std::vector<ExceptionalBall> h0;
  for (Eigen::Index s = 0; s < samples.cols(); ++s) {
    if (auto r = critical_radius(measure, index, samples.col(s), n, threshold, r_lo))
      h0.push_back({static_cast<std::size_t>(s), samples.col(s), *r});
  }
  std::stable_sort(h0.begin(), h0.end(),
                   [](const ExceptionalBall& a, const ExceptionalBall& b) { return a.r_x > b.r_x; });
  std::vector<ExceptionalBall> chosen;
  for (const auto& cand : h0) {
    const bool free = std::none_of(chosen.begin(), chosen.end(), [&](const ExceptionalBall& c) {
      return (cand.center - c.center).norm() <= cand.r_x + c.r_x;
    });
    if (free) chosen.push_back(cand);
  }
  return ExceptionalSet(threshold, n, std::move(chosen), h0.size());
}

ExceptionalCheck verify_exceptional(const ExceptionalSet& set, const DiscreteMeasure& measure,
                                    const SpatialIndex& index, const Matrix& samples,
                                    const RadiusGrid& grid, double tolerance) {
  ExceptionalCheck chk;
  const auto& balls = set.balls();
  const double M = set.threshold();
  const int n = set.n();
  chk.min_inner_density = balls.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < balls.size(); ++i) {
    for (std::size_t j = i + 1; j < balls.size(); ++j)
      if ((balls[i].center - balls[j].center).norm() <= balls[i].r_x + balls[j].r_x)
        chk.fifth_balls_disjoint = false;
    const double inner = mass(measure, index, Ball(balls[i].center, balls[i].r_x)) /
                         std::pow(balls[i].r_x, n);
    const Ball delta = balls[i].delta();
    const double outer = mass(measure, index, delta) / std::pow(delta.radius, n);
    chk.min_inner_density = std::min(chk.min_inner_density, inner);
    chk.max_outer_density = std::max(chk.max_outer_density, outer);
    if (inner < M * (1.0 - tolerance) || inner > std::pow(5.0, n) * outer * (1.0 + tolerance) ||
        outer > M * (1.0 + tolerance))
      chk.density_sandwich = false;
  }
  const double r_lo = grid.radii().front();
  for (Eigen::Index s = 0; s < samples.cols(); ++s) {
    if (!critical_radius(measure, index, samples.col(s), n, M, r_lo)) continue;
    if (!set.in_h(samples.col(s))) chk.covers_h0 = false;
  }
  return chk;
}

nlohmann::json to_json(const ExceptionalSet& set) {
  nlohmann::json balls = nlohmann::json::array();
  for (const auto& b : set.balls())
    balls.push_back({{"sample", b.sample}, {"center", vec_json(b.center)}, {"r_x", b.r_x},
                     {"radius", 5.0 * b.r_x}});
  return {{"M", set.threshold()}, {"n", set.n()}, {"h0_points", set.h0_count()},
          {"balls", std::move(balls)}};
}

// ---------------------------------------------------------------------------
// Gamma cubes

std::vector<int> GammaTree::subtree(int root, int depth) const {
  std::vector<int> out;
  std::deque<int> queue{root};
  const int base = cubes.at(static_cast<std::size_t>(root)).level;
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    out.push_back(c);
    const auto& cube = cubes[static_cast<std::size_t>(c)];
    if (cube.level - base < depth)
      for (int ch : cube.children) queue.push_back(ch);
  }
  return out;
}

GammaTree gamma_cubes(const LipschitzGraph& graph, const Vector& lower, double side, int levels,
                      const ExceptionalSet* exceptional, int subsamples) {
  const int n = graph.n();
  if (lower.size() != n) throw std::invalid_argument("parameter cube must be n-dimensional");
  if (!(side > 0.0) || levels < 0 || subsamples < 1) throw std::invalid_argument("bad Gamma-cube parameters");
  GammaTree tree;
  GammaCube root;
  root.index.assign(static_cast<std::size_t>(n), 0);
  root.parameter_lower = lower;
  root.side = side;
  tree.cubes.push_back(std::move(root));

  const int per_axis = subsamples + 1;
  long points = 1;
  for (int k = 0; k < n; ++k) points *= per_axis;
  for (std::size_t c = 0; c < tree.cubes.size(); ++c) {
    GammaCube& q = tree.cubes[c];
    Matrix lifted(graph.d(), points);
    Vector u(n);
    for (long s = 0; s < points; ++s) {
      long rest = s;
      for (int k = 0; k < n; ++k) {
        u[k] = q.parameter_lower[k] + q.side * static_cast<double>(rest % per_axis) / subsamples;
        rest /= per_axis;
      }
      lifted.col(s) = graph.lift(u);
    }
    double diam = 0.0;
    for (long a = 0; a < points; ++a)
      for (long b = a + 1; b < points; ++b) diam = std::max(diam, (lifted.col(a) - lifted.col(b)).norm());
    q.diameter = diam;
    q.center = graph.lift(q.parameter_lower.array() + 0.5 * q.side);
    q.ball = Ball(q.center, 3.0 * diam);
    q.good = true;
    if (exceptional && !exceptional->empty()) {
      bool inside = true;
      for (long s = 0; s < points && inside; ++s) inside = exceptional->in_hk(lifted.col(s), 9.0);
      q.good = !inside;
    }
    if (q.level < levels) {
      const int first = static_cast<int>(tree.cubes.size());
      const GammaCube parent = q;  // q is invalidated by push_back
      for (int mask = 0; mask < (1 << n); ++mask) {
        GammaCube ch;
        ch.level = parent.level + 1;
        ch.side = 0.5 * parent.side;
        ch.parent = static_cast<int>(c);
        ch.index = parent.index;
        ch.parameter_lower = parent.parameter_lower;
        for (int k = 0; k < n; ++k) {
          const int bit = (mask >> k) & 1;
          ch.index[static_cast<std::size_t>(k)] = 2 * ch.index[static_cast<std::size_t>(k)] + bit;
          ch.parameter_lower[k] += bit * ch.side;
        }
        tree.cubes.push_back(std::move(ch));
      }
      for (int mask = 0; mask < (1 << n); ++mask) tree.cubes[c].children.push_back(first + mask);
    }
  }
  return tree;
}

nlohmann::json to_json(const GammaTree& tree) {
  nlohmann::json cubes = nlohmann::json::array();
  for (const auto& q : tree.cubes)
    cubes.push_back({{"level", q.level},
                     {"index", q.index},
                     {"parameter_lower", vec_json(q.parameter_lower)},
                     {"side", q.side},
                     {"center", vec_json(q.center)},
                     {"diameter", q.diameter},
                     {"ball_radius", q.ball.radius},
                     {"good", q.good},
                     {"parent", q.parent}});
  return {{"cubes", std::move(cubes)}};
}

// ---------------------------------------------------------------------------
// Stopping cubes

const char* to_string(CubeLabel label) {
  switch (label) {
    case CubeLabel::high_density: return "HD";
    case CubeLabel::low_density: return "LD";
    case CubeLabel::big_alpha: return "BA";
    case CubeLabel::good: return "good";
    case CubeLabel::below_stop: return "below-stop";
    case CubeLabel::ineligible: return "ineligible";
  }
  return "?";
}

namespace {

bool is_stop(CubeLabel l) {
  return l == CubeLabel::high_density || l == CubeLabel::low_density || l == CubeLabel::big_alpha;
}

}  // namespace

std::vector<int> StoppedTree::stop_cubes() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < cubes.size(); ++i)
    if (is_stop(cubes[i].label)) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> StoppedTree::good_cubes() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < cubes.size(); ++i)
    if (cubes[i].label == CubeLabel::good) out.push_back(static_cast<int>(i));
  return out;
}

double alpha_square_sum(const DiscreteMeasure& measure, const SpatialIndex& index,
                        const Eigen::Ref<const Vector>& x, int n, const ScaleGrid& grid,
                        const AlphaConfig& config, bool bound_only) {
  double sum = 0.0;
  for (double r : grid.radii()) {
    const Ball ball(Vector(x), r);
    double value = 0.0;
    if (bound_only) {
      const Ball big = ball.scaled(3.0);
      for (auto i : index.ball_query(big)) value += measure.weight(i) * sphere_gap(big, measure.point(i));
      value /= std::pow(r, n + 1);
    } else {
      value = alpha(measure, index, ball, n, config).value;
    }
    sum += grid.weight() * value * value;
  }
  return sum;
}

StoppedTree stopping_classify(const DiscreteMeasure& measure, const SpatialIndex& index,
                              const DyadicLattice& lattice, const DyadicCube& root, int n,
                              const StoppingConfig& config) {
  if (!(config.M > config.N && config.N > 1.0)) throw std::invalid_argument("need M > N > 1");
  if (config.max_depth < 0) throw std::invalid_argument("negative stopping depth");
  if (measure.empty()) throw std::invalid_argument("empty measure");
  StoppedTree tree;
  tree.lattice = lattice;
  tree.root = root;
  tree.config = config;
  tree.r0 = config.r0 > 0.0 ? config.r0 : 10.0 * lattice.diameter(root);
  const ScaleGrid f_grid =
      config.f_grid ? *config.f_grid
                    : ScaleGrid::dyadic(std::max(diameter_bound(measure), lattice.diameter(root)), 8);
  const double eligible_diam = tree.r0 / 10.0 * (1.0 + 1e-12);

  // 0 unknown, 1 in F, 2 not in F
  std::vector<char> in_f(measure.size(), 0);
  auto resolve_f = [&](const std::vector<std::size_t>& atoms) {
    std::vector<char> result(atoms.size(), 0);
    std::vector<char> full(atoms.size(), 0);
    parallel_for(atoms.size(), config.workers, [&](std::size_t k) {
      const auto x = measure.point(atoms[k]);
      if (alpha_square_sum(measure, index, x, n, f_grid, config.alpha, true) <= config.N) {
        result[k] = 1;
        return;
      }
      full[k] = 1;
      result[k] = alpha_square_sum(measure, index, x, n, f_grid, config.alpha, false) <= config.N ? 1 : 2;
    });
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      in_f[atoms[k]] = result[k];
      tree.alpha_profiles += static_cast<std::size_t>(full[k]);
    }
  };

  std::vector<int> level{0};
  StoppedCube top;
  top.cube = root;
  tree.cubes.push_back(top);
  for (int depth = 0; !level.empty(); ++depth) {
    // Masses for the whole level.
    parallel_for(level.size(), config.workers, [&](std::size_t k) {
      StoppedCube& q = tree.cubes[static_cast<std::size_t>(level[k])];
      const Box box = lattice.box(q.cube);
      q.depth = depth;
      q.side = lattice.side(q.cube.level);
      q.diameter = lattice.diameter(q.cube);
      q.mass = mass(measure, index, box);
      q.mass_3q = mass(measure, index, box.scaled(3.0));
      q.mass_ball = mass(measure, index, Ball(box.center(), 3.0 * q.diameter));
    });

    std::vector<int> pending;
    for (int c : level) {
      StoppedCube& q = tree.cubes[static_cast<std::size_t>(c)];
      const bool under_stop =
          q.parent >= 0 && (is_stop(tree.cubes[static_cast<std::size_t>(q.parent)].label) ||
                            tree.cubes[static_cast<std::size_t>(q.parent)].label == CubeLabel::below_stop);
      const double ln = std::pow(q.side, n);
      if (under_stop) q.label = CubeLabel::below_stop;
      else if (q.diameter > eligible_diam) q.label = CubeLabel::ineligible;
      else if (q.mass_ball >= config.M * ln) q.label = CubeLabel::high_density;
      else if (q.mass_3q <= ln / config.M) q.label = CubeLabel::low_density;
      else pending.push_back(c);
    }

    // BA: Q meets F unless none of its atoms lies in F. Atoms are tried in index order,
    // preferring ones already known to be in F; the outcome does not depend on the order.
    std::vector<std::vector<std::size_t>> atoms(pending.size());
    for (std::size_t k = 0; k < pending.size(); ++k)
      atoms[k] = index.box_query(lattice.box(tree.cubes[static_cast<std::size_t>(pending[k])].cube));
    std::vector<char> done(pending.size(), 0);
    for (;;) {
      std::vector<std::size_t> ask;
      for (std::size_t k = 0; k < pending.size(); ++k) {
        if (done[k]) continue;
        StoppedCube& q = tree.cubes[static_cast<std::size_t>(pending[k])];
        const auto& a = atoms[k];
        auto known = std::find_if(a.begin(), a.end(), [&](std::size_t i) { return in_f[i] == 1; });
        if (known != a.end()) {
          q.label = CubeLabel::good;
          q.witness = static_cast<long>(*known);
          done[k] = 1;
          continue;
        }
        auto unknown = std::find_if(a.begin(), a.end(), [&](std::size_t i) { return in_f[i] == 0; });
        if (unknown == a.end()) {
          q.label = CubeLabel::big_alpha;
          done[k] = 1;
          continue;
        }
        ask.push_back(*unknown);
      }
      if (ask.empty()) break;
      std::sort(ask.begin(), ask.end());
      ask.erase(std::unique(ask.begin(), ask.end()), ask.end());
      resolve_f(ask);
    }

    std::vector<int> next;
    if (depth < config.max_depth) {
      for (int c : level) {
        const DyadicCube cube = tree.cubes[static_cast<std::size_t>(c)].cube;
        for (auto& child : lattice.children(cube)) {
          StoppedCube ch;
          ch.cube = std::move(child);
          ch.parent = c;
          next.push_back(static_cast<int>(tree.cubes.size()));
          tree.cubes.push_back(std::move(ch));
        }
      }
    }
    level = std::move(next);
  }

  tree.root_mass = tree.cubes.front().mass;
  for (int s : tree.stop_cubes()) tree.stopped_mass += tree.cubes[static_cast<std::size_t>(s)].mass;
  return tree;
}

StoppingCheck verify_stopping(const StoppedTree& tree) {
  StoppingCheck chk;
  const double eligible_diam = tree.r0 / 10.0 * (1.0 + 1e-12);
  const auto& lattice = tree.lattice;
  std::vector<int> stops = tree.stop_cubes();
  for (std::size_t i = 0; i < stops.size(); ++i)
    for (std::size_t j = 0; j < stops.size(); ++j) {
      if (i == j) continue;
      const auto& a = tree.cubes[static_cast<std::size_t>(stops[i])].cube;
      const auto& b = tree.cubes[static_cast<std::size_t>(stops[j])].cube;
      if (a == b) chk.stops_disjoint = false;
      if (lattice.is_ancestor(a, b)) chk.stops_maximal = chk.stops_disjoint = false;
    }
  for (const auto& q : tree.cubes) {
    bool stop_above = false;
    for (int p = q.parent; p >= 0; p = tree.cubes[static_cast<std::size_t>(p)].parent)
      if (is_stop(tree.cubes[static_cast<std::size_t>(p)].label)) stop_above = true;
    const bool eligible = q.diameter <= eligible_diam;
    bool ok = true;
    switch (q.label) {
      case CubeLabel::below_stop: ok = stop_above; break;
      case CubeLabel::ineligible: ok = !stop_above && !eligible; break;
      case CubeLabel::good: ok = !stop_above && eligible; break;
      default: ok = !stop_above && eligible; break;
    }
    if (!ok) chk.labels_consistent = false;
  }
  chk.stopped_fraction = tree.root_mass > 0.0 ? tree.stopped_mass / tree.root_mass : 0.0;
  return chk;
}

nlohmann::json to_json(const StoppedTree& tree) {
  nlohmann::json cubes = nlohmann::json::array();
  for (const auto& q : tree.cubes)
    cubes.push_back({{"level", q.cube.level},
                     {"index", q.cube.index},
                     {"label", to_string(q.label)},
                     {"mass", q.mass},
                     {"mass_3q", q.mass_3q},
                     {"mass_ball", q.mass_ball},
                     {"side", q.side},
                     {"parent", q.parent},
                     {"witness", q.witness}});
  std::size_t counts[6] = {};
  for (const auto& q : tree.cubes) ++counts[static_cast<int>(q.label)];
  nlohmann::json summary;
  for (int l = 0; l < 6; ++l) summary[to_string(static_cast<CubeLabel>(l))] = counts[l];
  return {{"root", {{"level", tree.root.level}, {"index", tree.root.index}}},
          {"M", tree.config.M},
          {"N", tree.config.N},
          {"r0", tree.r0},
          {"max_depth", tree.config.max_depth},
          {"root_mass", tree.root_mass},
          {"stopped_mass", tree.stopped_mass},
          {"alpha_profiles", tree.alpha_profiles},
          {"label_counts", std::move(summary)},
          {"cubes", std::move(cubes)}};
}

}  // namespace jonesq
