#include <doctest.h>

#include "jonesq/decomposition.hpp"
#include "jonesq/generators.hpp"

#include <cmath>
#include <random>

using namespace jonesq;

namespace {

LipschitzGraph x_axis(double half_width = 20.0) {
  return LipschitzGraph(1, 2, GraphShape::flat, 0.0,
                        Box{Vector::Constant(1, -half_width), Vector::Constant(1, half_width)});
}

DyadicLattice unit_lattice(double x0, double y0) {
  return DyadicLattice{(Vector(2) << x0, y0).finished(), 1.0};
}

}  // namespace

TEST_CASE("Whitney cubes far from the graph") {
  const auto lat = unit_lattice(0.0, 1.0);
  WhitneyConfig cfg;
  cfg.max_depth = 6;
  const auto dec = whitney_decompose(x_axis(), lat, lat.root(), cfg);
  CHECK(dec.unresolved.empty());
  CHECK(dec.cubes.size() < 40);
  for (const auto& w : dec.cubes) {
    CHECK(w.diam_below);
    CHECK(std::sqrt(2.0) * w.side < w.box.lower[1]);  // exact distance to the x-axis
  }
  double area = 0.0;
  for (const auto& w : dec.cubes) area += w.side * w.side;
  CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Whitney cubes of the unit square above the x-axis") {
  const auto lat = unit_lattice(0.0, 0.0);
  WhitneyConfig cfg;
  cfg.max_depth = 7;
  const auto dec = whitney_decompose(x_axis(), lat, lat.root(), cfg);
  REQUIRE(!dec.cubes.empty());
  CHECK(dec.all_valid());
  for (const auto& w : dec.cubes) {
    // Geometry against the exact distance y.
    const double height = w.box.lower[1];
    CHECK(height > std::sqrt(2.0) * w.side);
    CHECK(w.box.scaled(10.0).lower[1] > 0.0);
    CHECK(w.box.scaled(cfg.dilation).lower[1] <= 0.0);
    // Side comparable to height above the graph.
    CHECK(height / w.side < 30.0);
  }
  for (const auto& w : dec.unresolved) {
    CHECK(w.cube.level == cfg.max_depth);
    CHECK(w.box.lower[1] < 6.0 * w.side);
  }
  // 10Q and 10Q' can meet across a few generations: heights are multiples of the side, so
  // h' - 4.5 s' >= s'/2 while h + 5.5 s < 18 s, giving s'/s <= 32.
  CHECK(dec.max_side_ratio <= 32.0);
  CHECK(dec.max_neighbours > 0);
  // Covering: points above the unresolved layer sit in exactly one cube.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double layer = 6.0 * lat.side(cfg.max_depth);
  for (int t = 0; t < 500; ++t) {
    const Vector y = (Vector(2) << u(rng), layer + (1.0 - layer) * u(rng)).finished();
    int hits = 0;
    for (const auto& w : dec.cubes) hits += w.box.contains(y) ? 1 : 0;
    CHECK(hits == 1);
  }
}

TEST_CASE("cells touching the graph at the depth cap are unresolved") {
  const auto lat = unit_lattice(0.0, 0.0);
  WhitneyConfig cfg;
  cfg.max_depth = 0;
  const auto dec = whitney_decompose(x_axis(), lat, lat.root(), cfg);
  CHECK(dec.cubes.empty());
  REQUIRE(dec.unresolved.size() == 1);
  CHECK(dec.unresolved[0].cube == lat.root());
}

TEST_CASE("certified graph distance brackets the true distance") {
  const LipschitzGraph g(1, 2, GraphShape::sine, 0.9, Box{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)});
  const GraphDistance dist(g, 0.05);
  // Dense reference sample.
  const Matrix dense = g.sample(1e-4);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const Vector y = (Vector(2) << 0.8 * u(rng), 0.5 * u(rng)).finished();
    const double truth = (dense.colwise() - y).colwise().norm().minCoeff();
    CHECK(dist.lower(y) <= truth + 1e-12);
    CHECK(dist.upper(y) >= truth - 1e-12);
  }
}

TEST_CASE("exceptional set examples") {
  const auto g = x_axis(1.0);
  const Matrix samples = g.sample(0.01);
  const RadiusGrid grid = RadiusGrid::geometric(0.01, 4.0);

  GeneratorSpec s;
  s.kind = GeneratorKind::segment;
  s.atoms = 200;
  s.length = 1.0;
  const auto seg = generate(s);  // density 1 on [0, 1]
  SpatialIndex idx(seg.measure);
  const auto h = exceptional_set(seg.measure, idx, samples, 1, 10.0, grid);
  CHECK(h.empty());

  Matrix one(2, 1);
  one << 0.3, 0.0;
  const double W = 0.5, M = 20.0;
  const DiscreteMeasure atom(one, Vector::Constant(1, W));
  SpatialIndex aidx(atom);
  const auto r = critical_radius(atom, aidx, one.col(0), 1, M, grid.radii().front());
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(W / M).epsilon(1e-12));
  const auto ha = exceptional_set(atom, aidx, samples, 1, M, grid);
  REQUIRE(!ha.empty());
  CHECK(ha.in_h(one.col(0)));
  const auto chk = verify_exceptional(ha, atom, aidx, samples, grid);
  CHECK(chk.fifth_balls_disjoint);
  CHECK(chk.density_sandwich);
  CHECK(chk.covers_h0);
}

TEST_CASE("exceptional set invariants and shrinking in M") {
  GeneratorSpec s;
  s.kind = GeneratorKind::lipschitz_graph;
  s.atoms = 400;
  s.density.exponent = -0.5;  // density blows up at the center
  s.random_positions = true;
  const auto gen = generate(s);
  SpatialIndex idx(gen.measure);
  const Matrix samples = gen.graph->sample(0.01);
  const RadiusGrid grid = RadiusGrid::geometric(0.02, 4.0);
  double previous = 2.0;
  for (double M : {1.0, 10.0, 100.0, 1000.0}) {
    const auto h = exceptional_set(gen.measure, idx, samples, 1, M, grid);
    const auto chk = verify_exceptional(h, gen.measure, idx, samples, grid);
    CHECK(chk.fifth_balls_disjoint);
    CHECK(chk.density_sandwich);
    CHECK(chk.covers_h0);
    std::size_t inside = 0;
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
      if (h.in_h(samples.col(c))) CHECK(h.in_hk(samples.col(c), 9.0));
      inside += h.in_hk(samples.col(c), 9.0) ? 1 : 0;
    }
    const double fraction = static_cast<double>(inside) / static_cast<double>(samples.cols());
    CHECK(fraction <= previous);
    previous = fraction;
    if (M == 1000.0) CHECK(fraction == 0.0);
  }
}

TEST_CASE("Gamma cubes") {
  const LipschitzGraph g(1, 2, GraphShape::cone, 0.3, Box{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)});
  const auto tree = gamma_cubes(g, Vector::Constant(1, -1.0), 2.0, 3);
  CHECK(tree.cubes.size() == 15);
  for (const auto& q : tree.cubes) {
    CHECK(q.good);
    if (q.parent >= 0) {
      const auto& p = tree.cubes[static_cast<std::size_t>(q.parent)];
      CHECK(q.side == p.side / 2.0);
      CHECK(q.parameter_lower[0] >= p.parameter_lower[0]);
      CHECK(q.parameter_lower[0] + q.side <= p.parameter_lower[0] + p.side);
    }
    if (!q.children.empty()) {
      const auto& a = tree.cubes[static_cast<std::size_t>(q.children[0])];
      const auto& b = tree.cubes[static_cast<std::size_t>(q.children[1])];
      CHECK(a.parameter_lower[0] == q.parameter_lower[0]);
      CHECK(b.parameter_lower[0] == a.parameter_lower[0] + a.side);
    }
    CHECK(q.ball.radius == doctest::Approx(3.0 * q.diameter));
    CHECK(q.center[1] == doctest::Approx(0.3 * std::abs(q.center[0])));
  }
  CHECK(tree.subtree(0, 1).size() == 3);

  // A heavy atom near u = 0.6 makes the small cubes around it bad.
  Matrix one(2, 1);
  one << 0.6, 0.18;
  const DiscreteMeasure atom(one, Vector::Constant(1, 0.05));
  SpatialIndex aidx(atom);
  const auto h = exceptional_set(atom, aidx, g.sample(0.005), 1, 10.0, RadiusGrid::geometric(0.001, 4.0));
  REQUIRE(!h.empty());
  const auto marked = gamma_cubes(g, Vector::Constant(1, -1.0), 2.0, 5, &h);
  int bad = 0;
  for (const auto& q : marked.cubes) {
    bool inside = true;
    for (int k = 0; k <= 8; ++k)
      inside = inside && h.in_hk(g.lift(Vector::Constant(1, q.parameter_lower[0] + q.side * k / 8.0)), 9.0);
    CHECK(q.good == !inside);
    bad += q.good ? 0 : 1;
  }
  CHECK(bad > 0);
  CHECK(marked.cubes[0].good);
}

TEST_CASE("stopping time on a uniform segment with huge thresholds") {
  GeneratorSpec s;
  s.kind = GeneratorKind::segment;
  s.atoms = 256;
  const auto seg = generate(s);
  SpatialIndex idx(seg.measure);
  const auto lat = DyadicLattice::bounding(seg.measure);
  StoppingConfig cfg;
  cfg.M = 1e12;
  cfg.N = 1e11;
  cfg.max_depth = 4;
  const auto tree = stopping_classify(seg.measure, idx, lat, lat.root(), 1, cfg);
  // Empty cubes next to the segment are BA (no point of F inside) but carry no mass.
  const auto chk = verify_stopping(tree);
  CHECK(chk.stops_disjoint);
  CHECK(chk.stops_maximal);
  CHECK(chk.labels_consistent);
  CHECK(tree.stopped_mass == 0.0);
  CHECK(tree.alpha_profiles == 0);
  for (const auto& q : tree.cubes)
    if (q.mass > 0.0) CHECK(q.label == CubeLabel::good);
}

TEST_CASE("stopping time labels LD, HD and BA") {
  // Two clusters with an empty gap: cubes in the gap far from both clusters are LD.
  Matrix p(2, 200);
  for (int i = 0; i < 100; ++i) {
    p(0, i) = 0.002 * i;
    p(1, i) = 0.0;
    p(0, 100 + i) = 0.8 + 0.002 * i;
    p(1, 100 + i) = 0.0;
  }
  const DiscreteMeasure mu(p, Vector::Constant(200, 0.005));
  SpatialIndex idx(mu);
  const DyadicLattice lat{(Vector(2) << 0.0, -0.5).finished(), 1.0};
  StoppingConfig cfg;
  cfg.M = 1e6;
  cfg.N = 1e5;
  cfg.max_depth = 4;
  // Empty cubes with mass in 3Q are BA, so the gap is only reached through ineligible
  // ancestors: depth 3 is the first eligible level.
  cfg.r0 = 10.0 * lat.diameter(lat.locate(Vector::Zero(2), 3));
  const auto tree = stopping_classify(mu, idx, lat, lat.root(), 1, cfg);
  bool ld = false;
  for (const auto& q : tree.cubes)
    if (q.label == CubeLabel::low_density) {
      ld = true;
      CHECK(q.mass_3q <= std::pow(q.side, 1) / cfg.M);
    }
  CHECK(ld);
  CHECK(verify_stopping(tree).labels_consistent);

  // A heavy atom: HD at the first cube on its ancestor chain with mu(B_Q) >= M l(Q).
  Matrix heavy(2, 1);
  heavy << 0.3, 0.1;
  const DiscreteMeasure atom(heavy, Vector::Ones(1));
  SpatialIndex aidx(atom);
  cfg.M = 40.0;
  cfg.N = 2.0;
  cfg.max_depth = 6;
  cfg.f_grid = ScaleGrid(1000.0, 1000.0);  // one huge scale keeps the atom in F
  const DyadicLattice unit{Vector::Zero(2), 1.0};
  const auto ht = stopping_classify(atom, aidx, unit, unit.root(), 1, cfg);
  int expected_level = -1;
  for (int level = 0; level <= 6 && expected_level < 0; ++level) {
    const auto c = unit.locate(heavy.col(0), level);
    const Box b = unit.box(c);
    const double diam = unit.diameter(c);
    if ((heavy.col(0) - b.center()).norm() <= 3.0 * diam && 1.0 >= cfg.M * unit.side(level)) expected_level = level;
  }
  REQUIRE(expected_level >= 0);
  int found = -1;
  for (const auto& q : ht.cubes)
    if (q.label == CubeLabel::high_density && unit.is_ancestor(q.cube, unit.locate(heavy.col(0), 6)))
      found = q.cube.level;
  CHECK(found == expected_level);
  CHECK(verify_stopping(ht).stops_maximal);
}

TEST_CASE("stopped mass stays small on graph measures") {
  GeneratorSpec s;
  s.kind = GeneratorKind::lipschitz_graph;
  s.atoms = 512;
  const auto gen = generate(s);
  SpatialIndex idx(gen.measure);
  const auto lat = DyadicLattice::bounding(gen.measure);
  StoppingConfig cfg;
  cfg.max_depth = 5;
  const auto tree = stopping_classify(gen.measure, idx, lat, lat.root(), 1, cfg);
  const auto chk = verify_stopping(tree);
  CHECK(chk.stops_disjoint);
  CHECK(chk.labels_consistent);
  CHECK(chk.stopped_fraction <= 3 * 0.05);
  CHECK(!tree.good_cubes().empty());
  const auto j = to_json(tree);
  CHECK(j["cubes"].size() == tree.cubes.size());
}
