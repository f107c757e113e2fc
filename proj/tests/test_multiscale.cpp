#include <doctest.h>

#include "jonesq/carleson.hpp"
#include "jonesq/generators.hpp"
#include "jonesq/multiscale.hpp"

#include <cmath>
#include <sstream>

using namespace jonesq;

namespace {

// H^1 on the x-axis over [-reach, reach], cells of length step * max(core, |t|).
DiscreteMeasure graded_line(double reach, double step, double core) {
  std::vector<double> xs, ws;
  for (double t = 0.0; t < reach;) {
    const double h = step * std::max(core, t);
    xs.push_back(t + 0.5 * h);
    ws.push_back(h);
    xs.push_back(-(t + 0.5 * h));
    ws.push_back(h);
    t += h;
  }
  Matrix p = Matrix::Zero(2, static_cast<Eigen::Index>(xs.size()));
  Vector w(static_cast<Eigen::Index>(ws.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    p(0, static_cast<Eigen::Index>(i)) = xs[i];
    w[static_cast<Eigen::Index>(i)] = ws[i];
  }
  return DiscreteMeasure(p, w);
}

}  // namespace

TEST_CASE("scale grid") {
  const auto g = ScaleGrid::dyadic(2.0, 8);
  CHECK(g.size() == 9);
  CHECK(g.radii().front() == 2.0);
  CHECK(g.radii().back() == 2.0 / 256.0);
  CHECK(g.weight() == doctest::Approx(std::log(2.0)));
  for (std::size_t j = 1; j < g.size(); ++j) CHECK(g.radii()[j] < g.radii()[j - 1]);
  CHECK(ScaleGrid(1.0, 0.1, std::sqrt(0.5)).size() == 7);
  CHECK_THROWS(ScaleGrid(1.0, 2.0));
  CHECK_THROWS(ScaleGrid(1.0, 0.5, 1.0));
}

TEST_CASE("profile statistics on hand-made sums") {
  JonesProfile prof;
  prof.x = Vector::Zero(2);
  for (int k = 0; k < 9; ++k) prof.scales.push_back({1.0, 0.0, 2.0 + 0.5 * k, false, false, {}});
  const auto lin = profile_stats(prof);
  CHECK(lin.slope == doctest::Approx(0.5));
  CHECK(lin.intercept == doctest::Approx(2.0));
  CHECK(lin.r_squared == doctest::Approx(1.0));
  CHECK(lin.tail_fraction == doctest::Approx((6.0 - 4.0) / 6.0));
  CHECK(!lin.plateau);
  for (auto& s : prof.scales) s.partial_sum = 0.0;
  const auto zero = profile_stats(prof);
  CHECK(zero.flat);
  CHECK(zero.plateau);
}

TEST_CASE("beta profile of a straight segment vanishes") {
  GeneratorSpec s;
  s.kind = GeneratorKind::segment;
  s.atoms = 512;
  const auto seg = generate(s);
  SpatialIndex idx(seg.measure);
  const auto prof = jones_function(seg.measure, idx, seg.measure.point(200), 1, 2.0,
                                   ScaleGrid::dyadic(1.0, 8), CoefficientKind::beta);
  const auto st = profile_stats(prof);
  CHECK(st.flat);
  CHECK(st.total <= 1e-20);
  for (std::size_t j = 1; j < prof.scales.size(); ++j)
    CHECK(prof.scales[j].partial_sum >= prof.scales[j - 1].partial_sum);
}

TEST_CASE("beta profile of a circle plateaus") {
  GeneratorSpec s;
  s.kind = GeneratorKind::circle;
  s.atoms = 4096;
  const auto c = generate(s);
  SpatialIndex idx(c.measure);
  const auto prof = jones_function(c.measure, idx, c.measure.point(0), 1, 2.0,
                                   ScaleGrid::dyadic(1.0, 8), CoefficientKind::beta);
  const auto st = profile_stats(prof);
  CHECK(st.tail_fraction <= 0.05);
  CHECK(st.plateau);
  CHECK(!prof.below_spacing);
  // beta(x, r) ~ r at small scales: consecutive ratios approach 1/2.
  const auto& sc = prof.scales;
  CHECK(sc[7].value / sc[6].value == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("beta partial sums are stable when the scale ratio is refined") {
  GeneratorSpec s;
  s.kind = GeneratorKind::lipschitz_graph;
  s.atoms = 2048;
  const auto g = generate(s);
  SpatialIndex idx(g.measure);
  const Vector x = g.measure.point(1000);
  const auto coarse = jones_function(g.measure, idx, x, 1, 2.0, ScaleGrid(1.0, 1.0 / 256.0, 0.5),
                                     CoefficientKind::beta);
  const auto fine = jones_function(g.measure, idx, x, 1, 2.0, ScaleGrid(1.0, 1.0 / 256.0, std::sqrt(0.5)),
                                   CoefficientKind::beta);
  CHECK(fine.total() == doctest::Approx(coarse.total()).epsilon(0.15));
}

TEST_CASE("profile CSV layout") {
  GeneratorSpec s;
  s.kind = GeneratorKind::segment;
  s.atoms = 64;
  const auto seg = generate(s);
  SpatialIndex idx(seg.measure);
  const auto prof = jones_function(seg.measure, idx, seg.measure.point(3), 1, 2.0, ScaleGrid::dyadic(0.5, 2),
                                   CoefficientKind::beta);
  std::ostringstream out;
  write_profile_csv(out, prof, true);
  const std::string text = out.str();
  CHECK(text.rfind("x1,x2,r,value,partial_sum,flags\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("alpha Carleson sum on a flat graph sits at the grid floor") {
  // Moving uniform line mass onto grid atoms of spacing h costs h^2/4 per cell (tent test
  // functions), so on 3B: alpha ~ 6r * h/4 / r^2 = 1.5 h/r, independent of the cube.
  const double floor = 1.5 * AlphaConfig{}.resolution;
  const auto mu = graded_line(5.0, 0.02, 0.25);
  SpatialIndex idx(mu);
  const Box domain{Vector::Constant(1, -0.25), Vector::Constant(1, 0.25)};
  const LipschitzGraph flat(1, 2, GraphShape::flat, 0.0, domain);
  const auto tree = gamma_cubes(flat, domain.lower, 0.5, 2);
  const auto sum = carleson_sum_alpha(mu, idx, tree, 0, 2, 1);
  REQUIRE(sum.terms.size() == 7);
  for (const auto& t : sum.terms) {
    CHECK(t.value >= 0.9 * floor);
    CHECK(t.value <= 1.25 * floor);
  }
  const double predicted = 3.0 * floor * floor;  // three levels, each of total side l(R)
  CHECK(sum.ratio >= 0.8 * predicted);
  CHECK(sum.ratio <= 1.5 * predicted);

  // Same cubes, measure moved far away.
  const auto far = mu.transformed(Matrix::Identity(2, 2), (Vector(2) << 0.0, 500.0).finished());
  SpatialIndex fidx(far);
  CHECK(carleson_sum_alpha(far, fidx, tree, 0, 2, 1).sum == 0.0);
}

TEST_CASE("beta Carleson sum vanishes on lines and is monotone in the cube family") {
  GeneratorSpec s;
  s.kind = GeneratorKind::segment;
  s.atoms = 512;
  const auto seg = generate(s);
  SpatialIndex idx(seg.measure);
  const DyadicLattice lat{(Vector(2) << 0.0, -0.3).finished(), 1.0};
  StoppingConfig cfg;
  cfg.max_depth = 4;
  const auto tree = stopping_classify(seg.measure, idx, lat, lat.root(), 1, cfg);
  const auto line = carleson_sum_beta(seg.measure, idx, tree, 1);
  CHECK(line.sum < 1e-20);

  GeneratorSpec gs;
  gs.kind = GeneratorKind::lipschitz_graph;
  gs.atoms = 512;
  const auto g = generate(gs);
  SpatialIndex gidx(g.measure);
  const auto glat = DyadicLattice::bounding(g.measure);
  const auto gtree = stopping_classify(g.measure, gidx, glat, glat.root(), 1, cfg);
  const auto full = carleson_sum_beta(g.measure, gidx, gtree, 1);
  CHECK(full.sum > 0.0);
  double partial = 0.0;
  for (std::size_t k = 0; k + 1 < full.terms.size(); ++k) partial += full.terms[k].contribution;
  CHECK(partial <= full.sum);

  const auto threaded = carleson_sum_beta(g.measure, gidx, gtree, 1, 3);
  CHECK(threaded.sum == full.sum);
}
