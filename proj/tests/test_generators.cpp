#include <doctest.h>

#include "jonesq/generators.hpp"
#include "jonesq/io.hpp"

#include <cmath>
#include <sstream>

using namespace jonesq;

namespace {

std::string csv_of(const DiscreteMeasure& m) {
  std::ostringstream out;
  write_measure_csv(out, m);
  return out.str();
}

}  // namespace

TEST_CASE("segment of 100 atoms") {
  GeneratorSpec s;
  s.kind = GeneratorKind::segment;
  s.atoms = 100;
  const auto g = generate(s);
  CHECK(g.measure.size() == 100);
  CHECK(g.measure.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.measure.points().row(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.measure.points().row(0).minCoeff() > 0.0);
  CHECK(g.measure.points().row(0).maxCoeff() < 1.0);
}

TEST_CASE("every kind normalises its mass and is deterministic") {
  for (auto kind : {GeneratorKind::segment, GeneratorKind::circle, GeneratorKind::plane_patch,
                    GeneratorKind::lipschitz_graph, GeneratorKind::four_corner_cantor,
                    GeneratorKind::graph_union, GeneratorKind::perturbed_graph}) {
    GeneratorSpec s;
    s.kind = kind;
    s.atoms = 300;
    s.depth = 4;
    s.noise = 0.01;
    s.random_positions = kind != GeneratorKind::four_corner_cantor;
    s.mass = 2.5;
    if (kind == GeneratorKind::plane_patch) {
      s.n = 2;
      s.d = 3;
    }
    const auto a = generate(s);
    const auto b = generate(s);
    CAPTURE(to_string(kind));
    CHECK(std::abs(a.measure.total_mass() - 2.5) <= 1e-12 * 2.5);
    CHECK(csv_of(a.measure) == csv_of(b.measure));
    s.seed = 99;
    if (kind != GeneratorKind::four_corner_cantor)
      CHECK(csv_of(generate(s).measure) != csv_of(a.measure));
  }
}

TEST_CASE("inconsistent dimensions are rejected") {
  GeneratorSpec s;
  s.n = 2;
  s.d = 2;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s.kind = GeneratorKind::four_corner_cantor;
  s.n = 1;
  s.d = 3;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
}

TEST_CASE("four-corner Cantor construction and self-similarity") {
  GeneratorSpec s;
  s.kind = GeneratorKind::four_corner_cantor;
  s.depth = 5;
  const auto g = generate(s);
  CHECK(g.measure.size() == 1024);
  for (std::size_t i = 0; i < g.measure.size(); ++i) CHECK(g.measure.weight(i) == std::ldexp(1.0, -10));

  s.depth = 4;
  const auto coarse = generate(s);
  // Each corner block rescaled by 4 (weights x4) is the depth-4 measure.
  for (int corner = 0; corner < 4; ++corner) {
    const Vector lo = (Vector(2) << 0.75 * (corner & 1), 0.75 * ((corner >> 1) & 1)).finished();
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < g.measure.size(); ++i) {
      const auto y = g.measure.point(i);
      if (y[0] >= lo[0] && y[0] < lo[0] + 0.25 && y[1] >= lo[1] && y[1] < lo[1] + 0.25) keep.push_back(i);
    }
    REQUIRE(keep.size() == coarse.measure.size());
    const auto block = g.measure.subset(keep).transformed(Matrix::Identity(2, 2), -4.0 * lo, 4.0, 4.0);
    std::vector<std::pair<double, double>> a, b;
    for (std::size_t i = 0; i < block.size(); ++i) {
      a.emplace_back(block.point(i)[0], block.point(i)[1]);
      b.emplace_back(coarse.measure.point(i)[0], coarse.measure.point(i)[1]);
      CHECK(block.weight(i) == coarse.measure.weight(i));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
}

TEST_CASE("graph generators respect the Lipschitz bound and the cell density") {
  GeneratorSpec s;
  s.kind = GeneratorKind::lipschitz_graph;
  s.shape = GraphShape::cone;
  s.lipschitz = 0.3;
  s.atoms = 400;
  const auto g = generate(s);
  REQUIRE(g.graph.has_value());
  CHECK(g.graph->spot_check(2000, 3) <= 0.3 + 1e-12);
  double worst = 0.0;
  for (std::size_t i = 1; i < g.measure.size(); ++i) {
    const auto a = g.measure.point(i - 1);
    const auto b = g.measure.point(i);
    worst = std::max(worst, std::abs(b[1] - a[1]) / std::abs(b[0] - a[0]));
  }
  CHECK(worst <= 0.3 + 1e-9);
  // Weights are arc length per cell: density w.r.t. parameter length within [1/2, 2] of nominal.
  const double nominal = 1.0 / 400.0;
  for (std::size_t i = 0; i < g.measure.size(); ++i) {
    CHECK(g.measure.weight(i) > 0.5 * nominal);
    CHECK(g.measure.weight(i) < 2.0 * nominal);
  }
  for (auto shape : {GraphShape::sine, GraphShape::zigzag}) {
    const LipschitzGraph gr(2, 3, shape, 0.7, Box{Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)});
    CHECK(gr.spot_check(5000, 4) <= 0.7 + 1e-9);
  }
}

TEST_CASE("power-law density vanishes at the focus") {
  GeneratorSpec s;
  s.kind = GeneratorKind::segment;
  s.atoms = 101;
  s.density.exponent = 2.0;
  const auto g = generate(s);
  double wmin = 1.0;
  std::size_t at = 0;
  for (std::size_t i = 0; i < g.measure.size(); ++i)
    if (g.measure.weight(i) < wmin) {
      wmin = g.measure.weight(i);
      at = i;
    }
  CHECK(at == 50);
  CHECK(wmin < 1e-12 * g.measure.weight(0));
}

TEST_CASE("spec JSON round trip") {
  GeneratorSpec s;
  s.kind = GeneratorKind::perturbed_graph;
  s.noise = 0.05;
  s.density.exponent = 0.5;
  s.seed = 17;
  const auto back = spec_from_json(spec_to_json(s));
  CHECK(spec_to_json(back) == spec_to_json(s));
  CHECK_THROWS(spec_from_json(nlohmann::json{{"kind", "spiral"}}));
}
