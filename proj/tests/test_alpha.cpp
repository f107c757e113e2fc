#include <doctest.h>

#include "jonesq/generators.hpp"
#include "jonesq/plane_fit.hpp"
#include "jonesq/transport.hpp"
#include "oracles/alpha_oracle.hpp"

#include <cmath>
#include <random>

using namespace jonesq;

namespace {

DiscreteMeasure random_cloud(int m, unsigned seed, double spread) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> w(0.5, 1.5);
  Matrix p(2, m);
  Vector wt(m);
  for (int i = 0; i < m; ++i) {
    p(0, i) = u(rng);
    p(1, i) = spread * u(rng) + 0.2 * p(0, i);
    wt[i] = w(rng) / m;
  }
  return DiscreteMeasure(p, wt);
}

}  // namespace

TEST_CASE("alpha of four atoms matches the exhaustive grid oracle") {
  Matrix sq(2, 4);
  sq << 0.1, -0.1, 0.1, -0.1,
        0.1, 0.1, -0.1, -0.1;
  const DiscreteMeasure mu(sq, Vector::Ones(4));
  const Ball ball(Vector::Zero(2), 1.0);
  const auto rec = alpha(mu, SpatialIndex(mu), ball, 1);
  const auto ora = oracle::alpha_grid(mu, ball, 64, 64, 64);
  CHECK(rec.value == doctest::Approx(ora.value).epsilon(0.05));
  CHECK(rec.amplitude >= 0.0);
  CHECK(rec.plane.distance(ball.center) <= ball.radius * (1.0 + 1e-9));
}

TEST_CASE("alpha is at most the a = 0 value and zero on empty regions") {
  const auto mu = random_cloud(40, 5, 0.3);
  SpatialIndex idx(mu);
  const Ball ball(Vector::Zero(2), 0.4);
  const auto rec = alpha(mu, idx, ball, 1);
  double zero_amp = 0.0;
  const Ball big = ball.scaled(3.0);
  for (std::size_t i = 0; i < mu.size(); ++i)
    zero_amp += mu.weight(i) * std::max(0.0, big.radius - (mu.point(i) - big.center).norm());
  CHECK(rec.value <= zero_amp / std::pow(ball.radius, 2) * (1.0 + 1e-12));
  const auto far = alpha(mu, idx, Ball(Vector::Constant(2, 50.0), 1.0), 1);
  CHECK(far.value == 0.0);
  CHECK(far.empty);
  CHECK(far.amplitude == 0.0);
}

TEST_CASE("alpha is invariant under rigid motions and covariant under dilations") {
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    const auto mu = random_cloud(30, 200u + static_cast<unsigned>(trial), 0.15);
    const Ball ball(Vector::Zero(2), 0.5);
    const double theta = 3.0 * u(rng);
    Matrix rot(2, 2);
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    const Vector shift = (Vector(2) << 4.0 * u(rng), 4.0 * u(rng)).finished();
    const double lambda = 1.5 + u(rng);
    const double base = alpha(mu, SpatialIndex(mu), ball, 1).value;
    const auto moved = mu.transformed(rot, shift);
    const double rigid = alpha(moved, SpatialIndex(moved), Ball(shift, 0.5), 1).value;
    const auto scaled = mu.transformed(Matrix::Identity(2, 2), Vector::Zero(2), lambda, lambda);
    const double dil = alpha(scaled, SpatialIndex(scaled), Ball(Vector::Zero(2), 0.5 * lambda), 1).value;
    CHECK(rigid == doctest::Approx(base).epsilon(1e-9));
    CHECK(dil == doctest::Approx(base).epsilon(1e-6));
  }
}

TEST_CASE("beta_1 is dominated by alpha at twice the radius") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::lipschitz_graph;
  spec.atoms = 256;
  spec.lipschitz = 0.8;
  const auto g = generate(spec);
  SpatialIndex idx(g.measure);
  const double C = 5.0 * 4.0;  // 5 * 2^(n+1)
  for (std::size_t i : {10u, 100u, 200u})
    for (double r : {0.4, 0.1}) {
      const Vector x = g.measure.point(i);
      const double b1 = beta(g.measure, idx, Ball(x, r), 1, 1.0).value;
      const double a2 = alpha(g.measure, idx, Ball(x, 2.0 * r), 1).value;
      CHECK(b1 <= C * a2);
    }
}

TEST_CASE("alpha drifts little when the plane grid is refined") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::lipschitz_graph;
  spec.atoms = 256;
  const auto g = generate(spec);
  SpatialIndex idx(g.measure);
  AlphaConfig fine;
  fine.resolution = 1.0 / 32.0;
  for (double r : {0.5, 0.2}) {
    const Ball ball(g.measure.point(128), r);
    const double coarse = alpha(g.measure, idx, ball, 1).value;
    const double refined = alpha(g.measure, idx, ball, 1, fine).value;
    CHECK(std::abs(refined - coarse) < 0.03 * coarse);
  }
}
