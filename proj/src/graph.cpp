#include "jonesq/graph.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace jonesq {

const char* to_string(GraphShape shape) {
  switch (shape) {
    case GraphShape::flat: return "flat";
    case GraphShape::cone: return "cone";
    case GraphShape::sine: return "sine";
    case GraphShape::zigzag: return "zigzag";
  }
  return "?";
}

GraphShape graph_shape_from_string(const std::string& name) {
  if (name == "flat") return GraphShape::flat;
  if (name == "cone" || name == "abs") return GraphShape::cone;
  if (name == "sine") return GraphShape::sine;
  if (name == "zigzag") return GraphShape::zigzag;
  throw std::invalid_argument("unknown graph shape: " + name);
}

LipschitzGraph::LipschitzGraph(int n, int d, GraphShape shape, double lipschitz, Box domain,
                               double frequency)
    : n_(n), d_(d), shape_(shape), lipschitz_(lipschitz), domain_(std::move(domain)),
      frequency_(frequency) {
  if (n < 1 || d <= n) throw std::invalid_argument("graph needs 1 <= n < d");
  if (domain_.lower.size() != n || domain_.upper.size() != n)
    throw std::invalid_argument("graph domain must be n-dimensional");
  if ((domain_.upper.array() <= domain_.lower.array()).any())
    throw std::invalid_argument("empty graph domain");
  if (!(lipschitz >= 0.0)) throw std::invalid_argument("negative Lipschitz constant");
  if (!(frequency > 0.0)) throw std::invalid_argument("frequency must be positive");
}

Vector LipschitzGraph::height(const Eigen::Ref<const Vector>& u) const {
  Vector a = Vector::Zero(d_ - n_);
  switch (shape_) {
    case GraphShape::flat:
      break;
    case GraphShape::cone:
      a[0] = lipschitz_ * u.norm();
      break;
    case GraphShape::sine: {
      double s = 0.0;
      for (int k = 0; k < n_; ++k) s += std::sin(frequency_ * u[k]);
      a[0] = lipschitz_ / (frequency_ * std::sqrt(static_cast<double>(n_))) * s;
      break;
    }
    case GraphShape::zigzag: {
      const double t = 0.5 * frequency_ * u[0];
      a[0] = lipschitz_ * (2.0 / frequency_) * std::abs(t - std::floor(t) - 0.5);
      break;
    }
  }
  return a;
}

Vector LipschitzGraph::lift(const Eigen::Ref<const Vector>& u) const {
  Vector y(d_);
  y.head(n_) = u;
  y.tail(d_ - n_) = height(u);
  return y;
}

Matrix LipschitzGraph::sample(double spacing, double* achieved) const {
  if (!(spacing > 0.0)) throw std::invalid_argument("sample spacing must be positive");
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(n_));
  Eigen::Index total = 1;
  double worst = 0.0;
  for (int k = 0; k < n_; ++k) {
    const double width = domain_.upper[k] - domain_.lower[k];
    const auto cells = static_cast<Eigen::Index>(std::ceil(width / spacing - 1e-12));
    counts[static_cast<std::size_t>(k)] = std::max<Eigen::Index>(cells, 1) + 1;
    total *= counts[static_cast<std::size_t>(k)];
    worst = std::max(worst, width / static_cast<double>(counts[static_cast<std::size_t>(k)] - 1));
  }
  if (achieved) *achieved = worst;
  Matrix out(d_, total);
  Vector u(n_);
  for (Eigen::Index col = 0; col < total; ++col) {
    Eigen::Index rest = col;
    for (int k = 0; k < n_; ++k) {
      const auto c = counts[static_cast<std::size_t>(k)];
      const auto i = rest % c;
      rest /= c;
      const double t = static_cast<double>(i) / static_cast<double>(c - 1);
      u[k] = (i == c - 1) ? domain_.upper[k] : domain_.lower[k] + t * (domain_.upper[k] - domain_.lower[k]);
    }
    out.col(col) = lift(u);
  }
  return out;
}

double LipschitzGraph::spot_check(int pairs, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  Vector u(n_), v(n_);
  for (int t = 0; t < pairs; ++t) {
    for (int k = 0; k < n_; ++k) {
      const double w = domain_.upper[k] - domain_.lower[k];
      u[k] = domain_.lower[k] + w * unit(rng);
      v[k] = domain_.lower[k] + w * unit(rng);
    }
    const double du = (u - v).norm();
    if (du == 0.0) continue;
    worst = std::max(worst, (height(u) - height(v)).norm() / du);
  }
  return worst;
}

nlohmann::json LipschitzGraph::to_json() const {
  return {{"n", n_},
          {"d", d_},
          {"shape", to_string(shape_)},
          {"lipschitz", lipschitz_},
          {"frequency", frequency_},
          {"domain_lower", std::vector<double>(domain_.lower.data(), domain_.lower.data() + n_)},
          {"domain_upper", std::vector<double>(domain_.upper.data(), domain_.upper.data() + n_)}};
}

GraphDistance::GraphDistance(const LipschitzGraph& graph, double spacing)
    : samples_(graph.sample(spacing, &spacing_)),
      index_(DiscreteMeasure(samples_, Vector::Ones(samples_.cols()))) {
  slack_ = std::sqrt(1.0 + graph.lipschitz() * graph.lipschitz()) * spacing_ *
           std::sqrt(static_cast<double>(graph.n())) / 2.0;
}

double GraphDistance::lower(const Box& box) const { return std::max(0.0, upper(box) - slack_); }

double GraphDistance::lower(const Eigen::Ref<const Vector>& y) const {
  return std::max(0.0, upper(y) - slack_);
}

}  // namespace jonesq
