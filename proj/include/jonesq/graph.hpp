#pragma once

#include "jonesq/measure.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace jonesq {

/// Shapes of the graph function A : R^n -> R^(d-n). Only the first normal coordinate is
/// non-zero; `lipschitz` is an exact Lipschitz constant for every shape.
enum class GraphShape {
  flat,   ///< A = 0
  cone,   ///< A(u) = L |u - vertex|
  sine,   ///< A(u) = L / (w sqrt(n)) sum_k sin(w u_k)
  zigzag  ///< A(u) = L * tent(u_1) with period 2 / w
};

const char* to_string(GraphShape shape);
GraphShape graph_shape_from_string(const std::string& name);

/// Lipschitz graph {(u, A(u)) : u in domain} in R^d over a closed parameter box in R^n.
class LipschitzGraph {
 public:
  LipschitzGraph(int n, int d, GraphShape shape, double lipschitz, Box domain,
                 double frequency = 3.0);

  int n() const { return n_; }
  int d() const { return d_; }
  GraphShape shape() const { return shape_; }
  double lipschitz() const { return lipschitz_; }
  double frequency() const { return frequency_; }
  const Box& domain() const { return domain_; }

  Vector height(const Eigen::Ref<const Vector>& u) const;
  /// (u, A(u)) in R^d.
  Vector lift(const Eigen::Ref<const Vector>& u) const;

  /// Lifted points of a tensor grid over the closed domain, corners included, with per-axis
  /// spacing at most `spacing`. Returns the achieved spacing through `achieved` if given.
  Matrix sample(double spacing, double* achieved = nullptr) const;

  /// Largest |A(u) - A(v)| / |u - v| over random pairs in the domain.
  double spot_check(int pairs, std::uint64_t seed) const;

  nlohmann::json to_json() const;

 private:
  int n_;
  int d_;
  GraphShape shape_;
  double lipschitz_;
  Box domain_;
  double frequency_;
};

/// Certified distance to a sampled Lipschitz graph. For a grid of parameter spacing s the true
/// distance lies in [sampled - slack, sampled] with slack = sqrt(1 + L^2) * s * sqrt(n) / 2.
class GraphDistance {
 public:
  GraphDistance(const LipschitzGraph& graph, double spacing);

  double slack() const { return slack_; }
  const Matrix& samples() const { return samples_; }
  double spacing() const { return spacing_; }

  double upper(const Box& box) const { return index_.nearest_distance(box); }
  double lower(const Box& box) const;
  double upper(const Eigen::Ref<const Vector>& y) const { return index_.nearest_distance(y); }
  double lower(const Eigen::Ref<const Vector>& y) const;
  /// True when some graph sample lies in the closed box, so the box certainly meets the graph.
  bool certainly_meets(const Box& box) const { return upper(box) == 0.0; }

 private:
  double spacing_ = 0.0;  // written by the samples_ initializer, so declared first
  Matrix samples_;
  SpatialIndex index_;
  double slack_ = 0.0;
};

}  // namespace jonesq
