#include "jonesq/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace jonesq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double box_point_sq(const Eigen::Ref<const Vector>& lo, const Eigen::Ref<const Vector>& hi,
                    const Eigen::Ref<const Vector>& y) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    double e = 0.0;
    if (y[k] < lo[k]) e = lo[k] - y[k];
    else if (y[k] > hi[k]) e = y[k] - hi[k];
    s += e * e;
  }
  return s;
}

double box_box_sq(const Eigen::Ref<const Vector>& alo, const Eigen::Ref<const Vector>& ahi,
                  const Eigen::Ref<const Vector>& blo, const Eigen::Ref<const Vector>& bhi) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < alo.size(); ++k) {
    double e = 0.0;
    if (bhi[k] < alo[k]) e = alo[k] - bhi[k];
    else if (blo[k] > ahi[k]) e = blo[k] - ahi[k];
    s += e * e;
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(int dim) : points_(dim, 0), weights_(0) {
  if (dim < 1) throw std::invalid_argument("ambient dimension must be positive");
}

DiscreteMeasure::DiscreteMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.rows() < 1) throw std::invalid_argument("ambient dimension must be positive");
  if (points_.cols() != weights_.size())
    throw std::invalid_argument("points and weights differ in length");
  if (!points_.allFinite()) throw std::invalid_argument("non-finite point coordinate");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] < 0.0)
      throw std::invalid_argument("weights must be finite and nonnegative (atom " +
                                  std::to_string(i) + ")");
  }
}

double DiscreteMeasure::total_mass() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < weights_.size(); ++i) s += weights_[i];
  return s;
}

DiscreteMeasure DiscreteMeasure::subset(const std::vector<std::size_t>& indices) const {
  Matrix p(points_.rows(), static_cast<Eigen::Index>(indices.size()));
  Vector w(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    p.col(static_cast<Eigen::Index>(k)) = points_.col(static_cast<Eigen::Index>(indices[k]));
    w[static_cast<Eigen::Index>(k)] = weights_[static_cast<Eigen::Index>(indices[k])];
  }
  return DiscreteMeasure(std::move(p), std::move(w));
}

DiscreteMeasure DiscreteMeasure::transformed(const Matrix& rotation, const Vector& shift,
                                             double scale, double weight_factor) const {
  if (rotation.rows() != dim() || rotation.cols() != dim() || shift.size() != dim())
    throw std::invalid_argument("transform dimension mismatch");
  Matrix p = (scale * rotation) * points_;
  p.colwise() += shift;
  return DiscreteMeasure(std::move(p), weight_factor * weights_);
}

DiscreteMeasure DiscreteMeasure::concat(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch in concat");
  Matrix p(a.dim(), a.points_.cols() + b.points_.cols());
  p << a.points_, b.points_;
  Vector w(a.weights_.size() + b.weights_.size());
  w << a.weights_, b.weights_;
  return DiscreteMeasure(std::move(p), std::move(w));
}

// ---------------------------------------------------------------------------
// Ball / Box

Ball::Ball(Vector c, double r) : center(std::move(c)), radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("ball radius must be positive");
  if (!center.allFinite()) throw std::invalid_argument("non-finite ball center");
}

bool Ball::contains(const Eigen::Ref<const Vector>& y) const {
  return (y - center).squaredNorm() <= radius * radius;
}

bool Box::contains(const Eigen::Ref<const Vector>& y) const {
  for (Eigen::Index k = 0; k < y.size(); ++k)
    if (y[k] < lower[k] || !(y[k] < upper[k])) return false;
  return true;
}

Box Box::scaled(double k) const {
  const Vector c = center();
  const Vector half = 0.5 * k * (upper - lower);
  return Box{c - half, c + half};
}

double Box::distance_to(const Eigen::Ref<const Vector>& y) const {
  return std::sqrt(box_point_sq(lower, upper, y));
}

// ---------------------------------------------------------------------------
// DyadicLattice

DyadicLattice DyadicLattice::bounding(const DiscreteMeasure& measure) {
  if (measure.empty()) throw std::invalid_argument("cannot build a lattice over an empty measure");
  const Vector lo = measure.points().rowwise().minCoeff();
  const Vector hi = measure.points().rowwise().maxCoeff();
  double side = (hi - lo).maxCoeff();
  if (!(side > 0.0)) side = 1.0;
  // Widen by a relative hair so atoms on the upper faces fall inside the half-open root.
  side *= 1.0 + 1e-9;
  return DyadicLattice{lo, side};
}

double DyadicLattice::side(int level) const { return std::ldexp(base_scale, -level); }

Box DyadicLattice::box(const DyadicCube& cube) const {
  const double s = side(cube.level);
  Vector lo(origin.size());
  for (Eigen::Index k = 0; k < origin.size(); ++k)
    lo[k] = origin[k] + static_cast<double>(cube.index[static_cast<std::size_t>(k)]) * s;
  return Box{lo, lo.array() + s};
}

double DyadicLattice::diameter(const DyadicCube& cube) const {
  return side(cube.level) * std::sqrt(static_cast<double>(origin.size()));
}

DyadicCube DyadicLattice::root() const {
  return DyadicCube{0, std::vector<std::int64_t>(static_cast<std::size_t>(origin.size()), 0)};
}

DyadicCube DyadicLattice::locate(const Eigen::Ref<const Vector>& y, int level) const {
  DyadicCube c{level, std::vector<std::int64_t>(static_cast<std::size_t>(origin.size()))};
  const double s = side(level);
  for (Eigen::Index k = 0; k < origin.size(); ++k)
    c.index[static_cast<std::size_t>(k)] =
        static_cast<std::int64_t>(std::floor((y[k] - origin[k]) / s));
  return c;
}

DyadicCube DyadicLattice::parent(const DyadicCube& cube) const {
  DyadicCube p{cube.level - 1, cube.index};
  for (auto& i : p.index) i = (i >= 0) ? i / 2 : -((-i + 1) / 2);
  return p;
}

std::vector<DyadicCube> DyadicLattice::children(const DyadicCube& cube) const {
  const std::size_t d = cube.index.size();
  std::vector<DyadicCube> out;
  out.reserve(std::size_t{1} << d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    DyadicCube c{cube.level + 1, cube.index};
    for (std::size_t k = 0; k < d; ++k) c.index[k] = 2 * c.index[k] + ((mask >> k) & 1U);
    out.push_back(std::move(c));
  }
  return out;
}

bool DyadicLattice::is_ancestor(const DyadicCube& ancestor, const DyadicCube& cube) const {
  if (ancestor.level > cube.level) return false;
  DyadicCube c = cube;
  while (c.level > ancestor.level) c = parent(c);
  return c == ancestor;
}

// ---------------------------------------------------------------------------
// SpatialIndex

SpatialIndex::SpatialIndex(const DiscreteMeasure& measure, int leaf_size)
    : points_(measure.points()), leaf_size_(std::max(1, leaf_size)) {
  perm_.resize(static_cast<std::size_t>(points_.cols()));
  std::iota(perm_.begin(), perm_.end(), Eigen::Index{0});
  if (points_.cols() > 0) {
    nodes_.reserve(static_cast<std::size_t>(2 * points_.cols() / leaf_size_ + 2));
    lo_.resize(points_.rows(), 0);
    hi_.resize(points_.rows(), 0);
    build(0, points_.cols());
  }
}

int SpatialIndex::build(Eigen::Index begin, Eigen::Index end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, -1});
  if (lo_.cols() <= id) {
    const Eigen::Index grow = std::max<Eigen::Index>(16, 2 * lo_.cols());
    lo_.conservativeResize(Eigen::NoChange, grow);
    hi_.conservativeResize(Eigen::NoChange, grow);
  }
  Vector lo = points_.col(perm_[static_cast<std::size_t>(begin)]);
  Vector hi = lo;
  for (Eigen::Index i = begin + 1; i < end; ++i) {
    const auto p = points_.col(perm_[static_cast<std::size_t>(i)]);
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  lo_.col(id) = lo;
  hi_.col(id) = hi;
  if (end - begin <= leaf_size_) return id;

  Eigen::Index axis = 0;
  (hi - lo).maxCoeff(&axis);
  const Eigen::Index mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                   [&](Eigen::Index a, Eigen::Index b) {
                     return points_(axis, a) < points_(axis, b);
                   });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void SpatialIndex::check_dim(Eigen::Index d) const {
  if (d != points_.rows()) throw std::invalid_argument("query dimension mismatch");
}

std::vector<std::size_t> SpatialIndex::ball_query(const Ball& ball) const {
  check_dim(ball.center.size());
  std::vector<std::size_t> out;
  if (nodes_.empty()) return out;
  const double r2 = ball.radius * ball.radius;
  const Vector& c = ball.center;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    const int id = stack.back();
    stack.pop_back();
    if (box_point_sq(lo_.col(id), hi_.col(id), c) > r2) continue;
    double far = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      const double e = std::max(std::abs(lo_(k, id) - c[k]), std::abs(hi_(k, id) - c[k]));
      far += e * e;
    }
    if (far <= r2) {
      for (Eigen::Index i = node.begin; i < node.end; ++i)
        out.push_back(static_cast<std::size_t>(perm_[static_cast<std::size_t>(i)]));
      continue;
    }
    if (node.left < 0) {
      for (Eigen::Index i = node.begin; i < node.end; ++i) {
        const Eigen::Index p = perm_[static_cast<std::size_t>(i)];
        if ((points_.col(p) - c).squaredNorm() <= r2) out.push_back(static_cast<std::size_t>(p));
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> SpatialIndex::box_query(const Box& box) const {
  check_dim(box.lower.size());
  std::vector<std::size_t> out;
  if (nodes_.empty()) return out;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int id = stack.back();
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    stack.pop_back();
    bool disjoint = false;
    bool inside = true;
    for (Eigen::Index k = 0; k < box.lower.size(); ++k) {
      if (hi_(k, id) < box.lower[k] || !(lo_(k, id) < box.upper[k])) disjoint = true;
      if (lo_(k, id) < box.lower[k] || !(hi_(k, id) < box.upper[k])) inside = false;
    }
    if (disjoint) continue;
    if (inside) {
      for (Eigen::Index i = node.begin; i < node.end; ++i)
        out.push_back(static_cast<std::size_t>(perm_[static_cast<std::size_t>(i)]));
      continue;
    }
    if (node.left < 0) {
      for (Eigen::Index i = node.begin; i < node.end; ++i) {
        const Eigen::Index p = perm_[static_cast<std::size_t>(i)];
        if (box.contains(points_.col(p))) out.push_back(static_cast<std::size_t>(p));
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double SpatialIndex::nearest_distance(const Box& box) const {
  check_dim(box.lower.size());
  double best = kInf;
  if (nodes_.empty()) return best;
  std::vector<std::pair<double, int>> stack{{0.0, 0}};
  while (!stack.empty()) {
    auto [bound, id] = stack.back();
    stack.pop_back();
    if (bound >= best) continue;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (Eigen::Index i = node.begin; i < node.end; ++i) {
        const Eigen::Index p = perm_[static_cast<std::size_t>(i)];
        best = std::min(best, box_point_sq(box.lower, box.upper, points_.col(p)));
      }
      continue;
    }
    const double dl = box_box_sq(box.lower, box.upper, lo_.col(node.left), hi_.col(node.left));
    const double dr = box_box_sq(box.lower, box.upper, lo_.col(node.right), hi_.col(node.right));
    if (dl < dr) {
      stack.emplace_back(dr, node.right);
      stack.emplace_back(dl, node.left);
    } else {
      stack.emplace_back(dl, node.left);
      stack.emplace_back(dr, node.right);
    }
  }
  return std::sqrt(best);
}

double SpatialIndex::nearest_distance(const Eigen::Ref<const Vector>& y) const {
  return nearest_distance(Box{y, y});
}

double SpatialIndex::nearest_other_distance(std::size_t i) const {
  const Vector y = points_.col(static_cast<Eigen::Index>(i));
  double best = kInf;
  std::vector<std::pair<double, int>> stack{{0.0, 0}};
  while (!stack.empty()) {
    auto [bound, id] = stack.back();
    stack.pop_back();
    if (bound >= best) continue;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (Eigen::Index k = node.begin; k < node.end; ++k) {
        const Eigen::Index p = perm_[static_cast<std::size_t>(k)];
        if (static_cast<std::size_t>(p) == i) continue;
        best = std::min(best, (points_.col(p) - y).squaredNorm());
      }
      continue;
    }
    const double dl = box_point_sq(lo_.col(node.left), hi_.col(node.left), y);
    const double dr = box_point_sq(lo_.col(node.right), hi_.col(node.right), y);
    if (dl < dr) {
      stack.emplace_back(dr, node.right);
      stack.emplace_back(dl, node.left);
    } else {
      stack.emplace_back(dl, node.left);
      stack.emplace_back(dr, node.right);
    }
  }
  return std::sqrt(best);
}

// ---------------------------------------------------------------------------
// RadiusGrid

RadiusGrid::RadiusGrid(std::vector<double> radii) : radii_(std::move(radii)) {
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    if (!(radii_[i] > 0.0) || !std::isfinite(radii_[i]))
      throw std::invalid_argument("radii must be positive and finite");
    if (i > 0 && !(radii_[i] > radii_[i - 1]))
      throw std::invalid_argument("radius grid must be strictly increasing");
  }
}

RadiusGrid RadiusGrid::geometric(double r_lo, double r_hi, double ratio) {
  if (!(r_lo > 0.0) || !(r_hi >= r_lo) || !(ratio > 1.0))
    throw std::invalid_argument("invalid geometric radius grid");
  std::vector<double> r;
  for (int j = 0;; ++j) {
    const double v = r_lo * std::pow(ratio, j);
    r.push_back(v);
    if (v >= r_hi) break;
  }
  return RadiusGrid(std::move(r));
}

// ---------------------------------------------------------------------------
// Queries

namespace {

void check_index(const DiscreteMeasure& measure, const SpatialIndex& index) {
  if (index.size() != measure.size() || index.dim() != measure.dim())
    throw std::invalid_argument("spatial index was not built over this measure");
}

double sum_weights(const DiscreteMeasure& measure, const std::vector<std::size_t>& ids) {
  double s = 0.0;
  for (std::size_t i : ids) s += measure.weight(i);
  return s;
}

}  // namespace

double mass(const DiscreteMeasure& measure, const SpatialIndex& index, const Ball& ball) {
  check_index(measure, index);
  return sum_weights(measure, index.ball_query(ball));
}

double mass(const DiscreteMeasure& measure, const SpatialIndex& index, const Box& box) {
  check_index(measure, index);
  return sum_weights(measure, index.box_query(box));
}

DiscreteMeasure restrict(const DiscreteMeasure& measure, const SpatialIndex& index,
                         const Ball& ball) {
  check_index(measure, index);
  return measure.subset(index.ball_query(ball));
}

DiscreteMeasure restrict(const DiscreteMeasure& measure, const SpatialIndex& index,
                         const Box& box) {
  check_index(measure, index);
  return measure.subset(index.box_query(box));
}

double maximal_function(const DiscreteMeasure& measure, const SpatialIndex& index,
                        const Eigen::Ref<const Vector>& x, int n, const RadiusGrid& grid) {
  if (grid.empty()) throw std::invalid_argument("empty scale grid");
  check_index(measure, index);
  double best = 0.0;
  for (double r : grid.radii()) {
    const double m = mass(measure, index, Ball(Vector(x), r));
    best = std::max(best, m / std::pow(r, n));
  }
  return best;
}

double diameter_bound(const DiscreteMeasure& measure) {
  if (measure.empty()) return 0.0;
  return (measure.points().rowwise().maxCoeff() - measure.points().rowwise().minCoeff()).norm();
}

double min_spacing(const DiscreteMeasure& measure, const SpatialIndex& index) {
  check_index(measure, index);
  double best = kInf;
  for (std::size_t i = 0; i < measure.size(); ++i)
    best = std::min(best, index.nearest_other_distance(i));
  return best;
}

}  // namespace jonesq
