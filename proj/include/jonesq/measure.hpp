#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace jonesq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Finite atomic measure in R^d. Points are stored column-wise (d x m).
class DiscreteMeasure {
 public:
  explicit DiscreteMeasure(int dim = 1);
  DiscreteMeasure(Matrix points, Vector weights);

  int dim() const { return static_cast<int>(points_.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }
  bool empty() const { return points_.cols() == 0; }

  auto point(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }
  double weight(std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }

  const Matrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }

  /// Sum of weights in index order.
  double total_mass() const;

  /// Sub-measure on the given atom indices, in the order supplied.
  DiscreteMeasure subset(const std::vector<std::size_t>& indices) const;

  /// Image under y -> scale * R y + shift with weights multiplied by weight_factor.
  DiscreteMeasure transformed(const Matrix& rotation, const Vector& shift, double scale = 1.0,
                              double weight_factor = 1.0) const;

  /// Concatenation of two measures in the same ambient dimension.
  static DiscreteMeasure concat(const DiscreteMeasure& a, const DiscreteMeasure& b);

 private:
  Matrix points_;
  Vector weights_;
};

/// Closed ball: membership is |y - center| <= radius.
struct Ball {
  Vector center;
  double radius = 1.0;

  Ball() = default;
  Ball(Vector c, double r);

  bool contains(const Eigen::Ref<const Vector>& y) const;
  Ball scaled(double k) const { return Ball(center, k * radius); }
};

/// Axis-aligned half-open box [lower, upper).
struct Box {
  Vector lower;
  Vector upper;

  bool contains(const Eigen::Ref<const Vector>& y) const;
  Vector center() const { return 0.5 * (lower + upper); }
  double diameter() const { return (upper - lower).norm(); }
  /// Concentric box with every side multiplied by k.
  Box scaled(double k) const;
  /// Euclidean distance from y to the closure of the box.
  double distance_to(const Eigen::Ref<const Vector>& y) const;
};

struct DyadicCube {
  int level = 0;
  std::vector<std::int64_t> index;

  bool operator==(const DyadicCube&) const = default;
  auto operator<=>(const DyadicCube&) const = default;
};

/// Dyadic lattice with cubes [origin + k * side, origin + (k + 1) * side) and
/// side = base_scale * 2^-level.
struct DyadicLattice {
  Vector origin;
  double base_scale = 1.0;

  /// Lattice anchored at the lower corner of the bounding cube of the measure.
  static DyadicLattice bounding(const DiscreteMeasure& measure);

  double side(int level) const;
  Box box(const DyadicCube& cube) const;
  Vector center(const DyadicCube& cube) const { return box(cube).center(); }
  double diameter(const DyadicCube& cube) const;
  DyadicCube root() const;
  DyadicCube locate(const Eigen::Ref<const Vector>& y, int level) const;
  DyadicCube parent(const DyadicCube& cube) const;
  std::vector<DyadicCube> children(const DyadicCube& cube) const;
  bool is_ancestor(const DyadicCube& ancestor, const DyadicCube& cube) const;
};

/// kd-tree over the atoms of a measure. Queries return ascending atom indices.
class SpatialIndex {
 public:
  explicit SpatialIndex(const DiscreteMeasure& measure, int leaf_size = 16);

  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }
  int dim() const { return static_cast<int>(points_.rows()); }

  std::vector<std::size_t> ball_query(const Ball& ball) const;
  std::vector<std::size_t> box_query(const Box& box) const;
  /// Distance from the closed box to the nearest indexed point (infinity when empty).
  double nearest_distance(const Box& box) const;
  double nearest_distance(const Eigen::Ref<const Vector>& y) const;
  /// Distance from indexed point i to the nearest other indexed point.
  double nearest_other_distance(std::size_t i) const;

 private:
  struct Node {
    Eigen::Index begin = 0;
    Eigen::Index end = 0;
    int left = -1;
    int right = -1;
  };

  int build(Eigen::Index begin, Eigen::Index end);
  void check_dim(Eigen::Index d) const;

  Matrix points_;
  std::vector<Eigen::Index> perm_;
  std::vector<Node> nodes_;
  Matrix lo_;
  Matrix hi_;
  int leaf_size_;
};

/// Strictly increasing radii.
class RadiusGrid {
 public:
  RadiusGrid() = default;
  explicit RadiusGrid(std::vector<double> radii);

  /// r_lo, r_lo * ratio, ... up to the first radius >= r_hi.
  static RadiusGrid geometric(double r_lo, double r_hi, double ratio = 1.189207115002721);

  const std::vector<double>& radii() const { return radii_; }
  bool empty() const { return radii_.empty(); }
  std::size_t size() const { return radii_.size(); }

 private:
  std::vector<double> radii_;
};

double mass(const DiscreteMeasure& measure, const SpatialIndex& index, const Ball& ball);
double mass(const DiscreteMeasure& measure, const SpatialIndex& index, const Box& box);

DiscreteMeasure restrict(const DiscreteMeasure& measure, const SpatialIndex& index, const Ball& ball);
DiscreteMeasure restrict(const DiscreteMeasure& measure, const SpatialIndex& index, const Box& box);

/// max over the grid of mu(B(x, r)) / r^n.
double maximal_function(const DiscreteMeasure& measure, const SpatialIndex& index,
                        const Eigen::Ref<const Vector>& x, int n, const RadiusGrid& grid);

/// Bounding-box diagonal of the atoms; an upper bound for the diameter of the support.
double diameter_bound(const DiscreteMeasure& measure);

/// Smallest nearest-neighbour distance between atoms (0 when duplicates exist).
double min_spacing(const DiscreteMeasure& measure, const SpatialIndex& index);

}  // namespace jonesq
