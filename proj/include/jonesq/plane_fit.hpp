#pragma once

#include "jonesq/measure.hpp"

#include <vector>

namespace jonesq {

/// Affine n-plane: base point plus an orthonormal d x n frame.
class AffinePlane {
 public:
  AffinePlane() = default;
  /// Throws std::invalid_argument unless the frame columns are orthonormal to 1e-10.
  AffinePlane(Vector base, Matrix frame);

  /// Plane through `base` spanned by the first n coordinate axes.
  static AffinePlane coordinate(const Vector& base, int n);

  int dim() const { return static_cast<int>(base_.size()); }
  int n() const { return static_cast<int>(frame_.cols()); }
  const Vector& base() const { return base_; }
  const Matrix& frame() const { return frame_; }

  Vector project(const Eigen::Ref<const Vector>& y) const;
  double distance(const Eigen::Ref<const Vector>& y) const;
  /// Orthonormal basis (d x (d - n)) of the orthogonal complement of the frame.
  Matrix normal_basis() const;
  AffinePlane translated(const Vector& shift) const { return AffinePlane(base_ + shift, frame_); }

 private:
  Vector base_;
  Matrix frame_;
};

enum class Normalization { ball_rn, cube_ln, cube_mass };

const char* to_string(Normalization n);

struct FitResult {
  AffinePlane plane;
  /// sum_i w_i dist(y_i, plane)^p for the p the fit was made for.
  double objective = 0.0;
  bool degenerate = false;
  int iterations = 0;
  /// IRLS only: smoothed objective sum_i w_i (dist_i^2 + eps)^(p/2) after each reweighting step.
  std::vector<double> history;
};

struct IrlsConfig {
  double epsilon_factor = 1e-9;  ///< eps = epsilon_factor * scale^2
  int max_iterations = 50;
  double tolerance = 1e-8;       ///< relative change of the smoothed objective
};

/// sum_i w_i dist(y_i, plane)^p in index order.
double plane_objective(const DiscreteMeasure& region, const AffinePlane& plane, double p);

/// Exact weighted least-squares n-plane: centroid plus top-n eigenvectors of the weighted
/// covariance. Throws std::invalid_argument("empty fit region") on zero mass.
FitResult fit_plane_l2(const DiscreteMeasure& region, int n);

/// Weighted L^p plane for 1 <= p < 2 by IRLS seeded at the L^2 plane. The returned plane is
/// the best iterate (never worse than the seed). `scale` sets the IRLS regularizer.
FitResult fit_plane_lp(const DiscreteMeasure& region, int n, double p, double scale,
                       const IrlsConfig& config = {});

/// Dispatches to fit_plane_l2 when p == 2.
FitResult fit_plane(const DiscreteMeasure& region, int n, double p, double scale,
                    const IrlsConfig& config = {});

struct BetaRecord {
  double value = 0.0;
  AffinePlane plane;
  double p = 2.0;
  Normalization normalization = Normalization::ball_rn;
  double scale = 0.0;        ///< r for balls, side length for cubes
  double normalizer = 0.0;   ///< r^n, l(Q)^n or mu(3Q)
  double region_mass = 0.0;
  bool empty_region = false;
  bool zero_mass = false;    ///< cube_mass with mu(3Q) = 0; value set to 0
  bool degenerate = false;
};

/// beta_{mu,p}^n(B) with the ball normalization r^n.
BetaRecord beta(const DiscreteMeasure& measure, const SpatialIndex& index, const Ball& ball, int n,
                double p, const IrlsConfig& config = {});

/// Cube coefficient over 3Q with dist scaled by l(Q); normalizer l(Q)^n or mu(3Q).
BetaRecord beta_cube(const DiscreteMeasure& measure, const SpatialIndex& index, const Box& cube,
                     int n, double p, Normalization normalization, const IrlsConfig& config = {});

}  // namespace jonesq
