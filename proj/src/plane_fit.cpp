#include "jonesq/plane_fit.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jonesq {

AffinePlane::AffinePlane(Vector base, Matrix frame) : base_(std::move(base)), frame_(std::move(frame)) {
  if (frame_.rows() != base_.size()) throw std::invalid_argument("plane frame dimension mismatch");
  if (frame_.cols() < 1 || frame_.cols() >= frame_.rows())
    throw std::invalid_argument("plane dimension n must satisfy 1 <= n < d");
  const Matrix gram = frame_.transpose() * frame_;
  if ((gram - Matrix::Identity(frame_.cols(), frame_.cols())).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("plane frame is not orthonormal");
}

AffinePlane AffinePlane::coordinate(const Vector& base, int n) {
  return AffinePlane(base, Matrix::Identity(base.size(), n));
}

Vector AffinePlane::project(const Eigen::Ref<const Vector>& y) const {
  return base_ + frame_ * (frame_.transpose() * (y - base_));
}

double AffinePlane::distance(const Eigen::Ref<const Vector>& y) const {
  const Vector v = y - base_;
  return (v - frame_ * (frame_.transpose() * v)).norm();
}

Matrix AffinePlane::normal_basis() const {
  const Eigen::Index d = frame_.rows();
  const Eigen::Index n = frame_.cols();
  if (d - n == 1 && d == 2) {
    Matrix nb(2, 1);
    nb << -frame_(1, 0), frame_(0, 0);
    return nb;
  }
  if (d == 3 && n == 2) {
    const Eigen::Vector3d a = frame_.col(0);
    const Eigen::Vector3d b = frame_.col(1);
    return Matrix(a.cross(b).normalized());
  }
  // Complement from the full QR of the frame.
  Eigen::HouseholderQR<Matrix> qr(frame_);
  const Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  return q.rightCols(d - n);
}

const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::ball_rn: return "ball_rn";
    case Normalization::cube_ln: return "cube_ln";
    case Normalization::cube_mass: return "cube_mass";
  }
  return "?";
}

double plane_objective(const DiscreteMeasure& region, const AffinePlane& plane, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < region.size(); ++i) {
    const double w = region.weight(i);
    if (w == 0.0) continue;
    const double dist = plane.distance(region.point(i));
    s += w * (p == 2.0 ? dist * dist : std::pow(dist, p));
  }
  return s;
}

namespace {

void check_n(const DiscreteMeasure& region, int n) {
  if (n < 1 || n >= region.dim())
    throw std::invalid_argument("plane dimension n must satisfy 1 <= n < d");
}

// Weighted PCA with explicit per-atom weights.
FitResult fit_weighted(const DiscreteMeasure& region, const Vector& w, int n) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) total += w[i];
  if (!(total > 0.0)) throw std::invalid_argument("empty fit region");
  const Matrix& pts = region.points();
  Vector centroid = Vector::Zero(region.dim());
  for (Eigen::Index i = 0; i < w.size(); ++i) centroid += w[i] * pts.col(i);
  centroid /= total;
  Matrix cov = Matrix::Zero(region.dim(), region.dim());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    const Vector v = pts.col(i) - centroid;
    cov.noalias() += w[i] * v * v.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector& ev = eig.eigenvalues();  // ascending
  const Eigen::Index d = region.dim();
  Matrix frame = eig.eigenvectors().rightCols(n);
  // Orthonormalize against eigen-solver round-off.
  Eigen::HouseholderQR<Matrix> qr(frame);
  Matrix q = qr.householderQ() * Matrix::Identity(d, n);
  for (int k = 0; k < n; ++k)
    if (q.col(k).dot(frame.col(k)) < 0.0) q.col(k) = -q.col(k);

  FitResult out{AffinePlane(centroid, q), 0.0, false, 0, {}};
  const double trace = std::max(ev.sum(), 0.0);
  out.degenerate = !(ev[d - n] > 1e-12 * trace) || trace == 0.0;
  return out;
}

}  // namespace

FitResult fit_plane_l2(const DiscreteMeasure& region, int n) {
  check_n(region, n);
  FitResult out = fit_weighted(region, region.weights(), n);
  out.objective = plane_objective(region, out.plane, 2.0);
  return out;
}

FitResult fit_plane_lp(const DiscreteMeasure& region, int n, double p, double scale,
                       const IrlsConfig& config) {
  check_n(region, n);
  if (!(p >= 1.0 && p < 2.0)) throw std::invalid_argument("IRLS requires 1 <= p < 2");
  if (!(scale > 0.0)) throw std::invalid_argument("IRLS scale must be positive");
  const double eps = config.epsilon_factor * scale * scale;

  FitResult seed = fit_plane_l2(region, n);
  FitResult best{seed.plane, plane_objective(region, seed.plane, p), seed.degenerate, 0, {}};

  auto smoothed = [&](const AffinePlane& plane, Vector* reweight) {
    double s = 0.0;
    for (std::size_t i = 0; i < region.size(); ++i) {
      const double w = region.weight(i);
      const double d = plane.distance(region.point(i));
      const double q = d * d + eps;
      s += w * std::pow(q, 0.5 * p);
      if (reweight) (*reweight)[static_cast<Eigen::Index>(i)] = w * std::pow(q, 0.5 * (p - 2.0));
    }
    return s;
  };

  Vector reweight(static_cast<Eigen::Index>(region.size()));
  AffinePlane current = seed.plane;
  double prev = smoothed(current, &reweight);
  best.history.push_back(prev);
  for (int it = 0; it < config.max_iterations; ++it) {
    FitResult step = fit_weighted(region, reweight, n);
    current = step.plane;
    const double value = smoothed(current, &reweight);
    best.history.push_back(value);
    best.iterations = it + 1;
    const double raw = plane_objective(region, current, p);
    if (raw < best.objective) {
      best.objective = raw;
      best.plane = current;
      best.degenerate = step.degenerate;
    }
    const double change = std::abs(prev - value) / std::max(std::abs(prev), 1e-300);
    prev = value;
    if (change < config.tolerance) break;
  }
  return best;
}

FitResult fit_plane(const DiscreteMeasure& region, int n, double p, double scale,
                    const IrlsConfig& config) {
  if (p == 2.0) return fit_plane_l2(region, n);
  return fit_plane_lp(region, n, p, scale, config);
}

namespace {

BetaRecord finish(const DiscreteMeasure& region, int n, double p, double scale, double normalizer,
                  const Vector& fallback_center, const IrlsConfig& config, BetaRecord rec) {
  rec.region_mass = region.total_mass();
  if (region.empty() || !(rec.region_mass > 0.0)) {
    rec.empty_region = true;
    rec.value = 0.0;
    rec.plane = AffinePlane::coordinate(fallback_center, n);
    return rec;
  }
  FitResult fit = fit_plane(region, n, p, scale, config);
  rec.plane = fit.plane;
  rec.degenerate = fit.degenerate;
  const double normalized = fit.objective / (normalizer * std::pow(scale, p));
  rec.value = std::pow(std::max(normalized, 0.0), 1.0 / p);
  return rec;
}

void check_beta_args(const DiscreteMeasure& measure, int n, double p) {
  if (n < 1 || n >= measure.dim())
    throw std::invalid_argument("plane dimension n must satisfy 1 <= n < d");
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("p must lie in [1, 2]");
}

}  // namespace

BetaRecord beta(const DiscreteMeasure& measure, const SpatialIndex& index, const Ball& ball, int n,
                double p, const IrlsConfig& config) {
  check_beta_args(measure, n, p);
  const DiscreteMeasure region = restrict(measure, index, ball);
  BetaRecord rec;
  rec.p = p;
  rec.normalization = Normalization::ball_rn;
  rec.scale = ball.radius;
  rec.normalizer = std::pow(ball.radius, n);
  return finish(region, n, p, ball.radius, rec.normalizer, ball.center, config, rec);
}

BetaRecord beta_cube(const DiscreteMeasure& measure, const SpatialIndex& index, const Box& cube,
                     int n, double p, Normalization normalization, const IrlsConfig& config) {
  check_beta_args(measure, n, p);
  if (normalization == Normalization::ball_rn)
    throw std::invalid_argument("beta_cube needs a cube normalization");
  const double side = (cube.upper - cube.lower).maxCoeff();
  const DiscreteMeasure region = restrict(measure, index, cube.scaled(3.0));
  BetaRecord rec;
  rec.p = p;
  rec.normalization = normalization;
  rec.scale = side;
  if (normalization == Normalization::cube_ln) {
    rec.normalizer = std::pow(side, n);
  } else {
    rec.normalizer = region.total_mass();
    if (!(rec.normalizer > 0.0)) {
      rec.zero_mass = true;
      rec.empty_region = true;
      rec.value = 0.0;
      rec.plane = AffinePlane::coordinate(cube.center(), n);
      return rec;
    }
  }
  return finish(region, n, p, side, rec.normalizer, cube.center(), config, rec);
}

}  // namespace jonesq
