#pragma once

#include <algorithm>
#include <array>
#include <numbers>
#include <vector>

#include "gfe/manifold.hpp"

namespace gfe {

namespace so3 {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;
using RowMajor3 = Eigen::Matrix<double, 3, 3, Eigen::RowMajor>;

inline Matrix3 as_matrix(const Vector& coords) {
  detail::require_size(coords, 9, "SO(3) coordinates");
  return Eigen::Map<const RowMajor3>(coords.data());
}

inline Vector as_vector(const Matrix3& m) {
  Vector out(9);
  Eigen::Map<RowMajor3>(out.data()) = m;
  return out;
}

inline Matrix3 hat(const Vector3& w) {
  Matrix3 s;
  s << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return s;
}

inline Vector3 vee(const Matrix3& s) { return {0.5 * (s(2, 1) - s(1, 2)), 0.5 * (s(0, 2) - s(2, 0)), 0.5 * (s(1, 0) - s(0, 1))}; }

inline Matrix3 skew(const Matrix3& a) { return 0.5 * (a - a.transpose()); }

/// Rodrigues formula; Taylor coefficients below 1e-4.
inline Matrix3 exp(const Vector3& w) {
  const double t = w.norm();
  const Matrix3 s = hat(w);
  double a, b;
  if (t < 1e-4) {
    a = 1.0 - t * t / 6.0 + t * t * t * t / 120.0;
    b = 0.5 - t * t / 24.0 + t * t * t * t / 720.0;
  } else {
    a = std::sin(t) / t;
    b = (1.0 - std::cos(t)) / (t * t);
  }
  return Matrix3::Identity() + a * s + b * s * s;
}

/// Rotation vector of r (axis times angle in [0, pi)). Angles within
/// `cut_tol` of pi are rejected because the logarithm is not unique there.
inline Vector3 log(const Matrix3& r, double cut_tol = 1e-8) {
  const Vector3 sv = vee(r);  // sin(theta) * axis
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double sn = sv.norm();
  const double theta = std::atan2(sn, c);
  if (theta > std::numbers::pi - cut_tol) fail(Errc::CutLocus, "rotation angle equals pi");
  if (theta < 1e-4) return (1.0 + theta * theta / 6.0) * sv;
  if (theta < 3.0) return (theta / sn) * sv;
  // Near pi the antisymmetric part is tiny; recover the axis from the
  // symmetric part (1 - cos theta) a a^T and its sign from sv.
  const Matrix3 b = 0.5 * (r + r.transpose()) - c * Matrix3::Identity();
  Eigen::Index k;
  b.diagonal().maxCoeff(&k);
  Vector3 axis = b.col(k) / std::sqrt(b(k, k) * (1.0 - c));
  axis.normalize();
  if (axis.dot(sv) < 0.0) axis = -axis;
  return theta * axis;
}

struct PolarResult {
  Matrix3 q;
  int iterations = 0;
  /// Frobenius norms of successive updates |Q_{k+1} - Q_k|.
  std::vector<double> residuals;
};

inline constexpr int kPolarMaxIterations = 50;
inline constexpr double kPolarTolerance = 1e-13;

/// Orthogonal polar factor by the Newton iteration Q <- (Q + Q^{-T}) / 2.
inline PolarResult polar_decompose(const Matrix3& a) {
  const double det = a.determinant();
  const double scale = a.norm();
  if (!(std::abs(det) > 1e-14 * scale * scale * scale)) fail(Errc::SingularMatrix, "polar decomposition of a singular matrix");
  if (det < 0.0) fail(Errc::InvalidArgument, "polar factor of a matrix with negative determinant is not a rotation");
  PolarResult out;
  Matrix3 q = a;
  for (int k = 0; k < kPolarMaxIterations; ++k) {
    const Matrix3 next = 0.5 * (q + q.inverse().transpose());
    const double r = (next - q).norm();
    q = next;
    out.residuals.push_back(r);
    out.iterations = k + 1;
    if (r <= kPolarTolerance * std::max(1.0, q.norm())) {
      out.q = q;
      return out;
    }
  }
  fail(Errc::NonConvergence, "polar iteration did not converge in 50 steps");
}

/// Derivative of the polar factor with respect to the (row-major) entries of
/// `a`, obtained by differentiating each Newton step. The derivative is
/// carried through exactly as many steps as the primal iteration takes.
inline Matrix polar_jacobian(const Matrix3& a) {
  const int steps = polar_decompose(a).iterations;
  std::array<Matrix3, 9> dq;
  for (int j = 0; j < 9; ++j) {
    dq[j].setZero();
    dq[j](j / 3, j % 3) = 1.0;
  }
  Matrix3 q = a;
  for (int k = 0; k < steps; ++k) {
    const Matrix3 qit = q.inverse().transpose();
    for (auto& d : dq) d = 0.5 * (d - qit * d.transpose() * qit);
    q = 0.5 * (q + qit);
  }
  Matrix jac(9, 9);
  for (int j = 0; j < 9; ++j) jac.col(j) = as_vector(dq[j]);
  return jac;
}

}  // namespace so3

/// SO(3) inside R^{3x3} (row-major coordinates) with the bi-invariant metric
/// induced by the Frobenius inner product: dist(P, Q) = |log(P^T Q)|_F,
/// which is sqrt(2) times the rotation angle.
class Rotation3 {
 public:
  static constexpr double kCutLocusTolerance = 1e-8;

  ManifoldKind kind() const { return {ManifoldTag::Rotation3, 3, 9, 1.0 / 8.0}; }
  int dim() const { return 3; }
  int embed_dim() const { return 9; }
  double injectivity_radius() const { return std::numbers::sqrt2 * std::numbers::pi; }

  void check_point(const ManifoldPoint& p) const {
    const so3::Matrix3 q = so3::as_matrix(p.coords);
    if ((q.transpose() * q - so3::Matrix3::Identity()).norm() > 1e-10 || q.determinant() <= 0.0) {
      fail(Errc::InvalidPoint, "matrix is not a rotation");
    }
  }

  void check_tangent(const TangentVector& t) const {
    check_point(t.base);
    const so3::Matrix3 w = so3::as_matrix(t.base.coords).transpose() * so3::as_matrix(t.vec);
    if ((w + w.transpose()).norm() > 1e-10 * std::max(1.0, w.norm())) {
      fail(Errc::InvalidPoint, "vector is not tangent to SO(3)");
    }
  }

  double dist(const ManifoldPoint& p, const ManifoldPoint& q) const {
    return std::numbers::sqrt2 * rotation_vector(p, q).norm();
  }

  ManifoldPoint exp(const TangentVector& b) const {
    check_tangent(b);
    const so3::Matrix3 base = so3::as_matrix(b.base.coords);
    const so3::Vector3 w = so3::vee(base.transpose() * so3::as_matrix(b.vec));
    return {so3::as_vector(base * so3::exp(w))};
  }

  TangentVector log(const ManifoldPoint& p, const ManifoldPoint& q) const {
    const so3::Vector3 w = rotation_vector(p, q);
    return {p, so3::as_vector(so3::as_matrix(p.coords) * so3::hat(w))};
  }

  /// The Jacobi operator of the Frobenius bi-invariant metric is 1/8 on the
  /// whole orthogonal complement of the geodesic, so the Hessian has the
  /// sphere structure with s = theta / 2 (theta the rotation angle).
  Matrix dist2_hess_q(const ManifoldPoint& v, const ManifoldPoint& q) const {
    const TangentVector l = log(q, v);
    const double r = l.vec.norm();
    Matrix h = 2.0 * Matrix::Identity(3, 3);
    if (r == 0.0) return h;
    const Vector c = tangent_frame(q).transpose() * (l.vec / r);
    const double perp = detail::theta_cot(r / std::sqrt(8.0));
    h = 2.0 * (perp * Matrix::Identity(3, 3) + (1.0 - perp) * c * c.transpose());
    return h;
  }

  /// Mixed block -2 d_v log_q(v). Parallel transport from v to q = v e^X is
  /// W -> v e^{X/2} (v^T W) e^{X/2}.
  Matrix dist2_mixed(const ManifoldPoint& v, const ManifoldPoint& q) const {
    const Matrix fq = tangent_frame(q);
    const Matrix fv = tangent_frame(v);
    const so3::Vector3 w = rotation_vector(v, q);
    const double r = std::numbers::sqrt2 * w.norm();
    if (r == 0.0) return -2.0 * fq.transpose() * fv;
    const so3::Matrix3 vm = so3::as_matrix(v.coords);
    const so3::Matrix3 half = so3::exp(0.5 * w);
    const Vector uv = -so3::as_vector(vm * so3::hat(w)) / r;
    const double s = detail::theta_over_sin(r / std::sqrt(8.0));
    Matrix out(3, 3);
    for (int j = 0; j < 3; ++j) {
      const Vector col = fv.col(j);
      const double radial = col.dot(uv);
      const Vector scaled = radial * uv + s * (col - radial * uv);
      const so3::Matrix3 moved = vm * half * (vm.transpose() * so3::as_matrix(scaled)) * half;
      out.col(j) = fq.transpose() * so3::as_vector(moved);
    }
    return -2.0 * out;
  }

  Matrix tangent_frame(const ManifoldPoint& p) const {
    check_point(p);
    const so3::Matrix3 q = so3::as_matrix(p.coords);
    return detail::gram_schmidt_frame(9, 3, [&](const Vector& w) { return project_tangent_unchecked(q, w); });
  }

  Vector project_tangent(const ManifoldPoint& p, const Vector& w) const {
    check_point(p);
    return project_tangent_unchecked(so3::as_matrix(p.coords), w);
  }

  bool has_projection() const { return true; }

  ManifoldPoint project_point(const Vector& w) const {
    try {
      return {so3::as_vector(so3::polar_decompose(so3::as_matrix(w)).q)};
    } catch (const Error& e) {
      if (e.code() == Errc::DimensionMismatch) throw;
      fail(Errc::ProjectionUndefined, e.what());
    }
  }

  Matrix projection_jacobian(const Vector& w) const {
    try {
      return so3::polar_jacobian(so3::as_matrix(w));
    } catch (const Error& e) {
      if (e.code() == Errc::DimensionMismatch) throw;
      fail(Errc::ProjectionUndefined, e.what());
    }
  }

  /// Rotation vector of p^T q.
  so3::Vector3 rotation_vector(const ManifoldPoint& p, const ManifoldPoint& q) const {
    check_point(p);
    check_point(q);
    return so3::log(so3::as_matrix(p.coords).transpose() * so3::as_matrix(q.coords), kCutLocusTolerance);
  }

 private:
  static Vector project_tangent_unchecked(const so3::Matrix3& q, const Vector& w) {
    return so3::as_vector(q * so3::skew(q.transpose() * so3::as_matrix(w)));
  }
};

}  // namespace gfe
