#pragma once

#include <numbers>

#include "gfe/manifold.hpp"

namespace gfe {

/// The unit sphere S^n embedded in R^{n+1} with the round metric.
class Sphere {
 public:
  static constexpr double kCutLocusTolerance = 1e-8;

  explicit Sphere(int n) : n_(n) {
    if (n < 1) fail(Errc::InvalidArgument, "sphere dimension must be positive");
  }

  ManifoldKind kind() const { return {ManifoldTag::Sphere, n_, n_ + 1, 1.0}; }
  int dim() const { return n_; }
  int embed_dim() const { return n_ + 1; }
  double injectivity_radius() const { return std::numbers::pi; }

  void check_point(const ManifoldPoint& p) const {
    detail::require_size(p.coords, n_ + 1, "point");
    if (std::abs(p.coords.norm() - 1.0) > 1e-12) fail(Errc::InvalidPoint, "sphere point is not of unit norm");
  }

  void check_tangent(const TangentVector& t) const {
    check_point(t.base);
    detail::require_size(t.vec, n_ + 1, "tangent vector");
    if (std::abs(t.vec.dot(t.base.coords)) > 1e-10 * std::max(1.0, t.vec.norm())) {
      fail(Errc::InvalidPoint, "vector is not tangent to the sphere");
    }
  }

  /// Great-circle angle, evaluated as 2 atan2(|p-q|, |p+q|) which stays
  /// accurate both near 0 and near pi.
  double dist(const ManifoldPoint& p, const ManifoldPoint& q) const {
    check_point(p);
    check_point(q);
    return 2.0 * std::atan2((p.coords - q.coords).norm(), (p.coords + q.coords).norm());
  }

  ManifoldPoint exp(const TangentVector& b) const {
    check_tangent(b);
    const double t = b.vec.norm();
    if (t == 0.0) return b.base;
    Vector x = std::cos(t) * b.base.coords + (std::sin(t) / t) * b.vec;
    x.normalize();
    return {std::move(x)};
  }

  TangentVector log(const ManifoldPoint& p, const ManifoldPoint& q) const {
    const double theta = dist(p, q);
    if (theta > std::numbers::pi - kCutLocusTolerance) fail(Errc::CutLocus, "antipodal points on the sphere");
    const Vector diff = q.coords - p.coords;
    Vector u = diff - diff.dot(p.coords) * p.coords;
    const double un = u.norm();
    if (un == 0.0 || theta == 0.0) return {p, Vector::Zero(n_ + 1)};
    u *= theta / un;
    return {p, std::move(u)};
  }

  /// Hessian of q -> dist(v,q)^2; eigenvalues 2 (radial) and 2 theta cot theta.
  Matrix dist2_hess_q(const ManifoldPoint& v, const ManifoldPoint& q) const {
    const TangentVector l = log(q, v);
    const double theta = l.vec.norm();
    const Matrix frame = tangent_frame(q);
    Matrix h = 2.0 * Matrix::Identity(n_, n_);
    if (theta == 0.0) return h;
    const Vector c = frame.transpose() * (l.vec / theta);
    const double perp = detail::theta_cot(theta);
    h = 2.0 * (perp * Matrix::Identity(n_, n_) + (1.0 - perp) * c * c.transpose());
    return h;
  }

  /// d/dv of the q-gradient -2 log_q(v): radial directions are transported,
  /// orthogonal ones additionally scaled by theta / sin theta.
  Matrix dist2_mixed(const ManifoldPoint& v, const ManifoldPoint& q) const {
    const TangentVector lq = log(q, v);
    const double theta = lq.vec.norm();
    const Matrix fq = tangent_frame(q);
    const Matrix fv = tangent_frame(v);
    if (theta == 0.0) return -2.0 * fq.transpose() * fv;
    const Vector u = lq.vec / theta;
    const Vector uv = -log(v, q).vec / theta;
    const double s = detail::theta_over_sin(theta);
    const Vector uq_c = fq.transpose() * u;
    const Vector uv_cv = fv.transpose() * uv;
    const Vector uv_cq = fq.transpose() * uv;
    return -2.0 * (uq_c * uv_cv.transpose() + s * (fq.transpose() * fv - uv_cq * uv_cv.transpose()));
  }

  Matrix tangent_frame(const ManifoldPoint& p) const {
    check_point(p);
    return detail::gram_schmidt_frame(n_ + 1, n_, [&](const Vector& w) { return project_tangent_unchecked(p, w); });
  }

  Vector project_tangent(const ManifoldPoint& p, const Vector& w) const {
    check_point(p);
    detail::require_size(w, n_ + 1, "ambient vector");
    return project_tangent_unchecked(p, w);
  }

  bool has_projection() const { return true; }

  ManifoldPoint project_point(const Vector& w) const {
    detail::require_size(w, n_ + 1, "ambient vector");
    const double nw = w.norm();
    if (!(nw > 1e-12)) fail(Errc::ProjectionUndefined, "cannot normalize a (near) zero vector");
    return {w / nw};
  }

  /// dP/dw = I/|w| - w w^T/|w|^3.
  Matrix projection_jacobian(const Vector& w) const {
    detail::require_size(w, n_ + 1, "ambient vector");
    const double nw = w.norm();
    if (!(nw > 1e-12)) fail(Errc::ProjectionUndefined, "cannot normalize a (near) zero vector");
    return Matrix::Identity(n_ + 1, n_ + 1) / nw - w * w.transpose() / (nw * nw * nw);
  }

 private:
  static Vector project_tangent_unchecked(const ManifoldPoint& p, const Vector& w) {
    return w - w.dot(p.coords) * p.coords;
  }

  int n_;
};

}  // namespace gfe
