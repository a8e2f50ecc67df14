#pragma once

#include "gfe/manifold.hpp"

namespace gfe {

/// Flat space R^k. The projection is the identity, so every downstream
/// construction collapses to classical Lagrange finite elements.
class EuclideanSpace {
 public:
  explicit EuclideanSpace(int k) : k_(k) {
    if (k < 1) fail(Errc::InvalidArgument, "Euclidean dimension must be positive");
  }

  ManifoldKind kind() const { return {ManifoldTag::Euclidean, k_, k_, std::nullopt}; }
  int dim() const { return k_; }
  int embed_dim() const { return k_; }
  double injectivity_radius() const { return std::numeric_limits<double>::infinity(); }

  void check_point(const ManifoldPoint& p) const { detail::require_size(p.coords, k_, "point"); }

  double dist(const ManifoldPoint& p, const ManifoldPoint& q) const {
    check_point(p);
    check_point(q);
    return (p.coords - q.coords).norm();
  }

  ManifoldPoint exp(const TangentVector& b) const {
    check_point(b.base);
    detail::require_size(b.vec, k_, "tangent vector");
    return {b.base.coords + b.vec};
  }

  TangentVector log(const ManifoldPoint& p, const ManifoldPoint& q) const {
    check_point(p);
    check_point(q);
    return {p, q.coords - p.coords};
  }

  Matrix dist2_hess_q(const ManifoldPoint& v, const ManifoldPoint& q) const {
    check_point(v);
    check_point(q);
    return 2.0 * Matrix::Identity(k_, k_);
  }

  Matrix dist2_mixed(const ManifoldPoint& v, const ManifoldPoint& q) const {
    check_point(v);
    check_point(q);
    return -2.0 * Matrix::Identity(k_, k_);
  }

  Matrix tangent_frame(const ManifoldPoint& p) const {
    check_point(p);
    return Matrix::Identity(k_, k_);
  }

  Vector project_tangent(const ManifoldPoint& p, const Vector& w) const {
    check_point(p);
    detail::require_size(w, k_, "ambient vector");
    return w;
  }

  bool has_projection() const { return true; }

  ManifoldPoint project_point(const Vector& w) const {
    detail::require_size(w, k_, "ambient vector");
    return {w};
  }

  Matrix projection_jacobian(const Vector& w) const {
    detail::require_size(w, k_, "ambient vector");
    return Matrix::Identity(k_, k_);
  }

 private:
  int k_;
};

}  // namespace gfe
