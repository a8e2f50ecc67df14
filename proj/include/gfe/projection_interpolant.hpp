#pragma once

#include <vector>

#include "gfe/manifold.hpp"
#include "gfe/reference_element.hpp"

namespace gfe {

/// Projection-based interpolation: Lagrange interpolation of the embedded
/// nodal values followed by the closest-point projection onto M.
template <Manifold M>
class ProjectionInterpolant {
 public:
  ProjectionInterpolant(M manifold, ReferenceElement elem, std::vector<ManifoldPoint> values)
      : manifold_(std::move(manifold)), elem_(std::move(elem)), values_(std::move(values)) {
    if (!manifold_.has_projection()) fail(Errc::InvalidArgument, "manifold has no closest-point projection");
    if (static_cast<int>(values_.size()) != elem_.size()) {
      fail(Errc::DimensionMismatch, "number of nodal values does not match the reference element");
    }
    for (const auto& v : values_) manifold_.check_point(v);
  }

  const M& manifold() const { return manifold_; }
  const ReferenceElement& element() const { return elem_; }
  const std::vector<ManifoldPoint>& values() const { return values_; }

  /// sum_i phi_i(xi) v_i in the embedding space.
  Vector embedded_sum(const Vector& xi) const { return combine(elem_.shape_values(xi)); }

  ManifoldPoint eval(const Vector& xi) const { return manifold_.project_point(embedded_sum(xi)); }

  std::vector<TangentVector> d_dxi(const Vector& xi) const {
    const Linearization lin = linearize(xi);
    const Matrix dphi = elem_.shape_gradients(xi);
    std::vector<TangentVector> out;
    for (int k = 0; k < elem_.dim(); ++k) out.push_back({lin.value, lin.jacobian * combine(dphi.col(k))});
    return out;
  }

  Matrix d_dv(const Vector& xi, int i) const { return d_dv_all(xi).at(static_cast<std::size_t>(i)); }

  std::vector<Matrix> d_dv_all(const Vector& xi) const { return d_dv_all(linearize(xi)); }

  struct Linearization {
    ManifoldPoint value;
    Matrix frame;
    Vector weights;
    /// dP/dw at the embedded sum.
    Matrix jacobian;
  };

  Linearization linearize(const Vector& xi) const {
    Linearization lin;
    lin.weights = elem_.shape_values(xi);
    const Vector w = combine(lin.weights);
    lin.value = manifold_.project_point(w);
    lin.frame = manifold_.tangent_frame(lin.value);
    lin.jacobian = manifold_.projection_jacobian(w);
    return lin;
  }

  std::vector<Matrix> d_dv_all(const Linearization& lin) const {
    std::vector<Matrix> out = normalized_d_dv(lin);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= lin.weights(static_cast<Eigen::Index>(i));
    return out;
  }

  /// d_dv(xi, i) / phi_i(xi).
  std::vector<Matrix> normalized_d_dv(const Linearization& lin) const {
    std::vector<Matrix> out;
    out.reserve(values_.size());
    for (const auto& v : values_) out.push_back(lin.frame.transpose() * lin.jacobian * manifold_.tangent_frame(v));
    return out;
  }

  /// Tangential gradient norm of q -> sum_i phi_i(xi) |v_i - q|^2 at q. It
  /// vanishes at the interpolated value when the projection is the
  /// closest-point projection.
  double chordal_residual(const Vector& xi, const ManifoldPoint& q) const {
    const Vector w = elem_.shape_values(xi);
    Vector grad = Vector::Zero(manifold_.embed_dim());
    for (std::size_t i = 0; i < values_.size(); ++i) grad -= 2.0 * w(static_cast<Eigen::Index>(i)) * (values_[i].coords - q.coords);
    return manifold_.project_tangent(q, grad).norm();
  }

  double chordal_equivalence_check(const Vector& xi) const { return chordal_residual(xi, eval(xi)); }

 private:
  Vector combine(const Vector& w) const {
    Vector sum = Vector::Zero(manifold_.embed_dim());
    for (std::size_t i = 0; i < values_.size(); ++i) sum += w(static_cast<Eigen::Index>(i)) * values_[i].coords;
    return sum;
  }

  M manifold_;
  ReferenceElement elem_;
  std::vector<ManifoldPoint> values_;
};

}  // namespace gfe
