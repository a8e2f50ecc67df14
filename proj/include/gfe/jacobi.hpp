#pragma once

#include <algorithm>
#include <vector>

#include "gfe/interpolant.hpp"

namespace gfe {

/// Linear map from nodal tangent coordinates to the test field and its
/// reference gradient at one point xi.
///
/// embedded[i] (embed_dim x dim) sends the coordinates c_i of b_i in
/// tangent_basis(v_i) to the contribution of b_i at the interpolated value,
/// so that the field is sum_i embedded[i] * c_i.
struct FieldOperator {
  ManifoldPoint value;
  Vector weights;
  std::vector<Matrix> embedded;
  /// gradient[k][i]: d embedded[i] / d xi_k, tangentially projected.
  std::vector<std::vector<Matrix>> gradient;
};

namespace detail {

/// frame * N_i for every node: the value derivative per unit shape weight.
template <Manifold M>
std::vector<Matrix> unit_weight_maps(const typename Interpolant<M>::Local& loc) {
  std::vector<Matrix> out;
  out.reserve(loc.normalized.size());
  for (const Matrix& n : loc.normalized) out.push_back(loc.frame * n);
  return out;
}

}  // namespace detail

inline constexpr double kFieldGradientStep = 1e-6;
inline constexpr double kStencilMargin = 1e-5;

template <Manifold M>
FieldOperator field_operator(const Interpolant<M>& interp, const Vector& xi) {
  const auto loc = interp.local(xi);
  FieldOperator op;
  op.value = loc.value;
  op.weights = loc.weights;
  op.embedded = detail::unit_weight_maps<M>(loc);
  for (std::size_t i = 0; i < op.embedded.size(); ++i) op.embedded[i] *= loc.weights(static_cast<Eigen::Index>(i));
  return op;
}

/// Field operator together with its reference gradient. With
/// embedded[i] = phi_i * A_i, the gradient is grad(phi_i) A_i + phi_i dA_i,
/// where dA_i is a central difference of A_i with step h. The stencil must
/// keep every barycentric coordinate at least max(h, 1e-5) inside.
template <Manifold M>
FieldOperator field_gradient_operator(const Interpolant<M>& interp, const Vector& xi, double h = kFieldGradientStep) {
  const ReferenceElement& elem = interp.element();
  if (elem.dim() > 0 && elem.barycentric(xi).minCoeff() < std::max(h, kStencilMargin)) {
    fail(Errc::StencilOutsideElement, "finite-difference stencil leaves the reference element");
  }
  const M& m = interp.manifold();
  const auto loc = interp.local(xi);
  const std::vector<Matrix> a = detail::unit_weight_maps<M>(loc);
  const Matrix dphi = elem.shape_gradients(xi);

  FieldOperator op;
  op.value = loc.value;
  op.weights = loc.weights;
  for (std::size_t i = 0; i < a.size(); ++i) op.embedded.push_back(loc.weights(static_cast<Eigen::Index>(i)) * a[i]);

  for (int k = 0; k < elem.dim(); ++k) {
    const Vector step = Vector::Unit(elem.dim(), k) * h;
    const std::vector<Matrix> plus = detail::unit_weight_maps<M>(interp.local(xi + step));
    const std::vector<Matrix> minus = detail::unit_weight_maps<M>(interp.local(xi - step));
    std::vector<Matrix> col;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      Matrix g = dphi(ii, k) * a[i] + loc.weights(ii) * (plus[i] - minus[i]) / (2.0 * h);
      for (Eigen::Index c = 0; c < g.cols(); ++c) g.col(c) = m.project_tangent(loc.value, g.col(c));
      col.push_back(std::move(g));
    }
    op.gradient.push_back(std::move(col));
  }
  return op;
}

/// Variation field of an interpolant generated by nodal tangent vectors b_i.
template <Manifold M>
class ElementTestField {
 public:
  static constexpr double kBaseTolerance = 1e-12;

  ElementTestField(Interpolant<M> interp, std::vector<TangentVector> nodal_vectors)
      : interp_(std::move(interp)), nodal_(std::move(nodal_vectors)) {
    const auto& vals = interp_.values();
    if (nodal_.size() != vals.size()) fail(Errc::DimensionMismatch, "one nodal vector per Lagrange node required");
    const M& m = interp_.manifold();
    for (std::size_t i = 0; i < nodal_.size(); ++i) {
      if (nodal_[i].base.coords.size() != vals[i].coords.size() ||
          (nodal_[i].base.coords - vals[i].coords).norm() > kBaseTolerance) {
        fail(Errc::InvalidPoint, "nodal vector " + std::to_string(i) + " is not based at the nodal value");
      }
      coeffs_.push_back(m.tangent_frame(vals[i]).transpose() * nodal_[i].vec);
    }
  }

  /// Field from nodal coordinates in tangent_basis(v_i).
  static ElementTestField from_coefficients(Interpolant<M> interp, const std::vector<Vector>& coeffs) {
    std::vector<TangentVector> nodal;
    for (std::size_t i = 0; i < coeffs.size() && i < interp.values().size(); ++i) {
      const auto& v = interp.values()[i];
      nodal.push_back({v, interp.manifold().tangent_frame(v) * coeffs[i]});
    }
    return ElementTestField(std::move(interp), std::move(nodal));
  }

  const Interpolant<M>& interpolant() const { return interp_; }
  const std::vector<TangentVector>& nodal_vectors() const { return nodal_; }
  const std::vector<Vector>& coefficients() const { return coeffs_; }

  TangentVector apply(const FieldOperator& op) const {
    Vector out = Vector::Zero(op.value.coords.size());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) out += op.embedded[i] * coeffs_[i];
    return {op.value, out};
  }

  std::vector<TangentVector> apply_gradient(const FieldOperator& op) const {
    std::vector<TangentVector> out;
    for (const auto& col : op.gradient) {
      Vector g = Vector::Zero(op.value.coords.size());
      for (std::size_t i = 0; i < coeffs_.size(); ++i) g += col[i] * coeffs_[i];
      out.push_back({op.value, g});
    }
    return out;
  }

 private:
  Interpolant<M> interp_;
  std::vector<TangentVector> nodal_;
  std::vector<Vector> coeffs_;
};

template <Manifold M>
TangentVector eval_field(const ElementTestField<M>& field, const Vector& xi) {
  return field.apply(field_operator(field.interpolant(), xi));
}

/// Reference-coordinate gradient of the field, one tangent vector per xi_k.
template <Manifold M>
std::vector<TangentVector> eval_field_gradient(const ElementTestField<M>& field, const Vector& xi,
                                               double h = kFieldGradientStep) {
  return field.apply_gradient(field_gradient_operator(field.interpolant(), xi, h));
}

/// Fields Phi_ij equal to tangent_basis(v_i)[j] at node i and zero at every
/// other node, ordered node-major.
template <Manifold M>
std::vector<ElementTestField<M>> nodal_basis_fields(const Interpolant<M>& interp) {
  const int m = interp.element().size();
  const int dim = interp.manifold().dim();
  std::vector<ElementTestField<M>> out;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < dim; ++j) {
      std::vector<Vector> c(static_cast<std::size_t>(m), Vector::Zero(dim));
      c[static_cast<std::size_t>(i)](j) = 1.0;
      out.push_back(ElementTestField<M>::from_coefficients(interp, c));
    }
  return out;
}

}  // namespace gfe
