#pragma once

#include <limits>
#include <numbers>
#include <vector>

#include "gfe/manifold.hpp"
#include "gfe/reference_element.hpp"

namespace gfe {

/// Advisory well-posedness diagnostic for first-order data: the nodal values
/// must fit in a convex ball of radius below pi / (4 sqrt K). Half the
/// largest pairwise distance stands in for the ball radius.
struct KarcherDiagnostic {
  double max_pairwise_dist = 0.0;
  double radius_bound = std::numeric_limits<double>::infinity();
  bool satisfied = true;
};

/// Outcome of the weighted-mean Newton solve at one reference point.
struct GeodesicSolution {
  ManifoldPoint value;
  int newton_steps = 0;
  /// |sum_i phi_i(xi) log_value(v_i)|
  double residual = 0.0;
};

namespace detail {

/// Largest pairwise distance; pairs on the cut locus count as infinitely far.
template <Manifold M>
double max_pairwise_distance(const M& m, const std::vector<ManifoldPoint>& values) {
  double out = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      try {
        out = std::max(out, m.dist(values[i], values[j]));
      } catch (const Error& e) {
        if (e.code() != Errc::CutLocus) throw;
        return std::numeric_limits<double>::infinity();
      }
    }
  return out;
}

template <Manifold M>
KarcherDiagnostic karcher_diagnostic(const M& m, const std::vector<ManifoldPoint>& values) {
  KarcherDiagnostic d;
  d.max_pairwise_dist = max_pairwise_distance(m, values);
  if (const auto k = m.kind().curvature_bound) {
    d.radius_bound = 0.25 * std::numbers::pi / std::sqrt(*k);
    d.satisfied = 0.5 * d.max_pairwise_dist < d.radius_bound;
  }
  return d;
}

}  // namespace detail

/// Geodesic interpolation: the value at xi is the minimizer of
///   q -> sum_i phi_i(xi) dist(v_i, q)^2,
/// found by an intrinsic Newton method. Derivatives with respect to xi and
/// to each v_i come from differentiating the first-order condition
///   F(v, xi, q) = -2 sum_i phi_i(xi) log_q(v_i) = 0.
template <Manifold M>
class GeodesicInterpolant {
 public:
  static constexpr double kResidualTolerance = 1e-12;
  /// Newton keeps going below the tolerance while it still makes progress.
  static constexpr double kResidualTarget = 1e-14;
  static constexpr int kMaxNewtonSteps = 100;
  static constexpr int kMaxHalvings = 20;
  /// Fraction of the injectivity radius the nodal values may spread over.
  static constexpr double kAdmissibleSpread = 0.9;

  GeodesicInterpolant(M manifold, ReferenceElement elem, std::vector<ManifoldPoint> values)
      : manifold_(std::move(manifold)), elem_(std::move(elem)), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != elem_.size()) {
      fail(Errc::DimensionMismatch, "number of nodal values does not match the reference element");
    }
    for (const auto& v : values_) manifold_.check_point(v);
    spread_ = detail::max_pairwise_distance(manifold_, values_);
  }

  const M& manifold() const { return manifold_; }
  const ReferenceElement& element() const { return elem_; }
  const std::vector<ManifoldPoint>& values() const { return values_; }

  KarcherDiagnostic karcher_check() const { return detail::karcher_diagnostic(manifold_, values_); }

  GeodesicSolution solve(const Vector& xi) const {
    const Vector w = elem_.shape_values(xi);
    if (spread_ > kAdmissibleSpread * manifold_.injectivity_radius()) {
      fail(Errc::Admissibility, "nodal values spread over " + std::to_string(spread_) + ", beyond 0.9 of the injectivity radius");
    }
    GeodesicSolution sol;
    if (spread_ == 0.0) {
      sol.value = values_.front();
      return sol;
    }
    ManifoldPoint q = initial_guess(w);
    double r = residual(w, q);
    while (r > kResidualTarget) {
      if (sol.newton_steps == kMaxNewtonSteps) {
        if (r <= kResidualTolerance) break;
        fail(Errc::NonConvergence, "Newton iteration did not converge in 100 steps");
      }
      const Matrix frame = manifold_.tangent_frame(q);
      Vector grad = Vector::Zero(manifold_.dim());  // sum_i w_i log_q(v_i), i.e. -grad f / 2
      Matrix hess = Matrix::Zero(manifold_.dim(), manifold_.dim());
      for (std::size_t i = 0; i < values_.size(); ++i) {
        const double wi = w(static_cast<Eigen::Index>(i));
        if (wi == 0.0) continue;
        grad += wi * (frame.transpose() * manifold_.log(q, values_[i]).vec);
        hess += wi * manifold_.dist2_hess_q(values_[i], q);
      }
      const Vector step = hess.fullPivLu().solve(2.0 * grad);
      if (!step.allFinite()) fail(Errc::NonConvergence, "singular Newton system");
      double t = 1.0;
      bool accepted = false;
      for (int k = 0; k <= kMaxHalvings && !accepted; ++k, t *= 0.5) {
        try {
          ManifoldPoint trial = manifold_.exp({q, frame * (t * step)});
          const double rt = residual(w, trial);
          if (rt < r) {
            q = std::move(trial);
            r = rt;
            accepted = true;
          }
        } catch (const Error& e) {
          if (e.code() != Errc::CutLocus) throw;
        }
      }
      ++sol.newton_steps;
      if (!accepted && r <= kResidualTolerance) break;
      if (!accepted) fail(Errc::NonConvergence, "damped Newton step failed to reduce the residual");
    }
    const Matrix hess = hessian(w, q);
    if (Eigen::SelfAdjointEigenSolver<Matrix>(hess).eigenvalues().minCoeff() <= 0.0) {
      fail(Errc::IndefiniteHessian, "weighted mean converged to a non-minimizing critical point");
    }
    sol.value = std::move(q);
    sol.residual = r;
    return sol;
  }

  ManifoldPoint eval(const Vector& xi) const { return solve(xi).value; }

  /// Partial derivatives d value / d xi_k as tangent vectors at the value.
  std::vector<TangentVector> d_dxi(const Vector& xi) const {
    const Linearization lin = linearize(xi);
    const Matrix dphi = elem_.shape_gradients(xi);
    Matrix rhs = Matrix::Zero(manifold_.dim(), elem_.dim());
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const Vector l = lin.frame.transpose() * manifold_.log(lin.value, values_[i]).vec;
      for (int k = 0; k < elem_.dim(); ++k) rhs.col(k) += 2.0 * dphi(static_cast<Eigen::Index>(i), k) * l;
    }
    const Matrix x = lin.solver.solve(rhs);
    std::vector<TangentVector> out;
    for (int k = 0; k < elem_.dim(); ++k) out.push_back({lin.value, lin.frame * x.col(k)});
    return out;
  }

  /// Differential with respect to v_i, from the tangent basis at v_i to the
  /// tangent basis at the value.
  Matrix d_dv(const Vector& xi, int i) const { return d_dv_all(xi).at(static_cast<std::size_t>(i)); }

  std::vector<Matrix> d_dv_all(const Vector& xi) const { return d_dv_all(linearize(xi)); }

  /// Value, its tangent frame and the factorized Hessian at xi; shared by
  /// all derivative queries at one point.
  struct Linearization {
    ManifoldPoint value;
    Matrix frame;
    Vector weights;
    Eigen::FullPivLU<Matrix> solver;
  };

  Linearization linearize(const Vector& xi) const {
    Linearization lin;
    lin.weights = elem_.shape_values(xi);
    lin.value = eval(xi);
    lin.frame = manifold_.tangent_frame(lin.value);
    const Matrix hess = hessian(lin.weights, lin.value);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Matrix>(hess).eigenvalues();
    if (ev.cwiseAbs().minCoeff() <= 1e-12 * ev.cwiseAbs().maxCoeff()) {
      fail(Errc::SingularSystem, "Hessian of the weighted distance functional is singular");
    }
    lin.solver.compute(hess);
    return lin;
  }

  std::vector<Matrix> d_dv_all(const Linearization& lin) const {
    std::vector<Matrix> out = normalized_d_dv(lin);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= lin.weights(static_cast<Eigen::Index>(i));
    return out;
  }

  /// d_dv(xi, i) / phi_i(xi), which stays smooth where phi_i vanishes.
  std::vector<Matrix> normalized_d_dv(const Linearization& lin) const {
    std::vector<Matrix> out;
    out.reserve(values_.size());
    for (const auto& v : values_) out.push_back(lin.solver.solve(-manifold_.dist2_mixed(v, lin.value)));
    return out;
  }

  /// |sum_i phi_i(xi) log_q(v_i)| at an arbitrary q.
  double optimality_residual(const Vector& xi, const ManifoldPoint& q) const {
    return residual(elem_.shape_values(xi), q);
  }

 private:
  ManifoldPoint initial_guess(const Vector& w) const {
    if (manifold_.has_projection()) {
      Vector sum = Vector::Zero(manifold_.embed_dim());
      for (std::size_t i = 0; i < values_.size(); ++i) sum += w(static_cast<Eigen::Index>(i)) * values_[i].coords;
      try {
        return manifold_.project_point(sum);
      } catch (const Error& e) {
        if (e.code() != Errc::ProjectionUndefined) throw;
      }
    }
    Eigen::Index best;
    w.maxCoeff(&best);
    return values_[static_cast<std::size_t>(best)];
  }

  double residual(const Vector& w, const ManifoldPoint& q) const {
    Vector sum = Vector::Zero(manifold_.embed_dim());
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double wi = w(static_cast<Eigen::Index>(i));
      if (wi != 0.0) sum += wi * manifold_.log(q, values_[i]).vec;
    }
    return sum.norm();
  }

  Matrix hessian(const Vector& w, const ManifoldPoint& q) const {
    Matrix hess = Matrix::Zero(manifold_.dim(), manifold_.dim());
    // The weights sum to one up to roundoff; dividing out their sum, taken
    // in the same order, keeps the flat case (all Hessians 2I) exact, which
    // finite differences in xi rely on.
    double total = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double wi = w(static_cast<Eigen::Index>(i));
      if (wi == 0.0) continue;
      hess += wi * manifold_.dist2_hess_q(values_[i], q);
      total += wi;
    }
    return hess / total;
  }

  M manifold_;
  ReferenceElement elem_;
  std::vector<ManifoldPoint> values_;
  double spread_ = 0.0;
};

}  // namespace gfe
