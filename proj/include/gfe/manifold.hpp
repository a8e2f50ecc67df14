#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gfe/error.hpp"

namespace gfe {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point on M, stored in embedded coordinates.
struct ManifoldPoint {
  Vector coords;
};

/// An embedded tangent vector anchored at `base`.
struct TangentVector {
  ManifoldPoint base;
  Vector vec;
};

enum class ManifoldTag { Euclidean, Sphere, Rotation3 };

struct ManifoldKind {
  ManifoldTag tag;
  int intrinsic_dim;
  int embed_dim;
  /// Upper bound on sectional curvature; empty when curvature is <= 0.
  std::optional<double> curvature_bound;
};

/// Interface shared by every concrete manifold. Tangent bases are returned
/// as embed_dim x dim matrices with orthonormal columns; all dim x dim blocks
/// are expressed in those bases.
template <class M>
concept Manifold = requires(const M m, const ManifoldPoint& p, const TangentVector& t, const Vector& w) {
  { m.kind() } -> std::same_as<ManifoldKind>;
  { m.dim() } -> std::convertible_to<int>;
  { m.embed_dim() } -> std::convertible_to<int>;
  { m.injectivity_radius() } -> std::convertible_to<double>;
  { m.dist(p, p) } -> std::convertible_to<double>;
  { m.exp(t) } -> std::same_as<ManifoldPoint>;
  { m.log(p, p) } -> std::same_as<TangentVector>;
  { m.dist2_hess_q(p, p) } -> std::same_as<Matrix>;
  { m.dist2_mixed(p, p) } -> std::same_as<Matrix>;
  { m.tangent_frame(p) } -> std::same_as<Matrix>;
  { m.project_tangent(p, w) } -> std::same_as<Vector>;
  { m.has_projection() } -> std::convertible_to<bool>;
  { m.project_point(w) } -> std::same_as<ManifoldPoint>;
  { m.projection_jacobian(w) } -> std::same_as<Matrix>;
  { m.check_point(p) };
};

namespace detail {

inline void require_size(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    fail(Errc::DimensionMismatch,
         std::string(what) + " has size " + std::to_string(v.size()) + ", expected " + std::to_string(n));
  }
}

/// Orthonormal basis of a tangent space: canonical embedding directions are
/// projected with `project`, then orthogonalized in index order. Candidates
/// whose norm drops below 1e-8 after projection are skipped. Each accepted
/// vector gets a second projection/orthogonalization pass so that a nearly
/// degenerate candidate does not leak a normal component.
template <class Projector>
Matrix gram_schmidt_frame(int embed_dim, int dim, Projector&& project) {
  Matrix frame(embed_dim, dim);
  int found = 0;
  for (int k = 0; k < embed_dim && found < dim; ++k) {
    Vector c = project(Vector::Unit(embed_dim, k));
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < found; ++j) c -= frame.col(j).dot(c) * frame.col(j);
      const double n = c.norm();
      if (pass == 0 && n < 1e-8) {
        c.resize(0);
        break;
      }
      c /= n;
      if (pass == 0) c = project(c);
    }
    if (c.size() == 0) continue;
    frame.col(found++) = c;
  }
  if (found != dim) fail(Errc::InvalidPoint, "could not complete a tangent basis");
  return frame;
}

/// theta / sin(theta) with a series near zero.
inline double theta_over_sin(double t) {
  if (std::abs(t) < 1e-4) return 1.0 + t * t / 6.0 + 7.0 * t * t * t * t / 360.0;
  return t / std::sin(t);
}

/// theta * cot(theta) with a series near zero.
inline double theta_cot(double t) {
  if (std::abs(t) < 1e-4) return 1.0 - t * t / 3.0 - t * t * t * t / 45.0;
  return t * std::cos(t) / std::sin(t);
}

}  // namespace detail

/// The tangent basis as a list of tangent vectors.
template <Manifold M>
std::vector<TangentVector> tangent_basis(const M& m, const ManifoldPoint& p) {
  const Matrix frame = m.tangent_frame(p);
  std::vector<TangentVector> out;
  out.reserve(static_cast<std::size_t>(frame.cols()));
  for (Eigen::Index j = 0; j < frame.cols(); ++j) out.push_back({p, frame.col(j)});
  return out;
}

}  // namespace gfe
