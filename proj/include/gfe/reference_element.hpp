#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "gfe/error.hpp"

namespace gfe {

/// Scalar Lagrange shape functions on the unit simplex
/// {xi >= 0, sum xi <= 1} of dimension 1..3 and order 1..2. Dimension 0 is
/// accepted as the one-node point element.
///
/// Nodes are the equispaced lattice points alpha / p (|alpha| <= p), listed
/// with the first coordinate running fastest. In 1D at order 2 this gives
/// 0, 1/2, 1; in 2D the three vertices are nodes 0, p and m - 1.
class ReferenceElement {
 public:
  static constexpr double kInsideTolerance = 1e-12;

  ReferenceElement(int dim, int order) : dim_(dim), order_(order) {
    if (dim < 0 || dim > 3) fail(Errc::InvalidArgument, "reference simplex dimension must be 0, 1, 2 or 3");
    if (order < 1 || order > 2) fail(Errc::InvalidArgument, "Lagrange order must be 1 or 2");
    std::vector<int> alpha(static_cast<std::size_t>(dim), 0);
    enumerate(alpha, dim - 1, order);
  }

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Eigen::VectorXd>& nodes() const { return nodes_; }
  const Eigen::VectorXd& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }

  /// Barycentric multi-index (sums to order) of node i; entry 0 belongs to
  /// the origin vertex, entry k to vertex e_k.
  const std::vector<int>& barycentric_index(int i) const { return bary_[static_cast<std::size_t>(i)]; }

  /// Local index of vertex k (0 = origin, k = e_k).
  int vertex_node(int k) const {
    for (int i = 0; i < size(); ++i)
      if (bary_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] == order_) return i;
    fail(Errc::InvalidArgument, "no such vertex");
  }

  Eigen::VectorXd barycentric(const Eigen::VectorXd& xi) const {
    if (xi.size() != dim_) fail(Errc::DimensionMismatch, "reference point has wrong dimension");
    Eigen::VectorXd lam(dim_ + 1);
    lam(0) = 1.0 - xi.sum();
    lam.tail(dim_) = xi;
    return lam;
  }

  bool contains(const Eigen::VectorXd& xi, double tol = kInsideTolerance) const {
    return barycentric(xi).minCoeff() >= -tol;
  }

  Eigen::VectorXd shape_values(const Eigen::VectorXd& xi) const {
    const Eigen::VectorXd lam = checked_barycentric(xi);
    Eigen::VectorXd out(size());
    for (int i = 0; i < size(); ++i) {
      double v = 1.0;
      for (int k = 0; k <= dim_; ++k) v *= factor(bary_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)], lam(k));
      out(i) = v;
    }
    return out;
  }

  /// Rows are the xi-gradients of the shape functions.
  Eigen::MatrixXd shape_gradients(const Eigen::VectorXd& xi) const {
    const Eigen::VectorXd lam = checked_barycentric(xi);
    Eigen::MatrixXd out(size(), dim_);
    for (int i = 0; i < size(); ++i) {
      const auto& b = bary_[static_cast<std::size_t>(i)];
      // d phi / d lambda_k by the product rule.
      Eigen::VectorXd dlam(dim_ + 1);
      for (int k = 0; k <= dim_; ++k) {
        double v = factor_derivative(b[static_cast<std::size_t>(k)], lam(k));
        for (int l = 0; l <= dim_; ++l)
          if (l != k) v *= factor(b[static_cast<std::size_t>(l)], lam(l));
        dlam(k) = v;
      }
      for (int j = 0; j < dim_; ++j) out(i, j) = dlam(j + 1) - dlam(0);
    }
    return out;
  }

 private:
  void enumerate(std::vector<int>& alpha, int axis, int budget) {
    if (axis < 0) {
      Eigen::VectorXd x(dim_);
      std::vector<int> b(static_cast<std::size_t>(dim_ + 1));
      int used = 0;
      for (int k = 0; k < dim_; ++k) {
        x(k) = static_cast<double>(alpha[static_cast<std::size_t>(k)]) / order_;
        b[static_cast<std::size_t>(k + 1)] = alpha[static_cast<std::size_t>(k)];
        used += alpha[static_cast<std::size_t>(k)];
      }
      b[0] = order_ - used;
      nodes_.push_back(std::move(x));
      bary_.push_back(std::move(b));
      return;
    }
    for (int a = 0; a <= budget; ++a) {
      alpha[static_cast<std::size_t>(axis)] = a;
      enumerate(alpha, axis - 1, budget - a);
    }
  }

  Eigen::VectorXd checked_barycentric(const Eigen::VectorXd& xi) const {
    Eigen::VectorXd lam = barycentric(xi);
    if (lam.minCoeff() < -kInsideTolerance) fail(Errc::OutsideElement, "reference point outside the simplex");
    return lam;
  }

  // prod_{j < b} (p*lam - j) / (j + 1)
  double factor(int b, double lam) const {
    double v = 1.0;
    for (int j = 0; j < b; ++j) v *= (order_ * lam - j) / (j + 1);
    return v;
  }

  double factor_derivative(int b, double lam) const {
    double sum = 0.0;
    for (int j = 0; j < b; ++j) {
      double v = static_cast<double>(order_) / (j + 1);
      for (int l = 0; l < b; ++l)
        if (l != j) v *= (order_ * lam - l) / (l + 1);
      sum += v;
    }
    return sum;
  }

  int dim_;
  int order_;
  std::vector<Eigen::VectorXd> nodes_;
  std::vector<std::vector<int>> bary_;
};

}  // namespace gfe
