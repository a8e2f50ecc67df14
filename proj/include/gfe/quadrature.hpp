#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

#include "gfe/error.hpp"

namespace gfe {

struct QuadratureRule {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> weights;
};

namespace detail {

/// Gauss-Legendre nodes and weights on [0, 1].
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
    w[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace detail

/// Collapsed (Duffy) tensor Gauss rule on the unit simplex, exact for
/// polynomials up to `degree`. All weights are positive and sum to 1/d!.
inline QuadratureRule simplex_quadrature(int dim, int degree = 4) {
  if (dim < 1 || dim > 3) fail(Errc::InvalidArgument, "quadrature dimension must be 1, 2 or 3");
  // The collapse Jacobian adds dim - 1 to the degree in the first direction.
  const int n = (degree + dim + 1) / 2;
  std::vector<double> x, w;
  detail::gauss_legendre(n, x, w);
  QuadratureRule rule;
  const auto un = static_cast<std::size_t>(n);
  if (dim == 1) {
    for (std::size_t i = 0; i < un; ++i) {
      rule.points.push_back(Eigen::VectorXd::Constant(1, x[i]));
      rule.weights.push_back(w[i]);
    }
  } else if (dim == 2) {
    for (std::size_t i = 0; i < un; ++i)
      for (std::size_t j = 0; j < un; ++j) {
        Eigen::VectorXd p(2);
        p << x[i], x[j] * (1.0 - x[i]);
        rule.points.push_back(p);
        rule.weights.push_back(w[i] * w[j] * (1.0 - x[i]));
      }
  } else {
    for (std::size_t i = 0; i < un; ++i)
      for (std::size_t j = 0; j < un; ++j)
        for (std::size_t k = 0; k < un; ++k) {
          Eigen::VectorXd p(3);
          p << x[i], x[j] * (1.0 - x[i]), x[k] * (1.0 - x[i]) * (1.0 - x[j]);
          rule.points.push_back(p);
          rule.weights.push_back(w[i] * w[j] * w[k] * (1.0 - x[i]) * (1.0 - x[i]) * (1.0 - x[j]));
        }
  }
  return rule;
}

}  // namespace gfe
