#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "gfe/grid.hpp"
#include "gfe/quadrature.hpp"

namespace gfe {

struct EnergyReport {
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct MinimizeOptions {
  int max_iter = 500;
  double tol = 1e-9;
  double initial_step = 1.0;
};

/// Armijo constant and backtracking factor for minimize.
inline constexpr double kArmijoC = 1e-4;
inline constexpr double kBacktrack = 0.5;
inline constexpr double kMinStep = 1e-14;
/// FD step of the nodal curves in equivalence_audit.
inline constexpr double kAuditStep = 1e-5;

namespace detail {

/// Worker count from GFE_THREADS (0 or unset = hardware concurrency).
inline int thread_count(int work) {
  int n = 0;
  if (const char* env = std::getenv("GFE_THREADS")) n = std::atoi(env);
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, std::min(n, work));
}

/// Runs f(e) for every element, possibly on several threads, and returns
/// the results in element order. The first failure by element index is
/// rethrown.
template <class T, class F>
std::vector<T> map_elements(int count, F&& f) {
  std::vector<T> out(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  auto run = [&](int begin, int stride) {
    for (int e = begin; e < count; e += stride) {
      try {
        out[static_cast<std::size_t>(e)] = f(e);
      } catch (...) {
        errors[static_cast<std::size_t>(e)] = std::current_exception();
      }
    }
  };
  const int workers = thread_count(count);
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
  return out;
}

/// Physical gradient (embed_dim x d) of u at reference point xi of element e.
template <Manifold M>
Matrix physical_gradient(const GFEFunction<M>& u, int e, const Vector& xi) {
  const auto cols = u.element_interpolant(e).d_dxi(xi);
  Matrix g(u.manifold().embed_dim(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) g.col(static_cast<Eigen::Index>(k)) = cols[k].vec;
  return g * u.grid().inverse_jacobian(e);
}

}  // namespace detail

inline QuadratureRule default_quadrature(const Grid& g) { return simplex_quadrature(g.dim(), 4); }

/// 1/2 int |grad(iota o u)|^2 by quadrature on each element.
template <Manifold M>
double dirichlet_energy(const GFEFunction<M>& u, const QuadratureRule& quad) {
  const Grid& g = u.grid();
  const auto parts = detail::map_elements<double>(g.num_elements(), [&](int e) {
    double sum = 0.0;
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      sum += quad.weights[q] * detail::physical_gradient(u, e, quad.points[q]).squaredNorm();
    }
    return 0.5 * g.determinant(e) * sum;
  });
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

template <Manifold M>
double dirichlet_energy(const GFEFunction<M>& u) {
  return dirichlet_energy(u, default_quadrature(u.grid()));
}

/// J(a) - J(b) for two functions on the same grid, accumulated pointwise as
/// (grad a - grad b) : (grad a + grad b) / 2 so that nearby arguments do not
/// cancel in the totals.
template <Manifold M>
double energy_difference(const GFEFunction<M>& a, const GFEFunction<M>& b, const QuadratureRule& quad) {
  const Grid& g = a.grid();
  const auto parts = detail::map_elements<double>(g.num_elements(), [&](int e) {
    double sum = 0.0;
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      const Matrix ga = detail::physical_gradient(a, e, quad.points[q]);
      const Matrix gb = detail::physical_gradient(b, e, quad.points[q]);
      sum += quad.weights[q] * (ga - gb).cwiseProduct(ga + gb).sum();
    }
    return 0.5 * g.determinant(e) * sum;
  });
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

/// First variation int <grad u, grad eta> for a test field eta along u.
template <Manifold M>
double directional_derivative(const GFEFunction<M>& u, const GlobalTestFunction<M>& eta, const QuadratureRule& quad) {
  const Grid& g = u.grid();
  const auto parts = detail::map_elements<double>(g.num_elements(), [&](int e) {
    const ElementTestField<M> field = eta.element_field(e);
    double sum = 0.0;
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      const Matrix gu = detail::physical_gradient(u, e, quad.points[q]);
      const auto cols = eval_field_gradient(field, quad.points[q]);
      Matrix ge(gu.rows(), gu.cols());
      for (std::size_t k = 0; k < cols.size(); ++k) ge.col(static_cast<Eigen::Index>(k)) = cols[k].vec;
      sum += quad.weights[q] * (gu.cwiseProduct(ge * g.inverse_jacobian(e))).sum();
    }
    return g.determinant(e) * sum;
  });
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

/// Riesz representative of the first variation in the product metric:
/// component (i, j) is the directional derivative along the nodal basis
/// field Phi_ij. Entries at `fixed` nodes are zero.
template <Manifold M>
std::vector<TangentVector> algebraic_gradient(const GFEFunction<M>& u, const QuadratureRule& quad,
                                              const std::set<int>& fixed) {
  const Grid& g = u.grid();
  const int dim = u.manifold().dim();
  // Per element: local nodes x dim coefficients.
  const auto parts = detail::map_elements<Matrix>(g.num_elements(), [&](int e) {
    const auto& interp = u.element_interpolant(e);
    const int m = g.reference_element().size();
    Matrix c = Matrix::Zero(m, dim);
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      const Matrix gu = detail::physical_gradient(u, e, quad.points[q]);
      const FieldOperator op = field_gradient_operator(interp, quad.points[q]);
      // Reference-direction pairing <grad u J^-1, d_k eta J^-1> = <grad u J^-1 J^-T, d_k eta>.
      const Matrix w = gu * g.inverse_jacobian(e).transpose();
      for (int l = 0; l < m; ++l)
        for (int k = 0; k < g.dim(); ++k) {
          c.row(l) += quad.weights[q] * (w.col(k).transpose() * op.gradient[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]);
        }
    }
    return Matrix(g.determinant(e) * c);
  });
  std::vector<Vector> coeffs(static_cast<std::size_t>(g.num_nodes()), Vector::Zero(dim));
  for (int e = 0; e < g.num_elements(); ++e) {
    const auto& nodes = g.element_nodes(e);
    for (std::size_t l = 0; l < nodes.size(); ++l) {
      coeffs[static_cast<std::size_t>(nodes[l])] += parts[static_cast<std::size_t>(e)].row(static_cast<Eigen::Index>(l)).transpose();
    }
  }
  std::vector<TangentVector> out;
  for (int i = 0; i < g.num_nodes(); ++i) {
    const auto& v = u.nodal_values()[static_cast<std::size_t>(i)];
    if (fixed.count(i)) {
      out.push_back({v, Vector::Zero(u.manifold().embed_dim())});
    } else {
      out.push_back({v, u.manifold().tangent_frame(v) * coeffs[static_cast<std::size_t>(i)]});
    }
  }
  return out;
}

template <Manifold M>
std::vector<TangentVector> algebraic_gradient(const GFEFunction<M>& u, const QuadratureRule& quad) {
  const auto& b = u.grid().boundary_nodes();
  return algebraic_gradient(u, quad, std::set<int>(b.begin(), b.end()));
}

namespace detail {

inline double product_norm(const std::vector<TangentVector>& v) {
  double s = 0.0;
  for (const auto& t : v) s += t.vec.squaredNorm();
  return std::sqrt(s);
}

/// Nodal values moved along t -> exp_{v_i}(t b_i).
template <Manifold M>
std::vector<ManifoldPoint> moved_values(const M& m, const std::vector<TangentVector>& dir, double t) {
  std::vector<ManifoldPoint> out;
  out.reserve(dir.size());
  for (const auto& b : dir) out.push_back(m.exp({b.base, t * b.vec}));
  return out;
}

}  // namespace detail

/// Riemannian gradient descent on M^n with Armijo backtracking. Each line
/// search starts from a Barzilai-Borwein step estimate (initial_step on the
/// first iteration). A trial point whose energy cannot be evaluated counts
/// as infinitely expensive. Nodes in `fixed` never move.
template <Manifold M>
std::pair<GFEFunction<M>, EnergyReport> minimize(const GFEFunction<M>& u0, const std::set<int>& fixed,
                                                 const QuadratureRule& quad, const MinimizeOptions& opts = {},
                                                 std::vector<double>* history = nullptr) {
  const M& m = u0.manifold();
  GFEFunction<M> u = u0;
  EnergyReport rep;
  rep.value = dirichlet_energy(u, quad);
  if (history) history->push_back(rep.value);
  std::vector<TangentVector> grad = algebraic_gradient(u, quad, fixed);
  rep.gradient_norm = detail::product_norm(grad);
  double step = opts.initial_step;
  while (rep.gradient_norm > opts.tol && rep.iterations < opts.max_iter) {
    const double g2 = rep.gradient_norm * rep.gradient_norm;
    // Energies are only known to a few ulps; without this slack Armijo
    // rejects every step once alpha |g|^2 drops below the roundoff.
    const double slack = 10.0 * std::numeric_limits<double>::epsilon() * std::abs(rep.value);
    std::vector<TangentVector> descent;
    for (const auto& t : grad) descent.push_back({t.base, -t.vec});
    double alpha = step;
    bool accepted = false;
    std::string last_error;
    while (alpha >= kMinStep) {
      try {
        GFEFunction<M> trial = u.with_values(detail::moved_values(m, descent, alpha));
        const double e = dirichlet_energy(trial, quad);
        if (e <= rep.value - kArmijoC * alpha * g2 + slack) {
          u = std::move(trial);
          rep.value = e;
          accepted = true;
          break;
        }
      } catch (const Error& err) {
        last_error = err.what();
      }
      alpha *= kBacktrack;
    }
    if (!accepted) {
      std::string msg = "step size fell below 1e-14 at iteration " + std::to_string(rep.iterations + 1);
      if (!last_error.empty()) msg += " (last trial failed: " + last_error + ")";
      fail(Errc::LineSearchFailure, msg);
    }
    ++rep.iterations;
    if (history) history->push_back(rep.value);
    std::vector<TangentVector> next = algebraic_gradient(u, quad, fixed);
    // Barzilai-Borwein: s = -alpha g_old, y = g_new - g_old, compared in
    // the embedding.
    double ss = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const Vector s = -alpha * grad[i].vec;
      ss += s.squaredNorm();
      sy += s.dot(next[i].vec - grad[i].vec);
    }
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : std::min(2.0 * alpha, 1e10);
    grad = std::move(next);
    rep.gradient_norm = detail::product_norm(grad);
  }
  rep.converged = rep.gradient_norm <= opts.tol;
  return {std::move(u), rep};
}

/// Per-direction record of the equivalence audit.
struct AuditTrial {
  double fd = 0.0;        // path A: FD of the energy along nodal exp curves
  double analytic = 0.0;  // path B: directional derivative along T(eta)
  double discrepancy = 0.0;
};

struct AuditResult {
  std::vector<AuditTrial> trials;
  double max_discrepancy = 0.0;
};

/// Relative difference, or absolute below 1e-8 magnitude.
inline double audit_discrepancy(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale < 1e-8 ? std::abs(a - b) : std::abs(a - b) / scale;
}

/// Random unit nodal directions (normalized over the whole product),
/// seeded with mt19937_64.
template <Manifold M>
std::vector<std::vector<Vector>> audit_directions(const GFEFunction<M>& u, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const int dim = u.manifold().dim();
  std::vector<std::vector<Vector>> out;
  for (int t = 0; t < trials; ++t) {
    std::vector<Vector> c(static_cast<std::size_t>(u.grid().num_nodes()), Vector(dim));
    double norm2 = 0.0;
    for (auto& v : c) {
      for (auto& x : v) x = gauss(rng);
      norm2 += v.squaredNorm();
    }
    for (auto& v : c) v /= std::sqrt(norm2);
    out.push_back(std::move(c));
  }
  return out;
}

/// Compares the two routes to dJ for random directions: (A) the central
/// difference of J along the nodal curves exp_{v_i}(t eta_i), t = 1e-5;
/// (B) the directional derivative along the test field T(eta).
template <Manifold M>
AuditResult equivalence_audit_detail(const GFEFunction<M>& u, const QuadratureRule& quad, int trials, std::uint64_t seed) {
  AuditResult res;
  for (const auto& c : audit_directions(u, trials, seed)) {
    const auto eta = GlobalTestFunction<M>::from_coefficients(u, c);
    AuditTrial t;
    const auto up = u.with_values(detail::moved_values(u.manifold(), eta.nodal_vectors(), kAuditStep));
    const auto um = u.with_values(detail::moved_values(u.manifold(), eta.nodal_vectors(), -kAuditStep));
    t.fd = energy_difference(up, um, quad) / (2 * kAuditStep);
    t.analytic = directional_derivative(u, eta, quad);
    t.discrepancy = audit_discrepancy(t.fd, t.analytic);
    res.max_discrepancy = std::max(res.max_discrepancy, t.discrepancy);
    res.trials.push_back(t);
  }
  return res;
}

template <Manifold M>
double equivalence_audit(const GFEFunction<M>& u, const QuadratureRule& quad, int trials, std::uint64_t seed) {
  return equivalence_audit_detail(u, quad, trials, seed).max_discrepancy;
}

/// Flat P_p stiffness matrix of the grid, assembled with the given rule.
inline Matrix stiffness_matrix(const Grid& g, const QuadratureRule& quad) {
  Matrix a = Matrix::Zero(g.num_nodes(), g.num_nodes());
  const ReferenceElement& ref = g.reference_element();
  for (int e = 0; e < g.num_elements(); ++e) {
    const auto& nodes = g.element_nodes(e);
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      const Matrix grads = ref.shape_gradients(quad.points[q]) * g.inverse_jacobian(e);
      const Matrix local = quad.weights[q] * g.determinant(e) * grads * grads.transpose();
      for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = 0; j < nodes.size(); ++j) {
          a(nodes[i], nodes[j]) += local(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
  }
  return a;
}

/// Initial guess for minimize: the flat discrete harmonic extension of the
/// fixed nodal values, computed per embedding coordinate, projected onto M.
template <Manifold M>
std::vector<ManifoldPoint> harmonic_initial_guess(const Grid& g, const M& m, const std::map<int, ManifoldPoint>& fixed) {
  const int n = g.num_nodes();
  if (fixed.empty()) fail(Errc::InvalidArgument, "at least one fixed node is required");
  std::vector<int> free;
  for (int i = 0; i < n; ++i)
    if (!fixed.count(i)) free.push_back(i);
  const Matrix a = stiffness_matrix(g, default_quadrature(g));
  Matrix x = Matrix::Zero(n, m.embed_dim());
  for (const auto& [i, v] : fixed) x.row(i) = v.coords.transpose();
  if (!free.empty()) {
    const auto nf = static_cast<Eigen::Index>(free.size());
    Matrix aff(nf, nf), rhs = Matrix::Zero(nf, m.embed_dim());
    for (Eigen::Index r = 0; r < nf; ++r) {
      for (Eigen::Index c = 0; c < nf; ++c) aff(r, c) = a(free[r], free[c]);
      for (const auto& [j, v] : fixed) rhs.row(r) -= a(free[r], j) * v.coords.transpose();
    }
    const Matrix sol = aff.ldlt().solve(rhs);
    for (Eigen::Index r = 0; r < nf; ++r) x.row(free[r]) = sol.row(r);
  }
  std::vector<ManifoldPoint> out;
  for (int i = 0; i < n; ++i) {
    if (const auto it = fixed.find(i); it != fixed.end()) {
      out.push_back(it->second);
      continue;
    }
    try {
      out.push_back(m.project_point(x.row(i).transpose()));
    } catch (const Error& err) {
      if (err.code() != Errc::ProjectionUndefined) throw;
      fail(Errc::ProjectionUndefined, "harmonic extension vanishes at node " + std::to_string(i));
    }
  }
  return out;
}

}  // namespace gfe
