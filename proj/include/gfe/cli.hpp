#pragma once

#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>

#include "gfe/energy.hpp"
#include "gfe/euclidean.hpp"
#include "gfe/io.hpp"
#include "gfe/rotation.hpp"
#include "gfe/sphere.hpp"

namespace gfe::cli {

/// Process exit codes.
enum Exit : int {
  kOk = 0,
  kToleranceBreach = 1,
  kInterpolationFailure = 2,
  kLineSearchFailure = 3,
  kBadInput = 4,
};

struct RunConfig {
  std::string command;
  std::string manifold = "sphere2";
  std::string rule = "geodesic";
  int order = 1;
  std::string mesh_path;
  std::string bc_path;
  std::string out_path = "gfe_out";
  std::uint64_t seed = 42;
  double tol = 1e-9;
  int max_iter = 500;
  /// Test hook: perturbs the analytic d_dv before the audit compares it.
  bool corrupt_ddv = false;
  /// First descent step; not exposed as a flag.
  double initial_step = 1.0;
};

/// Audit tolerances: d_dv vs FD, variation property, equivalence audit.
inline constexpr double kAuditDdvTolerance = 1e-4;
inline constexpr double kAuditVariationTolerance = 1e-4;
inline constexpr double kAuditEquivalenceTolerance = 5e-4;
/// Nodal input farther than this from M is rejected; closer input is
/// projected onto M.
inline constexpr double kInputTolerance = 1e-6;

/// Samples used by the interpolate command: the lattice of step 1/10 on the
/// reference simplex.
inline std::vector<Vector> interpolation_samples(int dim) {
  std::vector<Vector> out;
  if (dim == 1) {
    for (int i = 0; i <= 10; ++i) out.push_back(Vector::Constant(1, i / 10.0));
  } else {
    for (int j = 0; j <= 10; ++j)
      for (int i = 0; i + j <= 10; ++i) out.push_back((Vector(2) << i / 10.0, j / 10.0).finished());
  }
  return out;
}

namespace detail {

inline Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidArgument, "cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

inline std::map<int, Vector> load_nodes(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidArgument, "cannot open node file '" + path + "'");
  return read_nodes_csv(in);
}

template <class F>
void write_file(const std::string& path, F&& f) {
  std::ofstream out(path);
  if (!out) fail(Errc::InvalidArgument, "cannot write '" + path + "'");
  f(out);
}

/// Nodal input checked against M and projected onto it.
template <Manifold M>
ManifoldPoint to_point(const M& m, const Vector& v, int node) {
  if (v.size() != m.embed_dim()) {
    fail(Errc::DimensionMismatch, "node " + std::to_string(node) + " has " + std::to_string(v.size()) +
                                      " coordinates, expected " + std::to_string(m.embed_dim()));
  }
  ManifoldPoint p;
  try {
    p = m.project_point(v);
  } catch (const Error&) {
    fail(Errc::InvalidPoint, "node " + std::to_string(node) + " is not a valid point");
  }
  if ((p.coords - v).norm() > kInputTolerance) fail(Errc::InvalidPoint, "node " + std::to_string(node) + " is not on the manifold");
  return p;
}

inline bool interpolation_error(Errc c) {
  return c == Errc::Admissibility || c == Errc::ProjectionUndefined || c == Errc::CutLocus || c == Errc::NonConvergence ||
         c == Errc::IndefiniteHessian || c == Errc::SingularSystem;
}

template <Manifold M>
int interpolate(const RunConfig& cfg, const M& m, std::ostream& out, std::ostream& err) {
  const Grid grid(load_mesh(cfg.mesh_path), cfg.order);
  const auto nodes = load_nodes(cfg.bc_path);
  std::vector<ManifoldPoint> values;
  for (int i = 0; i < grid.num_nodes(); ++i) {
    const auto it = nodes.find(i);
    if (it == nodes.end()) fail(Errc::InvalidArgument, "node file has no value for node " + std::to_string(i));
    values.push_back(to_point(m, it->second, i));
  }
  const GFEFunction<M> u(grid, parse_rule(cfg.rule), m, values);
  const auto samples = interpolation_samples(grid.dim());
  std::ostringstream csv;
  csv.precision(17);
  csv << "element,sample";
  for (int k = 0; k < grid.dim(); ++k) csv << ",xi" << k;
  for (int k = 0; k < m.embed_dim(); ++k) csv << ",v" << k;
  csv << '\n';
  for (int e = 0; e < grid.num_elements(); ++e) {
    for (std::size_t s = 0; s < samples.size(); ++s) {
      ManifoldPoint v;
      try {
        v = u.element_interpolant(e).eval(samples[s]);
      } catch (const Error& x) {
        if (!interpolation_error(x.code())) throw;
        err << "element " << e << ": " << x.what() << '\n';
        return kInterpolationFailure;
      }
      csv << e << ',' << s;
      for (Eigen::Index k = 0; k < samples[s].size(); ++k) csv << ',' << samples[s](k);
      for (Eigen::Index k = 0; k < v.coords.size(); ++k) csv << ',' << v.coords(k);
      csv << '\n';
    }
  }
  write_file(cfg.out_path + ".csv", [&](std::ostream& f) { f << csv.str(); });
  out << "wrote " << cfg.out_path << ".csv\n";
  return kOk;
}

/// Seeded nodal values within `radius` of a random point of M.
template <Manifold M>
std::vector<ManifoldPoint> random_values(const M& m, int n, std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> gauss;
  auto random_tangent = [&](const ManifoldPoint& p, double len) {
    Vector c(m.dim());
    for (auto& x : c) x = gauss(rng);
    return TangentVector{p, m.tangent_frame(p) * (len * c.normalized())};
  };
  ManifoldPoint center;
  if (m.kind().tag == ManifoldTag::Euclidean) {
    center.coords = Vector::Zero(m.embed_dim());
  } else if (m.kind().tag == ManifoldTag::Rotation3) {
    center.coords = so3::as_vector(so3::Matrix3::Identity());
  } else {
    center.coords = Vector::Unit(m.embed_dim(), m.embed_dim() - 1);
  }
  center = m.exp(random_tangent(center, 1.0));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<ManifoldPoint> out;
  for (int i = 0; i < n; ++i) out.push_back(m.exp(random_tangent(center, radius * unif(rng))));
  return out;
}

template <Manifold M>
Vector fd_value_along(const Interpolant<M>& in, const Vector& xi, const std::vector<TangentVector>& dir, double t) {
  const M& m = in.manifold();
  auto moved = [&](double s) {
    return Interpolant<M>(in.rule(), m, in.element(), gfe::detail::moved_values(m, dir, s)).eval(xi).coords;
  };
  return (moved(t) - moved(-t)) / (2 * t);
}

struct AuditTable {
  double ddv = 0.0;
  double variation = 0.0;
  double equivalence = 0.0;
};

template <Manifold M>
AuditTable audit_values(const RunConfig& cfg, const M& m) {
  const Mesh mesh = cfg.mesh_path.empty() ? rectangle_mesh(1, 1, -0.5, 0.5, -0.5, 0.5) : load_mesh(cfg.mesh_path);
  const Grid grid(mesh, cfg.order);
  std::mt19937_64 rng(cfg.seed);
  const GFEFunction<M> u(grid, parse_rule(cfg.rule), m, random_values(m, grid.num_nodes(), rng, 0.5));
  const int dim = m.dim();
  constexpr double h = 1e-5;
  AuditTable t;
  std::exponential_distribution<double> expo;
  std::normal_distribution<double> gauss;
  for (int e = 0; e < grid.num_elements(); ++e) {
    const Interpolant<M>& in = u.element_interpolant(e);
    const int nloc = grid.reference_element().size();
    for (int sample = 0; sample < 3; ++sample) {
      Vector lam(grid.dim() + 1);
      for (auto& x : lam) x = expo(rng);
      const Vector xi = (lam / lam.sum()).tail(grid.dim());
      const ManifoldPoint q = in.eval(xi);
      const Matrix frame_q = m.tangent_frame(q);
      std::vector<Matrix> ddv = in.d_dv_all(xi);
      if (cfg.corrupt_ddv) ddv[0](0, 0) += 0.05;
      for (int i = 0; i < nloc; ++i) {
        const ManifoldPoint& vi = in.values()[static_cast<std::size_t>(i)];
        const Matrix frame_v = m.tangent_frame(vi);
        Matrix fd(dim, dim);
        for (int j = 0; j < dim; ++j) {
          std::vector<TangentVector> dir;
          for (const auto& v : in.values()) dir.push_back({v, Vector::Zero(m.embed_dim())});
          dir[static_cast<std::size_t>(i)].vec = frame_v.col(j);
          fd.col(j) = frame_q.transpose() * fd_value_along(in, xi, dir, h);
        }
        const Matrix& got = ddv[static_cast<std::size_t>(i)];
        t.ddv = std::max(t.ddv, (got - fd).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff()));
      }
      std::vector<Vector> coeffs;
      std::vector<TangentVector> dir;
      for (const auto& v : in.values()) {
        Vector c(dim);
        for (auto& x : c) x = gauss(rng);
        coeffs.push_back(c);
        dir.push_back({v, m.tangent_frame(v) * c});
      }
      const Vector field = eval_field(ElementTestField<M>::from_coefficients(in, coeffs), xi).vec;
      const Vector fd = m.project_tangent(q, fd_value_along(in, xi, dir, h));
      t.variation = std::max(t.variation, (field - fd).norm() / std::max(1.0, field.norm()));
    }
  }
  t.equivalence = equivalence_audit(u, default_quadrature(grid), 20, cfg.seed);
  return t;
}

template <Manifold M>
int audit(const RunConfig& cfg, const M& m, std::ostream& out) {
  const AuditTable t = audit_values(cfg, m);
  const bool ok1 = t.ddv <= kAuditDdvTolerance, ok2 = t.variation <= kAuditVariationTolerance,
             ok3 = t.equivalence <= kAuditEquivalenceTolerance;
  out << std::left << std::setw(26) << "check" << std::setw(26) << "value" << std::setw(12) << "tolerance" << "status\n";
  auto row = [&](const char* name, double v, double tol, bool ok) {
    std::ostringstream val, tl;
    val << std::setprecision(6) << std::scientific << v;
    tl << std::setprecision(0) << std::scientific << tol;
    out << std::setw(26) << name << std::setw(26) << val.str() << std::setw(12) << tl.str() << (ok ? "PASS" : "FAIL") << '\n';
  };
  row("d_dv_vs_fd", t.ddv, kAuditDdvTolerance, ok1);
  row("variation_property", t.variation, kAuditVariationTolerance, ok2);
  row("equivalence_audit", t.equivalence, kAuditEquivalenceTolerance, ok3);
  return ok1 && ok2 && ok3 ? kOk : kToleranceBreach;
}

template <Manifold M>
int minimize_cmd(const RunConfig& cfg, const M& m, std::ostream& out, std::ostream& err) {
  const Grid grid(load_mesh(cfg.mesh_path), cfg.order);
  std::map<int, ManifoldPoint> fixed;
  for (const auto& [i, v] : load_nodes(cfg.bc_path)) {
    if (i >= grid.num_nodes()) fail(Errc::InvalidArgument, "boundary node " + std::to_string(i) + " does not exist");
    fixed[i] = to_point(m, v, i);
  }
  std::set<int> fixed_set;
  for (const auto& kv : fixed) fixed_set.insert(kv.first);
  const GFEFunction<M> u0(grid, parse_rule(cfg.rule), m, harmonic_initial_guess(grid, m, fixed));
  MinimizeOptions opts;
  opts.tol = cfg.tol;
  opts.max_iter = cfg.max_iter;
  opts.initial_step = cfg.initial_step;
  std::optional<std::pair<GFEFunction<M>, EnergyReport>> result;
  try {
    result.emplace(minimize(u0, fixed_set, default_quadrature(grid), opts));
  } catch (const Error& x) {
    if (x.code() != Errc::LineSearchFailure) throw;
    err << x.what() << '\n';
    return kLineSearchFailure;
  }
  const auto& [u, rep] = *result;
  write_file(cfg.out_path + ".csv", [&](std::ostream& f) { write_nodes_csv(f, u); });
  write_file(cfg.out_path + "_u.vtk", [&](std::ostream& f) { write_vtk<M>(f, u, nullptr, "gfe minimizer"); });
  // Test field: nodal basis function (i, 0) at the free node nearest the
  // centroid of the domain.
  Vector centroid = Vector::Zero(grid.dim());
  for (const auto& x : grid.vertices()) centroid += x / static_cast<double>(grid.vertices().size());
  int chosen = -1;
  for (int i = 0; i < grid.num_nodes(); ++i) {
    if (fixed.count(i)) continue;
    if (chosen < 0 || (grid.node(i) - centroid).norm() < (grid.node(chosen) - centroid).norm()) chosen = i;
  }
  std::vector<Vector> coeffs(static_cast<std::size_t>(grid.num_nodes()), Vector::Zero(m.dim()));
  if (chosen >= 0) coeffs[static_cast<std::size_t>(chosen)](0) = 1.0;
  const auto eta = GlobalTestFunction<M>::from_coefficients(u, coeffs);
  write_file(cfg.out_path + "_field.vtk", [&](std::ostream& f) { write_vtk(f, u, &eta, "gfe nodal basis field"); });
  out.precision(17);
  out << "value=" << rep.value << "\ngradient_norm=" << rep.gradient_norm << "\niterations=" << rep.iterations
      << "\nconverged=" << (rep.converged ? "true" : "false") << '\n';
  return kOk;
}

/// Euclidean dimension from the node file width (1 without a node file).
inline int euclidean_dim(const RunConfig& cfg) {
  if (cfg.bc_path.empty()) return 1;
  const auto nodes = load_nodes(cfg.bc_path);
  return nodes.empty() ? 1 : static_cast<int>(nodes.begin()->second.size());
}

template <class F>
int with_manifold(const RunConfig& cfg, F&& f) {
  if (cfg.manifold == "sphere2") return f(Sphere(2));
  if (cfg.manifold == "so3") return f(Rotation3());
  if (cfg.manifold == "euclidean") return f(EuclideanSpace(euclidean_dim(cfg)));
  fail(Errc::InvalidArgument, "unknown manifold '" + cfg.manifold + "'");
}

}  // namespace detail

inline int cmd_interpolate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::with_manifold(cfg, [&](const auto& m) { return detail::interpolate(cfg, m, out, err); });
}

inline int cmd_audit(const RunConfig& cfg, std::ostream& out) {
  return detail::with_manifold(cfg, [&](const auto& m) { return detail::audit(cfg, m, out); });
}

inline int cmd_minimize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::with_manifold(cfg, [&](const auto& m) { return detail::minimize_cmd(cfg, m, out, err); });
}

/// Validates cfg and runs its command. Input errors are reported on `err`
/// with exit code 4.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.order != 1 && cfg.order != 2) fail(Errc::InvalidArgument, "--order must be 1 or 2");
    if (!(cfg.tol > 0.0)) fail(Errc::InvalidArgument, "--tol must be positive");
    if (cfg.max_iter < 0) fail(Errc::InvalidArgument, "--max-iter must be non-negative");
    parse_rule(cfg.rule);
    if (cfg.command == "audit") return cmd_audit(cfg, out);
    if (cfg.command != "interpolate" && cfg.command != "minimize") {
      fail(Errc::InvalidArgument, "unknown command '" + cfg.command + "'");
    }
    if (cfg.mesh_path.empty() || cfg.bc_path.empty()) fail(Errc::InvalidArgument, "--mesh and --bc are required");
    return cfg.command == "interpolate" ? cmd_interpolate(cfg, out, err) : cmd_minimize(cfg, out, err);
  } catch (const Error& x) {
    err << "error: " << x.what() << '\n';
    return kBadInput;
  }
}

}  // namespace gfe::cli
