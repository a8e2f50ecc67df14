#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gfe/jacobi.hpp"

namespace gfe {

/// Raw simplicial mesh: vertex coordinates and zero-based vertex tuples.
struct Mesh {
  int dim = 0;
  std::vector<Vector> vertices;
  std::vector<std::vector<int>> elements;
};

namespace detail {

/// Next non-empty line with '#' comments stripped.
inline bool next_line(std::istream& in, std::istringstream& line, int& lineno) {
  std::string s;
  while (std::getline(in, s)) {
    ++lineno;
    if (const auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
    if (s.find_first_not_of(" \t\r") == std::string::npos) continue;
    line.clear();
    line.str(s);
    return true;
  }
  return false;
}

[[noreturn]] inline void parse_fail(int lineno, const std::string& what) {
  fail(Errc::Parse, "mesh line " + std::to_string(lineno) + ": " + what);
}

}  // namespace detail

/// Reads the plain-text mesh format:
///   gfe-mesh <d>
///   <vertex count>
///   <d coordinates per line>
///   <element count>
///   <d + 1 vertex indices per line>
/// Text after '#' is ignored.
inline Mesh read_mesh(std::istream& in) {
  Mesh mesh;
  std::istringstream line;
  int lineno = 0;
  std::string magic;
  if (!detail::next_line(in, line, lineno) || !(line >> magic >> mesh.dim) || magic != "gfe-mesh") {
    detail::parse_fail(lineno, "expected header 'gfe-mesh <d>'");
  }
  if (mesh.dim < 1 || mesh.dim > 2) detail::parse_fail(lineno, "dimension must be 1 or 2");
  auto read_count = [&](const char* what) {
    long n = -1;
    if (!detail::next_line(in, line, lineno) || !(line >> n) || n < 0) detail::parse_fail(lineno, std::string("expected ") + what + " count");
    return static_cast<std::size_t>(n);
  };
  const std::size_t nv = read_count("vertex");
  for (std::size_t i = 0; i < nv; ++i) {
    if (!detail::next_line(in, line, lineno)) detail::parse_fail(lineno, "unexpected end of file in vertex list");
    Vector x(mesh.dim);
    for (int k = 0; k < mesh.dim; ++k)
      if (!(line >> x(k))) detail::parse_fail(lineno, "expected " + std::to_string(mesh.dim) + " coordinates");
    mesh.vertices.push_back(std::move(x));
  }
  const std::size_t ne = read_count("element");
  for (std::size_t i = 0; i < ne; ++i) {
    if (!detail::next_line(in, line, lineno)) detail::parse_fail(lineno, "unexpected end of file in element list");
    std::vector<int> e(static_cast<std::size_t>(mesh.dim + 1));
    for (auto& v : e)
      if (!(line >> v)) detail::parse_fail(lineno, "expected " + std::to_string(mesh.dim + 1) + " vertex indices");
    mesh.elements.push_back(std::move(e));
  }
  return mesh;
}

inline void write_mesh(std::ostream& out, const Mesh& mesh) {
  out.precision(17);
  out << "gfe-mesh " << mesh.dim << '\n' << mesh.vertices.size() << '\n';
  for (const auto& v : mesh.vertices) {
    for (Eigen::Index k = 0; k < v.size(); ++k) out << (k ? " " : "") << v(k);
    out << '\n';
  }
  out << mesh.elements.size() << '\n';
  for (const auto& e : mesh.elements) {
    for (std::size_t k = 0; k < e.size(); ++k) out << (k ? " " : "") << e[k];
    out << '\n';
  }
}

/// n equal intervals of [a, b].
inline Mesh interval_mesh(int n, double a = 0.0, double b = 1.0) {
  Mesh m;
  m.dim = 1;
  for (int i = 0; i <= n; ++i) m.vertices.push_back(Vector::Constant(1, a + (b - a) * i / n));
  for (int i = 0; i < n; ++i) m.elements.push_back({i, i + 1});
  return m;
}

/// nx x ny rectangles of [x0, x1] x [y0, y1], each cut into two triangles.
inline Mesh rectangle_mesh(int nx, int ny, double x0 = 0.0, double x1 = 1.0, double y0 = 0.0, double y1 = 1.0) {
  Mesh m;
  m.dim = 2;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      Vector x(2);
      x << x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny;
      m.vertices.push_back(x);
    }
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      m.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

/// Conforming simplicial grid in 1D or 2D with Lagrange nodes of order p.
///
/// Global node numbering: the vertices keep their indices, and at order 2
/// the edge midpoints follow in order of first appearance. Element vertex
/// tuples are reordered where needed so that every affine map has positive
/// determinant.
class Grid {
 public:
  static constexpr double kLocateTolerance = 1e-12;

  /// A face shared by two elements: its vertices and both neighbours.
  struct InteriorFace {
    std::vector<int> vertices;
    int elements[2];
  };

  Grid(const Mesh& mesh, int order) : dim_(mesh.dim), order_(order), ref_(mesh.dim, order) {
    if (dim_ < 1 || dim_ > 2) fail(Errc::InvalidArgument, "grid dimension must be 1 or 2");
    for (const auto& v : mesh.vertices)
      if (v.size() != dim_) fail(Errc::DimensionMismatch, "vertex coordinate count differs from grid dimension");
    if (mesh.elements.empty()) fail(Errc::InvalidArgument, "grid has no elements");
    vertices_ = mesh.vertices;
    nodes_ = vertices_;
    const int nv = static_cast<int>(vertices_.size());
    std::map<std::pair<int, int>, int> edge_node;
    std::map<std::vector<int>, std::vector<int>> face_elems;

    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
      std::vector<int> vs = mesh.elements[e];
      if (static_cast<int>(vs.size()) != dim_ + 1) fail(Errc::InvalidArgument, "element needs d + 1 vertices");
      for (int v : vs)
        if (v < 0 || v >= nv) fail(Errc::InvalidArgument, "element " + std::to_string(e) + " has vertex index out of range");
      double det = affine_matrix(vs).determinant();
      if (std::abs(det) <= 1e-14 * std::pow(scale(vs), dim_)) fail(Errc::InvalidArgument, "element " + std::to_string(e) + " is degenerate");
      if (det < 0) {
        std::swap(vs[static_cast<std::size_t>(dim_ - 1)], vs[static_cast<std::size_t>(dim_)]);
        det = -det;
      }
      const Matrix jac = affine_matrix(vs);
      elements_.push_back(vs);
      jacobians_.push_back(jac);
      inverse_jacobians_.push_back(jac.inverse());
      dets_.push_back(det);

      std::vector<int> local(static_cast<std::size_t>(ref_.size()));
      for (int l = 0; l < ref_.size(); ++l) {
        const auto& b = ref_.barycentric_index(l);
        std::vector<int> support;
        for (int k = 0; k <= dim_; ++k)
          if (b[static_cast<std::size_t>(k)] > 0) support.push_back(vs[static_cast<std::size_t>(k)]);
        if (support.size() == 1) {
          local[static_cast<std::size_t>(l)] = support[0];
          continue;
        }
        const std::pair<int, int> key = std::minmax(support[0], support[1]);
        auto [it, inserted] = edge_node.try_emplace(key, static_cast<int>(nodes_.size()));
        if (inserted) nodes_.push_back(0.5 * (vertices_[static_cast<std::size_t>(key.first)] + vertices_[static_cast<std::size_t>(key.second)]));
        local[static_cast<std::size_t>(l)] = it->second;
      }
      element_nodes_.push_back(std::move(local));

      for (int k = 0; k <= dim_; ++k) {
        std::vector<int> face;
        for (int l = 0; l <= dim_; ++l)
          if (l != k) face.push_back(vs[static_cast<std::size_t>(l)]);
        std::sort(face.begin(), face.end());
        face_elems[face].push_back(static_cast<int>(e));
      }
    }

    std::vector<bool> on_boundary(nodes_.size(), false);
    for (const auto& [face, elems] : face_elems) {
      if (elems.size() > 2) fail(Errc::InvalidArgument, "non-conforming grid: a face belongs to more than two elements");
      if (elems.size() == 2) {
        interior_faces_.push_back({face, {elems[0], elems[1]}});
        continue;
      }
      for (int v : face) on_boundary[static_cast<std::size_t>(v)] = true;
      if (face.size() == 2 && order_ == 2) on_boundary[static_cast<std::size_t>(edge_node.at({face[0], face[1]}))] = true;
    }
    for (std::size_t i = 0; i < on_boundary.size(); ++i)
      if (on_boundary[i]) boundary_nodes_.push_back(static_cast<int>(i));
  }

  int dim() const { return dim_; }
  int order() const { return order_; }
  const ReferenceElement& reference_element() const { return ref_; }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vector>& vertices() const { return vertices_; }
  const std::vector<Vector>& lagrange_nodes() const { return nodes_; }
  const Vector& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& element_vertices(int e) const { return elements_[static_cast<std::size_t>(e)]; }
  /// Global node index of each local Lagrange node of element e.
  const std::vector<int>& element_nodes(int e) const { return element_nodes_[static_cast<std::size_t>(e)]; }
  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  const std::vector<InteriorFace>& interior_faces() const { return interior_faces_; }

  /// d x d matrix of the affine map xi -> x0 + J xi.
  const Matrix& jacobian(int e) const { return jacobians_[static_cast<std::size_t>(e)]; }
  const Matrix& inverse_jacobian(int e) const { return inverse_jacobians_[static_cast<std::size_t>(e)]; }
  double determinant(int e) const { return dets_[static_cast<std::size_t>(e)]; }

  Vector to_global(int e, const Vector& xi) const {
    return vertices_[static_cast<std::size_t>(element_vertices(e)[0])] + jacobian(e) * xi;
  }
  Vector to_reference(int e, const Vector& x) const {
    if (x.size() != dim_) fail(Errc::DimensionMismatch, "domain point has wrong dimension");
    return inverse_jacobian(e) * (x - vertices_[static_cast<std::size_t>(element_vertices(e)[0])]);
  }

  /// First element containing x (barycentric tolerance 1e-12) and the
  /// reference coordinates of x in it.
  std::pair<int, Vector> locate(const Vector& x) const {
    for (int e = 0; e < num_elements(); ++e) {
      Vector xi = to_reference(e, x);
      if (ref_.contains(xi, kLocateTolerance)) return {e, std::move(xi)};
    }
    fail(Errc::PointOutsideDomain, "point lies outside every element");
  }

  Mesh mesh() const { return {dim_, vertices_, elements_}; }

 private:
  Matrix affine_matrix(const std::vector<int>& vs) const {
    Matrix j(dim_, dim_);
    for (int k = 0; k < dim_; ++k) {
      j.col(k) = vertices_[static_cast<std::size_t>(vs[static_cast<std::size_t>(k + 1)])] - vertices_[static_cast<std::size_t>(vs[0])];
    }
    return j;
  }

  double scale(const std::vector<int>& vs) const {
    double s = 0.0;
    for (int v : vs) s = std::max(s, (vertices_[static_cast<std::size_t>(v)] - vertices_[static_cast<std::size_t>(vs[0])]).norm());
    return s;
  }

  int dim_;
  int order_;
  ReferenceElement ref_;
  std::vector<Vector> vertices_;
  std::vector<Vector> nodes_;
  std::vector<std::vector<int>> elements_;
  std::vector<std::vector<int>> element_nodes_;
  std::vector<Matrix> jacobians_;
  std::vector<Matrix> inverse_jacobians_;
  std::vector<double> dets_;
  std::vector<int> boundary_nodes_;
  std::vector<InteriorFace> interior_faces_;
};

/// Global geometric finite element function: one manifold value per
/// Lagrange node, interpolated element by element.
template <Manifold M>
class GFEFunction {
 public:
  GFEFunction(Grid grid, Rule rule, M manifold, std::vector<ManifoldPoint> nodal_values)
      : grid_(std::move(grid)), rule_(rule), manifold_(std::move(manifold)), values_(std::move(nodal_values)) {
    if (static_cast<int>(values_.size()) != grid_.num_nodes()) {
      fail(Errc::DimensionMismatch, "one nodal value per Lagrange node required");
    }
    for (int e = 0; e < grid_.num_elements(); ++e) {
      std::vector<ManifoldPoint> local;
      for (int g : grid_.element_nodes(e)) local.push_back(values_[static_cast<std::size_t>(g)]);
      interps_.emplace_back(rule_, manifold_, grid_.reference_element(), std::move(local));
    }
  }

  const Grid& grid() const { return grid_; }
  Rule rule() const { return rule_; }
  int order() const { return grid_.order(); }
  const M& manifold() const { return manifold_; }
  const std::vector<ManifoldPoint>& nodal_values() const { return values_; }
  const Interpolant<M>& element_interpolant(int e) const { return interps_.at(static_cast<std::size_t>(e)); }

  /// Same grid and rule, other nodal values.
  GFEFunction with_values(std::vector<ManifoldPoint> values) const {
    return GFEFunction(grid_, rule_, manifold_, std::move(values));
  }

  ManifoldPoint evaluate(const Vector& x) const {
    const auto [e, xi] = grid_.locate(x);
    return element_interpolant(e).eval(xi);
  }

  /// Restriction to element e evaluated at x, which must lie in e.
  ManifoldPoint evaluate_in_element(int e, const Vector& x) const {
    return element_interpolant(e).eval(grid_.to_reference(e, x));
  }

  std::vector<ManifoldPoint> nodal_evaluate() const { return values_; }

 private:
  Grid grid_;
  Rule rule_;
  M manifold_;
  std::vector<ManifoldPoint> values_;
  std::vector<Interpolant<M>> interps_;
};

/// Continuous vector field along a GFE function, given by one tangent
/// vector per Lagrange node. Holds a reference to its base function, which
/// must outlive it.
template <Manifold M>
class GlobalTestFunction {
 public:
  GlobalTestFunction(const GFEFunction<M>& base, std::vector<TangentVector> nodal_vectors)
      : base_(&base), nodal_(std::move(nodal_vectors)) {
    const auto& vals = base.nodal_values();
    if (nodal_.size() != vals.size()) fail(Errc::DimensionMismatch, "one nodal vector per Lagrange node required");
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (nodal_[i].base.coords.size() != vals[i].coords.size() ||
          (nodal_[i].base.coords - vals[i].coords).norm() > ElementTestField<M>::kBaseTolerance) {
        fail(Errc::InvalidPoint, "nodal vector " + std::to_string(i) + " is not based at the nodal value");
      }
      coeffs_.push_back(base.manifold().tangent_frame(vals[i]).transpose() * nodal_[i].vec);
    }
  }

  /// From coordinates in tangent_basis(u_i) at each node.
  static GlobalTestFunction from_coefficients(const GFEFunction<M>& base, const std::vector<Vector>& coeffs) {
    std::vector<TangentVector> nodal;
    for (std::size_t i = 0; i < coeffs.size() && i < base.nodal_values().size(); ++i) {
      const auto& v = base.nodal_values()[i];
      nodal.push_back({v, base.manifold().tangent_frame(v) * coeffs[i]});
    }
    return GlobalTestFunction(base, std::move(nodal));
  }

  const GFEFunction<M>& base() const { return *base_; }
  const std::vector<TangentVector>& nodal_vectors() const { return nodal_; }
  const std::vector<Vector>& coefficients() const { return coeffs_; }

  ElementTestField<M> element_field(int e) const {
    std::vector<Vector> local;
    for (int g : base_->grid().element_nodes(e)) local.push_back(coeffs_[static_cast<std::size_t>(g)]);
    return ElementTestField<M>::from_coefficients(base_->element_interpolant(e), local);
  }

  TangentVector evaluate_in_element(int e, const Vector& x) const {
    return eval_field(element_field(e), base_->grid().to_reference(e, x));
  }

 private:
  const GFEFunction<M>* base_;
  std::vector<TangentVector> nodal_;
  std::vector<Vector> coeffs_;
};

template <Manifold M>
TangentVector evaluate_test(const GlobalTestFunction<M>& eta, const Vector& x) {
  const auto [e, xi] = eta.base().grid().locate(x);
  return eval_field(eta.element_field(e), xi);
}

/// n * dim functions, (i, j) equal to tangent_basis(u_i)[j] at node i and
/// zero at every other node, ordered node-major.
template <Manifold M>
std::vector<GlobalTestFunction<M>> global_nodal_basis(const GFEFunction<M>& u) {
  const int n = u.grid().num_nodes();
  const int dim = u.manifold().dim();
  std::vector<GlobalTestFunction<M>> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) {
      std::vector<Vector> c(static_cast<std::size_t>(n), Vector::Zero(dim));
      c[static_cast<std::size_t>(i)](j) = 1.0;
      out.push_back(GlobalTestFunction<M>::from_coefficients(u, c));
    }
  return out;
}

}  // namespace gfe
