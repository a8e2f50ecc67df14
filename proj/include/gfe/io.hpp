#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "gfe/grid.hpp"
#include "gfe/rotation.hpp"

namespace gfe {

namespace detail {

inline Eigen::Vector3d pad3(const Vector& v) {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(3, v.size()); ++k) out(k) = v(k);
  return out;
}

/// Point position: the embedded value on S^2, the domain point otherwise.
template <Manifold M>
Eigen::Vector3d vtk_position(const M& m, const ManifoldPoint& value, const Vector& x) {
  if (m.kind().tag == ManifoldTag::Sphere && m.embed_dim() == 3) return value.coords;
  return pad3(x);
}

/// Three-component picture of a manifold value: its first three coordinates,
/// or the rotation vector on SO(3).
template <Manifold M>
Eigen::Vector3d vtk_value(const M& m, const ManifoldPoint& value) {
  if (m.kind().tag == ManifoldTag::Rotation3) return so3::log(so3::as_matrix(value.coords), 0.0);
  return pad3(value.coords);
}

/// Three-component picture of a tangent vector: embedded on spheres and in
/// flat space, the body angular velocity vee(Q^T W) on SO(3).
template <Manifold M>
Eigen::Vector3d vtk_tangent(const M& m, const TangentVector& t) {
  if (m.kind().tag == ManifoldTag::Rotation3) {
    return so3::vee(so3::as_matrix(t.base.coords).transpose() * so3::as_matrix(t.vec));
  }
  return pad3(t.vec);
}

inline int vtk_cell_type(int dim, int order) {
  if (dim == 1) return order == 1 ? 3 : 21;  // VTK_LINE, VTK_QUADRATIC_EDGE
  return order == 1 ? 5 : 22;                // VTK_TRIANGLE, VTK_QUADRATIC_TRIANGLE
}

/// Local node order expected by VTK: vertices, then edge midpoints
/// (01), (12), (20).
inline std::vector<int> vtk_local_order(const ReferenceElement& ref) {
  std::vector<int> out;
  for (int k = 0; k <= ref.dim(); ++k) out.push_back(ref.vertex_node(k));
  if (ref.order() == 1) return out;
  const int pairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  const int npairs = ref.dim() == 1 ? 1 : 3;
  for (int p = 0; p < npairs; ++p)
    for (int l = 0; l < ref.size(); ++l) {
      const auto& b = ref.barycentric_index(l);
      if (b[static_cast<std::size_t>(pairs[p][0])] == 1 && b[static_cast<std::size_t>(pairs[p][1])] == 1) out.push_back(l);
    }
  return out;
}

}  // namespace detail

/// Legacy ASCII VTK unstructured grid over the Lagrange nodes, with the
/// value picture as point vectors "value" and, if given, the test field as
/// "test_field".
template <Manifold M>
void write_vtk(std::ostream& out, const GFEFunction<M>& u, const GlobalTestFunction<M>* eta = nullptr,
               const std::string& title = "gfe") {
  const Grid& g = u.grid();
  const M& m = u.manifold();
  out.precision(17);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << g.num_nodes() << " double\n";
  for (int i = 0; i < g.num_nodes(); ++i) {
    const Eigen::Vector3d p = detail::vtk_position(m, u.nodal_values()[static_cast<std::size_t>(i)], g.node(i));
    out << p(0) << ' ' << p(1) << ' ' << p(2) << '\n';
  }
  const std::vector<int> order = detail::vtk_local_order(g.reference_element());
  const int per = static_cast<int>(order.size());
  out << "CELLS " << g.num_elements() << ' ' << g.num_elements() * (per + 1) << '\n';
  for (int e = 0; e < g.num_elements(); ++e) {
    out << per;
    for (int l : order) out << ' ' << g.element_nodes(e)[static_cast<std::size_t>(l)];
    out << '\n';
  }
  out << "CELL_TYPES " << g.num_elements() << '\n';
  for (int e = 0; e < g.num_elements(); ++e) out << detail::vtk_cell_type(g.dim(), g.order()) << '\n';
  out << "POINT_DATA " << g.num_nodes() << "\nVECTORS value double\n";
  for (const auto& v : u.nodal_values()) {
    const Eigen::Vector3d p = detail::vtk_value(m, v);
    out << p(0) << ' ' << p(1) << ' ' << p(2) << '\n';
  }
  if (eta) {
    out << "VECTORS test_field double\n";
    for (const auto& t : eta->nodal_vectors()) {
      const Eigen::Vector3d p = detail::vtk_tangent(m, t);
      out << p(0) << ' ' << p(1) << ' ' << p(2) << '\n';
    }
  }
}

/// One CSV row per Lagrange node: node index, then the embedded value.
inline void write_nodes_csv(std::ostream& out, const std::vector<ManifoldPoint>& values) {
  out.precision(17);
  out << "node";
  if (!values.empty())
    for (Eigen::Index k = 0; k < values.front().coords.size(); ++k) out << ",v" << k;
  out << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << i;
    for (Eigen::Index k = 0; k < values[i].coords.size(); ++k) out << ',' << values[i].coords(k);
    out << '\n';
  }
}

template <Manifold M>
void write_nodes_csv(std::ostream& out, const GFEFunction<M>& u) {
  write_nodes_csv(out, u.nodal_values());
}

/// Reads rows "node_index, c_0, ..., c_{k-1}". Blank lines, '#' comments
/// and a leading header row are skipped; every row must have the same width.
inline std::map<int, Vector> read_nodes_csv(std::istream& in) {
  std::map<int, Vector> out;
  std::string s;
  int lineno = 0;
  Eigen::Index width = -1;
  bool first = true;
  while (std::getline(in, s)) {
    ++lineno;
    if (const auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
    if (s.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream row(s);
    for (std::string f; std::getline(row, f, ',');) fields.push_back(f);
    auto number = [&](const std::string& f, double& x) {
      std::size_t used = 0;
      try {
        x = std::stod(f, &used);
      } catch (const std::exception&) {
        return false;
      }
      return f.find_first_not_of(" \t\r", used) == std::string::npos;
    };
    double idx = 0.0;
    if (!number(fields[0], idx)) {
      if (first) {
        first = false;
        continue;
      }
      fail(Errc::Parse, "node file line " + std::to_string(lineno) + ": node index is not a number");
    }
    first = false;
    if (idx < 0 || idx != std::floor(idx)) fail(Errc::Parse, "node file line " + std::to_string(lineno) + ": invalid node index");
    Vector v(static_cast<Eigen::Index>(fields.size()) - 1);
    for (Eigen::Index k = 0; k < v.size(); ++k)
      if (!number(fields[static_cast<std::size_t>(k + 1)], v(k))) {
        fail(Errc::Parse, "node file line " + std::to_string(lineno) + ": coordinate " + std::to_string(k) + " is not a number");
      }
    if (v.size() == 0) fail(Errc::Parse, "node file line " + std::to_string(lineno) + ": no coordinates");
    if (width >= 0 && v.size() != width) fail(Errc::Parse, "node file line " + std::to_string(lineno) + ": inconsistent column count");
    width = v.size();
    if (!out.emplace(static_cast<int>(idx), std::move(v)).second) {
      fail(Errc::Parse, "node file line " + std::to_string(lineno) + ": duplicate node index");
    }
  }
  return out;
}

}  // namespace gfe
