#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "gfe/euclidean.hpp"
#include "gfe/grid.hpp"
#include "gfe/io.hpp"
#include "gfe/sphere.hpp"
#include "oracles.hpp"

using namespace gfe;

namespace {

/// Smooth sphere-valued map used as nodal data.
Vector smooth_sphere_map(const Vector& x) {
  Vector v(3);
  v << std::sin(x(0)), x.size() > 1 ? 0.8 * x(x.size() - 1) : 0.3, 1.2;
  return v.normalized();
}

GFEFunction<Sphere> sphere_function(const Grid& g, Rule rule) {
  std::vector<ManifoldPoint> vals;
  for (const auto& x : g.lagrange_nodes()) vals.push_back({smooth_sphere_map(x)});
  return GFEFunction<Sphere>(g, rule, Sphere(2), vals);
}

std::vector<Vector> random_coefficients(std::mt19937_64& rng, int n, int dim) {
  std::normal_distribution<double> gauss;
  std::vector<Vector> c;
  for (int i = 0; i < n; ++i) {
    Vector v(dim);
    for (auto& x : v) x = gauss(rng);
    c.push_back(v);
  }
  return c;
}

Vector point_on_face(std::mt19937_64& rng, const Grid& g, const Grid::InteriorFace& f) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (f.vertices.size() == 1) return g.vertices()[static_cast<std::size_t>(f.vertices[0])];
  const double t = u(rng);
  return (1 - t) * g.vertices()[static_cast<std::size_t>(f.vertices[0])] + t * g.vertices()[static_cast<std::size_t>(f.vertices[1])];
}

/// Classical piecewise quadratic interpolation on [a, a + h] through
/// (a, y0), (a + h/2, y1), (a + h, y2).
double quadratic_lagrange(double a, double h, double y0, double y1, double y2, double x) {
  const double t = (x - a) / h;
  return y0 * 2 * (t - 0.5) * (t - 1) - y1 * 4 * t * (t - 1) + y2 * 2 * t * (t - 0.5);
}

}  // namespace

TEST(Mesh, ReadWriteRoundTrip) {
  const Mesh m = rectangle_mesh(2, 2);
  std::stringstream s;
  write_mesh(s, m);
  const Mesh r = read_mesh(s);
  EXPECT_EQ(r.dim, 2);
  ASSERT_EQ(r.vertices.size(), m.vertices.size());
  for (std::size_t i = 0; i < m.vertices.size(); ++i) EXPECT_EQ(r.vertices[i], m.vertices[i]);
  EXPECT_EQ(r.elements, m.elements);
}

TEST(Mesh, CommentsAndErrors) {
  std::istringstream ok("# a line\ngfe-mesh 1 # header\n3\n0\n0.5\n1\n\n2\n0 1\n1 2 # last\n");
  const Mesh m = read_mesh(ok);
  EXPECT_EQ(m.vertices.size(), 3u);
  EXPECT_EQ(m.elements.size(), 2u);
  for (const char* bad : {"mesh 1\n", "gfe-mesh 3\n", "gfe-mesh 1\n2\n0\n", "gfe-mesh 1\n2\n0\n1\n1\n0\n",
                          "gfe-mesh 2\n1\n0 x\n"}) {
    std::istringstream in(bad);
    try {
      read_mesh(in);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::Parse);
    }
  }
}

TEST(Grid, NodeCountsAndBoundary) {
  Grid g1(interval_mesh(4), 1), g2(interval_mesh(4), 2);
  EXPECT_EQ(g1.num_nodes(), 5);
  EXPECT_EQ(g2.num_nodes(), 9);
  EXPECT_EQ(g1.boundary_nodes(), (std::vector<int>{0, 4}));
  EXPECT_EQ(g2.boundary_nodes(), (std::vector<int>{0, 4}));
  Grid t1(rectangle_mesh(2, 2), 1), t2(rectangle_mesh(2, 2), 2);
  EXPECT_EQ(t1.num_elements(), 8);
  EXPECT_EQ(t1.num_nodes(), 9);
  EXPECT_EQ(t2.num_nodes(), 25);
  EXPECT_EQ(t1.boundary_nodes().size(), 8u);
  EXPECT_EQ(t2.boundary_nodes().size(), 16u);
  for (int b : t2.boundary_nodes()) {
    const Vector& x = t2.node(b);
    EXPECT_TRUE(x(0) == 0 || x(0) == 1 || x(1) == 0 || x(1) == 1);
  }
  EXPECT_EQ(t1.interior_faces().size(), 8u);
}

TEST(Grid, OrientationAndLocalToGlobal) {
  Mesh m = rectangle_mesh(2, 2);
  std::swap(m.elements[3][1], m.elements[3][2]);  // clockwise
  Mesh line = interval_mesh(3);
  std::swap(line.elements[1][0], line.elements[1][1]);
  for (const Mesh& mesh : {m, line})
    for (int p = 1; p <= 2; ++p) {
      Grid g(mesh, p);
      for (int e = 0; e < g.num_elements(); ++e) {
        EXPECT_GT(g.determinant(e), 0.0);
        for (int l = 0; l < g.reference_element().size(); ++l) {
          const Vector x = g.to_global(e, g.reference_element().node(l));
          EXPECT_LT((x - g.node(g.element_nodes(e)[static_cast<std::size_t>(l)])).norm(), 1e-12);
        }
      }
    }
}

TEST(Grid, DegenerateAndNonConforming) {
  Mesh flat;
  flat.dim = 2;
  for (double x : {0.0, 1.0, 2.0}) flat.vertices.push_back(Vector::Constant(2, x));
  flat.elements = {{0, 1, 2}};
  EXPECT_THROW(Grid(flat, 1), Error);
  Mesh fan = rectangle_mesh(1, 1);
  fan.vertices.push_back((Vector(2) << 0.5, -1.0).finished());
  fan.vertices.push_back((Vector(2) << 1.5, 0.5).finished());
  fan.elements.push_back({0, 5, 3});  // third element on the diagonal face
  EXPECT_THROW(Grid(fan, 1), Error);
}

TEST(Grid, PointLocation) {
  Grid g(rectangle_mesh(2, 2), 1);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    Vector x(2);
    x << u(rng), u(rng);
    const auto [e, xi] = g.locate(x);
    EXPECT_LT((g.to_global(e, xi) - x).norm(), 1e-14);
  }
  try {
    g.locate((Vector(2) << 1.5, 0.5).finished());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PointOutsideDomain);
  }
}

TEST(GFEFunction, ConstantAndNodalConsistency) {
  for (Rule rule : {Rule::Geodesic, Rule::Projection})
    for (int p = 1; p <= 2; ++p) {
      Grid g(rectangle_mesh(2, 2), p);
      const Vector v = Vector::Unit(3, 2);
      GFEFunction<Sphere> c(g, rule, Sphere(2), std::vector<ManifoldPoint>(static_cast<std::size_t>(g.num_nodes()), {v}));
      EXPECT_LT((c.evaluate((Vector(2) << 0.3, 0.7).finished()).coords - v).norm(), 1e-15);
      const auto u = sphere_function(g, rule);
      for (int i = 0; i < g.num_nodes(); ++i) {
        EXPECT_LT((u.evaluate(g.node(i)).coords - u.nodal_values()[static_cast<std::size_t>(i)].coords).norm(), 1e-12);
      }
      const auto ev = u.nodal_evaluate();
      for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_EQ(ev[i].coords, u.nodal_values()[i].coords);
    }
}

TEST(GFEFunction, FlatEqualsClassicalInterpolation) {
  Grid g(interval_mesh(2), 2);
  std::vector<ManifoldPoint> vals;
  std::vector<double> y;
  for (int i = 0; i < g.num_nodes(); ++i) {
    y.push_back(std::cos(3.0 * g.node(i)(0)));
    vals.push_back({Vector::Constant(1, y.back())});
  }
  // Node values by position: element [0, 1/2] has vertices 0, 1 and midpoint 3.
  auto at = [&](double x) {
    for (int i = 0; i < g.num_nodes(); ++i)
      if (std::abs(g.node(i)(0) - x) < 1e-15) return y[static_cast<std::size_t>(i)];
    return std::nan("");
  };
  for (Rule rule : {Rule::Geodesic, Rule::Projection}) {
    GFEFunction<EuclideanSpace> u(g, rule, EuclideanSpace(1), vals);
    for (int s = 0; s < 20; ++s) {
      const double x = (s + 0.5) / 20;
      const double want = x <= 0.5 ? quadratic_lagrange(0.0, 0.5, at(0), at(0.25), at(0.5), x)
                                   : quadratic_lagrange(0.5, 0.5, at(0.5), at(0.75), at(1.0), x);
      EXPECT_NEAR(u.evaluate(Vector::Constant(1, x)).coords(0), want, 1e-13);
    }
  }
}

TEST(GFEFunction, ContinuityAcrossFaces) {
  std::mt19937_64 rng(5);
  for (Rule rule : {Rule::Geodesic, Rule::Projection})
    for (int p = 1; p <= 2; ++p) {
      Grid g(rectangle_mesh(2, 2, -0.8, 0.8, -0.8, 0.8), p);
      const auto u = sphere_function(g, rule);
      const auto eta = GlobalTestFunction<Sphere>::from_coefficients(u, random_coefficients(rng, g.num_nodes(), 2));
      double worst_u = 0.0, worst_eta = 0.0;
      for (int k = 0; k < 100; ++k) {
        const auto& f = g.interior_faces()[static_cast<std::size_t>(k) % g.interior_faces().size()];
        const Vector x = point_on_face(rng, g, f);
        worst_u = std::max(worst_u, (u.evaluate_in_element(f.elements[0], x).coords - u.evaluate_in_element(f.elements[1], x).coords).norm());
        worst_eta = std::max(worst_eta, (eta.evaluate_in_element(f.elements[0], x).vec - eta.evaluate_in_element(f.elements[1], x).vec).norm());
      }
      EXPECT_LE(worst_u, 1e-10);
      EXPECT_LE(worst_eta, 1e-10);
    }
}

TEST(GFEFunction, FaceLocality) {
  // Moving a node off a face leaves values on that face unchanged.
  std::mt19937_64 rng(5);
  for (Rule rule : {Rule::Geodesic, Rule::Projection}) {
    Grid g(rectangle_mesh(1, 1), 2);
    const auto u = sphere_function(g, rule);
    const auto& f = g.interior_faces().front();
    auto vals = u.nodal_values();
    for (int n : g.element_nodes(f.elements[0])) {
      const Vector& x = g.node(n);
      const Vector a = g.vertices()[static_cast<std::size_t>(f.vertices[0])], b = g.vertices()[static_cast<std::size_t>(f.vertices[1])];
      const double cross = (b - a)(0) * (x - a)(1) - (b - a)(1) * (x - a)(0);
      if (std::abs(cross) > 1e-12) vals[static_cast<std::size_t>(n)] = {oracle::sphere_near(rng, vals[static_cast<std::size_t>(n)].coords, 0.3)};
    }
    const auto moved = u.with_values(vals);
    for (int k = 0; k < 10; ++k) {
      const Vector x = point_on_face(rng, g, f);
      EXPECT_LT((u.evaluate_in_element(f.elements[0], x).coords - moved.evaluate_in_element(f.elements[0], x).coords).norm(), 1e-12);
    }
  }
}

TEST(GlobalTestFunction, ZeroAndNodalValues) {
  std::mt19937_64 rng(5);
  Grid g(rectangle_mesh(2, 2), 2);
  const auto u = sphere_function(g, Rule::Geodesic);
  const auto zero = GlobalTestFunction<Sphere>::from_coefficients(u, std::vector<Vector>(static_cast<std::size_t>(g.num_nodes()), Vector::Zero(2)));
  EXPECT_EQ(evaluate_test(zero, (Vector(2) << 0.4, 0.35).finished()).vec.norm(), 0.0);
  const auto eta = GlobalTestFunction<Sphere>::from_coefficients(u, random_coefficients(rng, g.num_nodes(), 2));
  for (int i = 0; i < g.num_nodes(); ++i) {
    EXPECT_LT((evaluate_test(eta, g.node(i)).vec - eta.nodal_vectors()[static_cast<std::size_t>(i)].vec).norm(), 1e-10);
  }
}

TEST(GlobalTestFunction, NodalBasis) {
  std::mt19937_64 rng(5);
  Grid g(rectangle_mesh(2, 2), 1);
  const auto u = sphere_function(g, Rule::Projection);
  const auto basis = global_nodal_basis(u);
  ASSERT_EQ(basis.size(), static_cast<std::size_t>(2 * g.num_nodes()));
  const int n = 2 * g.num_nodes();
  Matrix gram(n, n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < g.num_nodes(); ++i) {
      const Matrix frame = Sphere(2).tangent_frame(u.nodal_values()[static_cast<std::size_t>(i)]);
      gram.block(2 * i, a, 2, 1) = frame.transpose() * evaluate_test(basis[static_cast<std::size_t>(a)], g.node(i)).vec;
    }
  EXPECT_LT((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);

  const auto c = random_coefficients(rng, g.num_nodes(), 2);
  const auto eta = GlobalTestFunction<Sphere>::from_coefficients(u, c);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Vector x = (Vector(2) << unif(rng), unif(rng)).finished();
    Vector sum = Vector::Zero(3);
    for (int i = 0; i < g.num_nodes(); ++i)
      for (int j = 0; j < 2; ++j) sum += c[static_cast<std::size_t>(i)](j) * evaluate_test(basis[static_cast<std::size_t>(2 * i + j)], x).vec;
    EXPECT_LT((sum - evaluate_test(eta, x).vec).norm(), 1e-12);
  }
}

TEST(Output, VtkAndCsv) {
  std::mt19937_64 rng(5);
  Grid g(rectangle_mesh(2, 2), 2);
  const auto u = sphere_function(g, Rule::Geodesic);
  const auto eta = GlobalTestFunction<Sphere>::from_coefficients(u, random_coefficients(rng, g.num_nodes(), 2));
  std::ostringstream vtk;
  write_vtk(vtk, u, &eta);
  const std::string s = vtk.str();
  EXPECT_EQ(s.rfind("# vtk DataFile Version 3.0\n", 0), 0u);
  EXPECT_NE(s.find("POINTS 25 double"), std::string::npos);
  EXPECT_NE(s.find("CELLS 8 56"), std::string::npos);
  EXPECT_NE(s.find("CELL_TYPES 8\n22\n"), std::string::npos);
  EXPECT_NE(s.find("POINT_DATA 25\nVECTORS value double"), std::string::npos);
  EXPECT_NE(s.find("VECTORS test_field double"), std::string::npos);

  std::istringstream lines(s);
  std::string line;
  while (std::getline(lines, line) && line.rfind("POINTS", 0) != 0) {
  }
  std::getline(lines, line);
  std::istringstream first(line);
  Vector p(3);
  first >> p(0) >> p(1) >> p(2);
  EXPECT_LT((p - u.nodal_values()[0].coords).norm(), 1e-15);

  std::ostringstream csv;
  write_nodes_csv(csv, u);
  std::istringstream rows(csv.str());
  std::getline(rows, line);
  EXPECT_EQ(line, "node,v0,v1,v2");
  int count = 0;
  while (std::getline(rows, line)) ++count;
  EXPECT_EQ(count, 25);

  std::istringstream back(csv.str());
  const auto read = read_nodes_csv(back);
  ASSERT_EQ(read.size(), 25u);
  for (int i = 0; i < 25; ++i) EXPECT_EQ(read.at(i), u.nodal_values()[static_cast<std::size_t>(i)].coords);
}

TEST(Output, NodeCsvErrors) {
  for (const char* bad : {"0,1,2\n1,1\n", "0,1\n0,2\n", "0,1\nx,2\n", "0,abc\n", "-1,0\n", "0\n"}) {
    std::istringstream in(bad);
    try {
      read_nodes_csv(in);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::Parse);
    }
  }
  std::istringstream ok("# values\nnode,v0\n3, 1.5\n\n0,-2e-3 # comment\n");
  const auto m = read_nodes_csv(ok);
  EXPECT_EQ(m.at(3)(0), 1.5);
  EXPECT_EQ(m.at(0)(0), -2e-3);
}
