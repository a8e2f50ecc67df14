#include <gtest/gtest.h>

#include <random>

#include "gfe/euclidean.hpp"
#include "gfe/geodesic_interpolant.hpp"
#include "gfe/projection_interpolant.hpp"
#include "gfe/rotation.hpp"
#include "gfe/sphere.hpp"
#include "oracles.hpp"

using namespace gfe;

namespace {

Vector xi1(double x) { return Vector::Constant(1, x); }

std::vector<ManifoldPoint> sphere_values(std::mt19937_64& rng, int m, double radius) {
  const Vector center = oracle::random_unit(rng, 3);
  std::vector<ManifoldPoint> out;
  for (int i = 0; i < m; ++i) out.push_back({oracle::sphere_near(rng, center, radius)});
  return out;
}

std::vector<ManifoldPoint> rotation_values(std::mt19937_64& rng, int m, double angle) {
  const Vector center = oracle::random_rotation(rng);
  std::vector<ManifoldPoint> out;
  for (int i = 0; i < m; ++i) out.push_back({oracle::rotation_near(rng, center, angle)});
  return out;
}

}  // namespace

TEST(ProjectionInterpolant, ConstantData) {
  std::mt19937_64 rng(7);
  const Vector v = oracle::random_unit(rng, 3);
  ProjectionInterpolant<Sphere> g(Sphere(2), ReferenceElement(2, 2), std::vector<ManifoldPoint>(6, {v}));
  const Vector xi = oracle::random_reference_point(rng, 2);
  EXPECT_LT((g.eval(xi).coords - v).norm(), 1e-15);
  for (const auto& t : g.d_dxi(xi)) EXPECT_LT(t.vec.norm(), 1e-14);
  EXPECT_LT(g.chordal_equivalence_check(xi), 1e-14);
}

TEST(ProjectionInterpolant, ChordMidpoint) {
  ProjectionInterpolant<Sphere> g(Sphere(2), ReferenceElement(1, 1), {{Vector::Unit(3, 0)}, {Vector::Unit(3, 1)}});
  const Vector expected = (Vector::Unit(3, 0) + Vector::Unit(3, 1)) / std::sqrt(2.0);
  EXPECT_LT((g.eval(xi1(0.5)).coords - expected).norm(), 1e-15);
}

TEST(ProjectionInterpolant, AntipodalDataHasNoProjection) {
  ProjectionInterpolant<Sphere> g(Sphere(2), ReferenceElement(1, 1), {{Vector::Unit(3, 0)}, {-Vector::Unit(3, 0)}});
  for (auto f : {0, 1, 2}) {
    try {
      if (f == 0) g.eval(xi1(0.5));
      if (f == 1) g.d_dxi(xi1(0.5));
      if (f == 2) g.d_dv(xi1(0.5), 0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::ProjectionUndefined);
    }
  }
}

TEST(ProjectionInterpolant, EuclideanIsLinearInterpolation) {
  std::mt19937_64 rng(7);
  ReferenceElement e(2, 2);
  Matrix data = Matrix::Random(2, e.size());
  std::vector<ManifoldPoint> vals;
  for (int i = 0; i < e.size(); ++i) vals.push_back({data.col(i)});
  ProjectionInterpolant<EuclideanSpace> g(EuclideanSpace(2), e, vals);
  for (int k = 0; k < 10; ++k) {
    const Vector xi = oracle::random_reference_point(rng, 2);
    EXPECT_LT((g.eval(xi).coords - data * e.shape_values(xi)).norm(), 1e-14);
    const auto dx = g.d_dxi(xi);
    for (int j = 0; j < 2; ++j) EXPECT_LT((dx[j].vec - data * e.shape_gradients(xi).col(j)).norm(), 1e-13);
  }
}

TEST(ProjectionInterpolant, NodalAgreement) {
  std::mt19937_64 rng(7);
  for (int p = 1; p <= 2; ++p) {
    ReferenceElement e(2, p);
    ProjectionInterpolant<Sphere> g(Sphere(2), e, sphere_values(rng, e.size(), 1.0));
    ProjectionInterpolant<Rotation3> r(Rotation3(), e, rotation_values(rng, e.size(), 1.0));
    for (int j = 0; j < e.size(); ++j) {
      EXPECT_LT((g.eval(e.node(j)).coords - g.values()[j].coords).norm(), 1e-12);
      EXPECT_LT((r.eval(e.node(j)).coords - r.values()[j].coords).norm(), 1e-12);
    }
  }
}

TEST(ProjectionInterpolant, DerivativeInXiMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  for (int p = 1; p <= 2; ++p)
    for (int k = 0; k < 10; ++k) {
      ReferenceElement e(2, p);
      ProjectionInterpolant<Sphere> g(Sphere(2), e, sphere_values(rng, e.size(), 0.8));
      ProjectionInterpolant<Rotation3> r(Rotation3(), e, rotation_values(rng, e.size(), 0.8));
      const Vector xi = oracle::random_reference_point(rng, 2, 0.01);
      const auto dx = g.d_dxi(xi);
      const auto fd = oracle::fd_d_dxi(g, xi, 1e-6);
      const auto rdx = r.d_dxi(xi);
      const auto rfd = oracle::fd_d_dxi(r, xi, 1e-6);
      for (int j = 0; j < 2; ++j) {
        EXPECT_LT((dx[j].vec - fd[j]).norm(), 1e-6);
        EXPECT_LT((rdx[j].vec - rfd[j]).norm(), 1e-6);
      }
    }
}

TEST(ProjectionInterpolant, GreatCircleTangent) {
  const double a = 1.2;
  const Vector w = std::cos(a) * Vector::Unit(3, 0) + std::sin(a) * Vector::Unit(3, 1);
  ProjectionInterpolant<Sphere> g(Sphere(2), ReferenceElement(1, 1), {{Vector::Unit(3, 0)}, {w}});
  for (double s : {0.1, 0.5, 0.8}) {
    const auto dx = g.d_dxi(xi1(s));
    EXPECT_LT(std::abs(dx[0].vec(2)), 1e-15);
    EXPECT_LT(std::abs(dx[0].vec.dot(dx[0].base.coords)), 1e-14);
    EXPECT_NEAR(dx[0].vec.norm(), oracle::fd_d_dxi(g, xi1(s), 1e-6)[0].norm(), 1e-6);
  }
}

TEST(ProjectionInterpolant, DerivativeInValues) {
  std::mt19937_64 rng(7);
  for (int p = 1; p <= 2; ++p) {
    ReferenceElement e(2, p);
    ProjectionInterpolant<Sphere> g(Sphere(2), e, sphere_values(rng, e.size(), 0.8));
    ProjectionInterpolant<Rotation3> r(Rotation3(), e, rotation_values(rng, e.size(), 0.8));
    for (int j = 0; j < e.size(); ++j) {
      const auto dv = g.d_dv_all(e.node(j));
      const auto rv = r.d_dv_all(e.node(j));
      for (int i = 0; i < e.size(); ++i) {
        EXPECT_LT((dv[i] - (i == j ? 1.0 : 0.0) * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((rv[i] - (i == j ? 1.0 : 0.0) * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
    for (int k = 0; k < 10; ++k) {
      const Vector xi = oracle::random_reference_point(rng, 2);
      const auto dv = g.d_dv_all(xi);
      const auto rv = r.d_dv_all(xi);
      for (int i = 0; i < e.size(); ++i) {
        EXPECT_LT(oracle::max_rel_error(dv[i], oracle::fd_d_dv(g, xi, i, 1e-5)), 1e-4);
        EXPECT_LT(oracle::max_rel_error(rv[i], oracle::fd_d_dv(r, xi, i, 1e-5)), 1e-4);
      }
    }
  }
  ProjectionInterpolant<Sphere> single(Sphere(2), ReferenceElement(0, 1), {{Vector::Unit(3, 2)}});
  EXPECT_LT((single.d_dv(Vector(0), 0) - Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(ProjectionInterpolant, ChordalStationarity) {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    ReferenceElement e(2, 1 + k % 2);
    ProjectionInterpolant<Sphere> g(Sphere(2), e, sphere_values(rng, e.size(), 1.0));
    worst = std::max(worst, g.chordal_equivalence_check(oracle::random_reference_point(rng, 2)));
  }
  EXPECT_LE(worst, 1e-10);

  ReferenceElement e(2, 1);
  ProjectionInterpolant<Sphere> g(Sphere(2), e, sphere_values(rng, e.size(), 1.0));
  const Vector xi = oracle::random_reference_point(rng, 2, 0.1);
  const ManifoldPoint q = g.eval(xi);
  const ManifoldPoint moved = Sphere(2).exp({q, 0.05 * Sphere(2).tangent_frame(q).col(0)});
  EXPECT_GT(g.chordal_residual(xi, moved), 1e-3);
}

TEST(ProjectionInterpolant, RotationEquivariance) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 10; ++k) {
    ReferenceElement e(2, 2);
    const auto vals = sphere_values(rng, e.size(), 1.0);
    const Eigen::Matrix3d rot = so3::exp(oracle::random_rotation_vector(rng, 3.0));
    std::vector<ManifoldPoint> moved;
    for (const auto& v : vals) moved.push_back({rot * v.coords});
    ProjectionInterpolant<Sphere> a(Sphere(2), e, vals), b(Sphere(2), e, moved);
    const Vector xi = oracle::random_reference_point(rng, 2);
    EXPECT_LT((b.eval(xi).coords - rot * a.eval(xi).coords).norm(), 1e-12);
  }
}

TEST(ProjectionInterpolant, CloseToGeodesicForSmallData) {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    ReferenceElement e(2, 1 + k % 2);
    const auto vals = sphere_values(rng, e.size(), 0.1);
    ProjectionInterpolant<Sphere> pr(Sphere(2), e, vals);
    GeodesicInterpolant<Sphere> ge(Sphere(2), e, vals);
    const Vector xi = oracle::random_reference_point(rng, 2);
    worst = std::max(worst, Sphere(2).dist(pr.eval(xi), ge.eval(xi)));
  }
  EXPECT_LE(worst, 1e-3);
}
