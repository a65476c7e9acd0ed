#include "holab/ambient.hpp"
#include "holab/hopf.hpp"
#include "holab/submanifold.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace holab;

namespace {

Vec random_vec(std::mt19937& rng, Eigen::Index n) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST(Ambient, RejectsUnsupportedCurvature) {
  EXPECT_THROW(AmbientSpace::make(1.0, 2), Error);
  EXPECT_THROW(AmbientSpace::make(4.0, 0), Error);
  try {
    AmbientSpace::make(2.0, 2);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(Ambient, DimensionsAndMetric) {
  const auto p = AmbientSpace::make(4.0, 2);
  EXPECT_EQ(p.real_dim(), 6);
  const auto h = AmbientSpace::make(-4.0, 2);
  EXPECT_EQ(h.metric_diag()[0], -1.0);
  EXPECT_EQ(h.metric_diag()[1], -1.0);
  EXPECT_EQ(h.metric_diag()[2], 1.0);
  EXPECT_EQ(AmbientSpace::make(0.0, 3).real_dim(), 6);
}

TEST(Ambient, ComplexStructureIsIsometricAndSquaresToMinusOne) {
  std::mt19937 rng(3);
  for (double c : {0.0, 4.0, -4.0}) {
    const auto s = AmbientSpace::make(c, 2);
    const Vec v = random_vec(rng, s.real_dim()), w = random_vec(rng, s.real_dim());
    EXPECT_NEAR((apply_J(apply_J(v)) + v).norm(), 0.0, 1e-15);
    EXPECT_NEAR(inner(s, apply_J(v), apply_J(w)), inner(s, v, w), 1e-12);
    EXPECT_NEAR(inner(s, apply_J(v), v), 0.0, 1e-12);
  }
}

// Holomorphic sectional curvature c and totally real sectional curvature c/4,
// measured on horizontal vectors of the total space.
TEST(Ambient, CurvatureTensorSectionalValues) {
  for (double c : {4.0, -4.0}) {
    const auto s = AmbientSpace::make(c, 2);
    Vec z = Vec::Zero(6);
    z[c > 0 ? 0 : 0] = 1.0;
    Vec x = Vec::Zero(6), y = Vec::Zero(6);
    x[2] = 1.0;
    y[4] = 1.0;
    const Vec jx = apply_J(x);
    EXPECT_NEAR(inner(s, curvature_tensor(s, x, jx, jx), x), c, 1e-12);
    EXPECT_NEAR(inner(s, curvature_tensor(s, x, y, y), x), c / 4.0, 1e-12);
  }
}

TEST(Hopf, HorizontalProjectionIsOrthogonalToFibre) {
  std::mt19937 rng(5);
  const auto s = AmbientSpace::make(4.0, 2);
  Vec z = random_vec(rng, 6);
  z /= std::sqrt(inner(s, z, z));
  const Vec v = random_vec(rng, 6);
  const Vec h = horizontal_project(s, z, v);
  EXPECT_NEAR(inner(s, h, z), 0.0, 1e-14);
  EXPECT_NEAR(inner(s, h, apply_J(z)), 0.0, 1e-14);
  EXPECT_THROW(horizontal_project(AmbientSpace::make(0.0, 2), z, v), Error);
}

TEST(Ambient, InnerProductExamples) {
  const Vec e0 = Vec::Unit(6, 0), e1 = Vec::Unit(6, 2);
  EXPECT_DOUBLE_EQ(inner(AmbientSpace::make(4.0, 2), e0, e0), 1.0);
  EXPECT_DOUBLE_EQ(inner(AmbientSpace::make(-4.0, 2), e0, e0), -1.0);
  EXPECT_DOUBLE_EQ(inner(AmbientSpace::make(0.0, 3), e0, e1), 0.0);
  try {
    inner(AmbientSpace::make(4.0, 2), Vec::Zero(4), Vec::Zero(4));
    ADD_FAILURE() << "dimension mismatch accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(Ambient, JOnBasisVector) {
  const Vec je0 = apply_J(AmbientSpace::make(4.0, 2), Vec::Unit(6, 0));
  EXPECT_EQ(je0, Vec::Unit(6, 1));
}

TEST(Ambient, CurvatureExamples) {
  std::mt19937 rng(11);
  const auto flat = AmbientSpace::make(0.0, 2);
  EXPECT_EQ(curvature_tensor(flat, random_vec(rng, 4), random_vec(rng, 4), random_vec(rng, 4)).norm(), 0.0);

  const auto cp = AmbientSpace::make(4.0, 2);
  Vec x = Vec::Zero(6), y = Vec::Zero(6);
  x[2] = 1.0;
  y[4] = 1.0;  // y orthogonal to x and Jx
  EXPECT_NEAR((curvature_tensor(cp, x, y, y) - x).norm(), 0.0, 1e-14);
  const Vec jx = apply_J(x);
  EXPECT_NEAR((curvature_tensor(cp, x, jx, jx) - 4.0 * x).norm(), 0.0, 1e-14);
}

TEST(Ambient, CurvatureSymmetriesOnRandomVectors) {
  std::mt19937 rng(13);
  for (double c : {0.0, 4.0, -4.0}) {
    const auto s = AmbientSpace::make(c, 3);
    const Eigen::Index d = s.real_dim();
    for (int trial = 0; trial < 20; ++trial) {
      const Vec x = random_vec(rng, d), y = random_vec(rng, d), z = random_vec(rng, d), w = random_vec(rng, d);
      const Vec bianchi = curvature_tensor(s, x, y, z) + curvature_tensor(s, y, z, x) + curvature_tensor(s, z, x, y);
      EXPECT_LT(bianchi.norm(), 1e-12);
      EXPECT_LT((curvature_tensor(s, x, y, z) + curvature_tensor(s, y, x, z)).norm(), 1e-12);
      EXPECT_NEAR(inner(s, curvature_tensor(s, x, y, z), w), inner(s, curvature_tensor(s, z, w, x), y), 1e-10);
    }
  }
}

TEST(Hopf, ProjectionExamples) {
  std::mt19937 rng(17);
  for (double c : {4.0, -4.0}) {
    const auto s = AmbientSpace::make(c, 2);
    Vec z = random_vec(rng, 6);
    if (c < 0) {  // make it timelike
      z.tail(4) *= 0.2;
      z[0] = 2.0 + std::abs(z[0]);
    }
    z /= std::sqrt(std::abs(inner(s, z, z)));
    ASSERT_NEAR(inner(s, z, z), s.total_space_norm(), 1e-12);
    const Vec jz = apply_J(z);
    EXPECT_LT(horizontal_project(s, z, jz).norm(), 1e-12);
    const Vec h = horizontal_project(s, z, random_vec(rng, 6));
    EXPECT_LT((horizontal_project(s, z, h) - h).norm(), 1e-12);
    // vertical part removed with the right causal sign
    EXPECT_LT((horizontal_project(s, z, jz + h) - h).norm(), 1e-12);
    EXPECT_NEAR(inner(s, hopf_vector(s, z), hopf_vector(s, z)), s.total_space_norm(), 1e-12);
  }
}
