#include "holab/catalog.hpp"
#include "holab/crtype.hpp"
#include "holab/hopf.hpp"
#include "holab/submanifold.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace holab;

namespace {

Mat random_orthogonal(std::mt19937& rng, Eigen::Index n) {
  std::normal_distribution<double> d;
  Mat a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = d(rng);
  Eigen::HouseholderQR<Mat> qr(a);
  return qr.householderQ() * Mat::Identity(n, n);
}

Vec random_vec(std::mt19937& rng, Eigen::Index n) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// round sphere of radius r in the real slice R^3 of C^3
Immersion real_sphere(double r) {
  return make_immersion(AmbientSpace::make(0.0, 3), 2, [r](const auto& u) {
    using S = std::decay_t<decltype(u[0])>;
    using std::cos;
    using std::sin;
    const S zero(0.0);
    return std::vector<S>{S(r) * sin(u[0]) * cos(u[1]), zero, S(r) * sin(u[0]) * sin(u[1]), zero,
                          S(r) * cos(u[0]), zero};
  }, "sphere");
}

// CP^1 = [1 : w : 0] in CP^2
Immersion complex_line_cp2() {
  return make_immersion(AmbientSpace::make(4.0, 2), 2, [](const auto& u) {
    using S = std::decay_t<decltype(u[0])>;
    using std::sqrt;
    const S nrm = sqrt(S(1.0) + u[0] * u[0] + u[1] * u[1]);
    const S zero(0.0);
    return std::vector<S>{S(1.0) / nrm, zero, u[0] / nrm, u[1] / nrm, zero, zero};
  }, "cp1-in-cp2");
}

double max_norm_over_samples(const CatalogEntry& e, int count, const std::function<double(const Vec&)>& f) {
  double r = 0.0;
  for (const Vec& u : catalog_samples(e, count)) r = std::max(r, f(u));
  return r;
}

}  // namespace

// --- frames ---------------------------------------------------------------

TEST(Frame, PlaneNormalIsJTangent) {
  const auto& e = catalog_get("plane-c2");
  const FrameData f = frame_at(e.immersion, e.default_point);
  ASSERT_EQ(f.kt(), 2);
  ASSERT_EQ(f.m(), 2);
  const Mat jt = apply_J(f.tangent);
  EXPECT_LT((jt - f.normal * (f.normal.transpose() * jt)).norm(), 1e-14);
}

TEST(Frame, GramResidualOnCatalog) {
  for (const auto& e : catalog())
    for (const Vec& u : catalog_samples(e, 3)) EXPECT_LT(frame_at(e.immersion, u).gram_residual(), 1e-10) << e.name;
  const auto& c = catalog_get("clifford-torus-cp2");
  const FrameData f = frame_at(c.immersion, c.default_point);
  EXPECT_EQ(f.kt(), 2);
  EXPECT_EQ(f.m(), 2);
  EXPECT_LT(f.gram_residual(), 1e-12);
}

TEST(Frame, NormalsAvoidPositionAndFibre) {
  for (const auto& e : catalog()) {
    if (!e.immersion.space().curved()) continue;
    const FrameData f = frame_at(e.immersion, e.default_point);
    const Vec& g = f.geo.g;
    for (int a = 0; a < f.m(); ++a) {
      EXPECT_NEAR(inner(g, Vec(f.normal.col(a)), f.point), 0.0, 1e-12) << e.name;
      EXPECT_NEAR(inner(g, Vec(f.normal.col(a)), apply_J(f.point)), 0.0, 1e-12) << e.name;
    }
  }
}

TEST(Frame, PullbackTangentContainsHopfVector) {
  for (const char* name : {"geodesic-cp2", "rh2-ch2"}) {
    const auto& e = catalog_get(name);
    const FrameData f = frame_at(pullback(e.immersion), lifted_param(e.default_point));
    const Vec jz = apply_J(f.point);
    const double eps = e.immersion.space().total_space_norm();
    EXPECT_NEAR(inner(f.geo.g, jz, jz), eps, 1e-12);
    EXPECT_LT((jz - f.geo.p_tangent * jz).norm(), 1e-12) << name;
    EXPECT_EQ((f.tangent_sign.array() < 0).count(), eps < 0 ? 1 : 0) << name;
    EXPECT_LT(f.gram_residual(), 1e-10);
  }
}

TEST(Frame, DegenerateJacobianIsRejected) {
  const auto m = make_immersion(AmbientSpace::make(0.0, 2), 2, [](const auto& u) {
    using S = std::decay_t<decltype(u[0])>;
    return std::vector<S>{u[0] * u[0], S(0.0), u[1], S(0.0)};
  });
  try {
    frame_at(m, Vec::Zero(2));
    ADD_FAILURE() << "rank-deficient point accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateImmersion);
  }
}

// --- second fundamental form ---------------------------------------------

TEST(Fundamental, InvariantsOnCatalog) {
  std::mt19937 rng(19);
  for (const auto& e : catalog()) {
    for (const Vec& u : catalog_samples(e, 3)) {
      const FundamentalData fd = fundamental_data(e.immersion, u);
      const FrameData& f = fd.frame;
      for (const Mat& s : fd.shape) EXPECT_LT((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-9) << e.name;
      for (const Mat& gp : fd.gamma_perp) EXPECT_LT((gp + gp.transpose()).cwiseAbs().maxCoeff(), 1e-9) << e.name;
      if (f.m() == 0) continue;
      // Weingarten duality on random tangent/normal vectors
      const Vec x = f.tangent * random_vec(rng, f.kt()), y = f.tangent * random_vec(rng, f.kt());
      const Vec xi = f.normal * random_vec(rng, f.m());
      EXPECT_NEAR(f.ip(fd.alpha_apply(x, y), xi), f.ip(fd.shape_apply(xi, x), y), 1e-9) << e.name;
    }
  }
}

TEST(Fundamental, TotallyGeodesicRP2) {
  const auto& e = catalog_get("rp2-cp2");
  EXPECT_LT(max_norm_over_samples(e, 4, [&](const Vec& u) { return fundamental_data(e.immersion, u).alpha_norm(); }),
            1e-8);
}

TEST(Fundamental, RoundSphereShapeOperator) {
  const double r = 0.7;
  Vec u(2);
  u << 0.9, 0.4;
  for (JetMode mode : {JetMode::Analytic, JetMode::FiniteDifference}) {
    const Immersion m = mode == JetMode::Analytic ? real_sphere(r) : real_sphere(r).with_mode(mode);
    const FundamentalData fd = fundamental_data(m, u);
    // the real normal is the radial direction
    Vec radial = m.eval(u) / r;
    const Mat a = fd.shape_operator(radial);
    const double tol = mode == JetMode::Analytic ? 1e-12 : 1e-6;
    EXPECT_LT((a.cwiseAbs() - (1.0 / r) * Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), tol);
    EXPECT_NEAR(std::abs(a.trace()), 2.0 / r, tol);
  }
}

TEST(Fundamental, CliffordTorusIsMinimal) {
  const auto& e = catalog_get("clifford-torus-cp2");
  for (const Vec& u : catalog_samples(e, 3)) {
    const FundamentalData fd = fundamental_data(e.immersion, u);
    EXPECT_GT(fd.alpha_norm(), 0.1);
    for (const Mat& a : fd.shape_op) EXPECT_NEAR(a.trace(), 0.0, 1e-12);
  }
}

TEST(Fundamental, FiniteDifferenceAgreesWithAnalytic) {
  for (const auto& e : catalog()) {
    const Vec& u = e.default_point;
    double err[2];
    const double hs[2] = {1e-2, 5e-3};
    const FundamentalData exact = fundamental_data(e.immersion, u);
    for (int i = 0; i < 2; ++i) {
      const FundamentalData fd = fundamental_data(e.immersion.with_mode(JetMode::FiniteDifference, hs[i]), u);
      err[i] = 0.0;
      for (std::size_t a = 0; a < exact.alpha.size(); ++a)
        for (std::size_t b = 0; b < exact.alpha.size(); ++b)
          err[i] = std::max(err[i], (fd.alpha[a][b] - exact.alpha[a][b]).norm());
    }
    EXPECT_LT(err[0], 1e-3) << e.name;
    if (err[1] > 1e-11) {
      const double ratio = err[0] / err[1];
      EXPECT_GT(ratio, 3.2) << e.name;
      EXPECT_LT(ratio, 4.8) << e.name;
    }
    // default step
    const FundamentalData fd = fundamental_data(e.immersion.with_mode(JetMode::FiniteDifference), u);
    EXPECT_LT(std::abs(fd.alpha_norm() - exact.alpha_norm()), 1e-5) << e.name;
  }
}

// --- Gauss / Codazzi / Ricci ------------------------------------------------

TEST(GaussCodazziRicci, FlatPlane) {
  const auto& e = catalog_get("plane-c2");
  const GCRResidual r = gauss_codazzi_ricci_residual(e.immersion, e.default_point);
  EXPECT_LT(r.gauss, 1e-10);
  EXPECT_LT(r.codazzi, 1e-10);
  EXPECT_LT(r.ricci, 1e-10);
}

TEST(GaussCodazziRicci, CatalogResidualsSmall) {
  for (const auto& e : catalog()) {
    const GCRResidual r = gauss_codazzi_ricci_residual(e.immersion, e.default_point);
    EXPECT_LT(r.gauss, 1e-10) << e.name;
    EXPECT_LT(r.codazzi, 1e-6) << e.name;
    EXPECT_LT(r.ricci, 1e-6) << e.name;
  }
}

TEST(GaussCodazziRicci, CodazziRefinementIsSecondOrder) {
  const auto& e = catalog_get("conic-cp2");
  const double r1 = gauss_codazzi_ricci_residual(e.immersion, e.default_point, 2e-2).codazzi;
  const double r2 = gauss_codazzi_ricci_residual(e.immersion, e.default_point, 1e-2).codazzi;
  ASSERT_GT(r2, 1e-12);
  EXPECT_GT(r1 / r2, 3.2);
  EXPECT_LT(r1 / r2, 4.8);
}

// --- normal curvature -----------------------------------------------------

TEST(NormalCurvature, SkewAndHypersurfaceFlat) {
  for (const auto& e : catalog())
    EXPECT_LT(normal_curvature(e.immersion, e.default_point).skew_residual(), 1e-10) << e.name;
  const auto& s = catalog_get("geodesic-sphere-cp2");
  EXPECT_LT(normal_curvature(s.immersion, s.default_point).max_norm(), 1e-14);
}

TEST(NormalCurvature, ComplexLineIsMinusTwoJ) {
  const auto& e = catalog_get("complex-line-cp3");
  const NormalCurvature nc = normal_curvature(e.immersion, e.default_point);
  const FrameData& f = nc.data.frame;
  const Mat jnu = f.normal.transpose() * f.geo.g.asDiagonal() * apply_J(f.normal);
  const Vec x = f.tangent.col(0);
  const Mat r = nc.apply(x, f.geo.p_tangent * apply_J(x));
  EXPECT_LT((r + 2.0 * jnu).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(NormalCurvature, TotallyRealChainFormula) {
  // rp2-cp2 is its own chain: R_perp(X, Y) xi = (JX ^ JY) xi with c / 4 = 1
  const auto& e = catalog_get("rp2-cp2");
  const NormalCurvature nc = normal_curvature(e.immersion, e.default_point);
  const FrameData& f = nc.data.frame;
  const Vec x = f.tangent.col(0), y = f.tangent.col(1);
  const Vec jx = apply_J(x), jy = apply_J(y);
  const Mat r = nc.apply(x, y);
  for (int a = 0; a < f.m(); ++a) {
    const Vec xi = f.normal.col(a);
    const Vec want = inner(f.geo.g, jy, xi) * jx - inner(f.geo.g, jx, xi) * jy;
    EXPECT_LT((f.normal * (r * f.normal_coords(xi)) - want).norm(), 1e-12);
  }
}

TEST(NormalCurvature, IndependentOfFrameChoice) {
  std::mt19937 rng(23);
  for (const char* name : {"complex-line-cp3", "clifford-torus-cp2", "totally-real-surface-cp3", "conic-cp2"}) {
    const auto& e = catalog_get(name);
    auto spectrum = [](const NormalCurvature& nc) {
      Mat acc = Mat::Zero(nc.m(), nc.m());
      for (const auto& r : nc.pairs()) acc += r.transpose() * r;
      Eigen::SelfAdjointEigenSolver<Mat> es(acc);
      return Vec(es.eigenvalues());
    };
    FrameData f = frame_at(e.immersion, e.default_point);
    const Vec base = spectrum(normal_curvature_from(fundamental_from_frame(f)));
    f.normal = f.normal * random_orthogonal(rng, f.m());
    const Mat p = random_orthogonal(rng, f.kt());
    f.tangent = f.tangent * p;
    f.param_dirs = f.param_dirs * p;
    const Vec rotated = spectrum(normal_curvature_from(fundamental_from_frame(f)));
    EXPECT_LT((base - rotated).cwiseAbs().maxCoeff(), 1e-8) << name;
  }
}

// --- CR type --------------------------------------------------------------

TEST(CRType, CatalogLabelsMatchGroundTruth) {
  for (const auto& e : catalog()) {
    for (const Vec& u : catalog_samples(e, 4)) {
      const CRClassification c = classify(e.immersion, u, 1e-6);
      EXPECT_EQ(c.label, e.truth.cr_label) << e.name << " at " << u.transpose();
      EXPECT_EQ(c.coisotropic, e.truth.coisotropic) << e.name;
      EXPECT_EQ(c.dim_D + c.dim_Dperp, e.immersion.k());
      EXPECT_EQ(c.dim_D % 2, 0);
      if (c.label == CRLabel::Complex) EXPECT_EQ(c.dim_D, e.immersion.k());
      if (c.totally_real()) EXPECT_EQ(c.dim_D, 0);
      if (c.label == CRLabel::Lagrangian) {
        EXPECT_EQ(e.immersion.k(), e.immersion.space().n);
        EXPECT_LT(c.coisotropic_angle, 1e-6);
      }
    }
  }
}

TEST(CRType, CurvesAreTotallyReal) {
  for (const char* name : {"geodesic-cp2", "latitude-circle-cp2", "rp1-in-rp2-cp2-circle"}) {
    const auto& e = catalog_get(name);
    EXPECT_TRUE(classify(e.immersion, e.default_point).totally_real()) << name;
  }
  EXPECT_EQ(classify(catalog_get("holomorphic-graph-c2").immersion, catalog_get("holomorphic-graph-c2").default_point).label,
            CRLabel::Complex);
  EXPECT_EQ(classify(catalog_get("geodesic-sphere-cp2").immersion, catalog_get("geodesic-sphere-cp2").default_point).label,
            CRLabel::Coisotropic);
}

TEST(CRType, ReparametrizationInvariance) {
  for (const auto& e : catalog()) {
    const Vec& u = e.default_point;
    const CRClassification a = classify(e.immersion, u);
    const CRClassification b = classify(reparametrize(e.immersion, 2.0), 0.5 * u);
    EXPECT_EQ(a.label, b.label) << e.name;
    ASSERT_EQ(a.angles.size(), b.angles.size());
    for (std::size_t i = 0; i < a.angles.size(); ++i) EXPECT_NEAR(a.angles[i], b.angles[i], 1e-8) << e.name;
  }
}

TEST(CRType, RejectsBadTolerance) {
  const auto& e = catalog_get("rp2-cp2");
  for (double tol : {-1e-3, std::numbers::pi / 4, 1.0}) {
    try {
      classify(e.immersion, e.default_point, tol);
      ADD_FAILURE() << "tolerance " << tol << " accepted";
    } catch (const Error& err) {
      EXPECT_EQ(err.kind(), ErrorKind::InvalidTolerance);
    }
  }
}

TEST(CRType, FiniteDifferenceDefaultTolerance) {
  const auto& e = catalog_get("clifford-torus-cp2");
  const CRClassification c = classify(e.immersion.with_mode(JetMode::FiniteDifference), e.default_point);
  EXPECT_DOUBLE_EQ(c.tol, 1e-3);
  EXPECT_EQ(c.label, CRLabel::Lagrangian);
}

// --- catalog --------------------------------------------------------------

TEST(Catalog, RequiredEntriesPresent) {
  const auto names = catalog_names();
  for (const char* n : {"plane-c2", "complex-line-cp3", "conic-cp2", "geodesic-cp2", "latitude-circle-cp2",
                        "clifford-torus-cp2", "rp2-cp2", "rp1-in-rp2-cp2", "rp1-in-rp2-cp2-circle",
                        "geodesic-sphere-cp2", "rh2-ch2", "totally-real-surface-cp3"})
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
  try {
    catalog_get("no-such-entry");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotFound);
  }
}

TEST(Catalog, DocumentedExamples) {
  EXPECT_EQ(catalog_get("clifford-torus-cp2").truth.cr_label, CRLabel::Lagrangian);
  EXPECT_EQ(catalog_get("geodesic-cp2").truth.flat_normal, std::optional<bool>(true));
  EXPECT_EQ(catalog_get("complex-line-cp3").truth.expected_algebra_dim, std::optional<int>(1));
}

TEST(Catalog, FlatnessRederived) {
  for (const auto& e : catalog()) {
    if (!e.truth.flat_normal) continue;
    const bool curved = e.immersion.space().curved();
    const Immersion target = curved ? pullback(e.immersion) : e.immersion;
    const double r = max_norm_over_samples(e, 4, [&](const Vec& u) {
      return normal_curvature(target, curved ? lifted_param(u) : u).max_norm();
    });
    EXPECT_EQ(r < 1e-8, *e.truth.flat_normal) << e.name << " max |R_perp| = " << r;
  }
}

TEST(Catalog, NullityAndGeodesicRederived) {
  for (const auto& e : catalog()) {
    const FundamentalData fd = fundamental_data(e.immersion, e.default_point);
    if (e.truth.totally_geodesic) EXPECT_EQ(fd.alpha_norm() < 1e-8, *e.truth.totally_geodesic) << e.name;
    if (e.truth.relative_nullity) {
      const int kt = fd.kt();
      Mat stack = Mat::Zero(std::max(1, fd.m()) * kt, kt);
      for (int a = 0; a < fd.m(); ++a) stack.middleRows(a * kt, kt) = fd.shape_op[static_cast<std::size_t>(a)];
      Eigen::JacobiSVD<Mat> svd(stack);
      int rank = 0;
      for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()[i] > 1e-8;
      EXPECT_EQ(kt - rank, *e.truth.relative_nullity) << e.name;
    }
  }
}

// --- Hopf fibration and pull-backs ----------------------------------------

TEST(Pullback, DimensionAndFibre) {
  for (const auto& e : catalog()) {
    if (!e.immersion.space().curved()) {
      EXPECT_THROW(pullback(e.immersion), Error);
      continue;
    }
    const Immersion up = pullback(e.immersion);
    EXPECT_EQ(up.k(), e.immersion.k() + 1);
    const Jet j = up.jet(lifted_param(e.default_point, 0.3));
    EXPECT_LT((Vec(j.d1.col(up.k() - 1)) - apply_J(j.value)).norm(), 1e-14) << e.name;
  }
}

TEST(Pullback, RealProjectivePlaneHorizontalDirectionsAreReal) {
  const auto& e = catalog_get("rp2-cp2");
  const LocalGeometry geo = local_geometry(pullback(e.immersion), lifted_param(e.default_point));
  const PullbackCoords pc = pullback_coords(geo);
  for (Eigen::Index a = 0; a < pc.horizontal.cols(); ++a)
    for (Eigen::Index i = 1; i < pc.horizontal.rows(); i += 2) EXPECT_NEAR(pc.horizontal(i, a), 0.0, 1e-14);
}

TEST(Pullback, RejectsOffShellRepresentative) {
  const auto m = make_immersion(AmbientSpace::make(4.0, 1), 1, [](const auto& u) {
    using S = std::decay_t<decltype(u[0])>;
    return std::vector<S>{S(2.0), S(0.0), u[0], S(0.0)};
  });
  try {
    pullback(m).jet(lifted_param(Vec::Constant(1, 0.1)));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidRepresentative);
  }
}

TEST(Pullback, LiftedVectorsProjectBack) {
  for (const auto& e : catalog()) {
    if (e.immersion.space().model != Model::Projective) continue;
    const Vec& u = e.default_point;
    const LocalGeometry geo = local_geometry(e.immersion, u);
    const Vec z = geo.jet.value;
    if (std::hypot(z[0], z[1]) < 0.2) continue;  // chart w = z / z_0 not suitable
    const double h = 1e-5;
    for (int a = 0; a < e.immersion.k(); ++a) {
      const Vec x = geo.coord.col(a);
      EXPECT_NEAR(inner(geo.g, x, apply_J(z)), 0.0, 1e-10) << e.name;
      Vec up = u, um = u;
      up[a] += h;
      um[a] -= h;
      auto chart = [](const Vec& zz) {
        Vec w(zz.size() - 2);
        const double d = zz[0] * zz[0] + zz[1] * zz[1];
        for (Eigen::Index i = 2; i + 1 < zz.size(); i += 2) {
          w[i - 2] = (zz[i] * zz[0] + zz[i + 1] * zz[1]) / d;
          w[i - 1] = (zz[i + 1] * zz[0] - zz[i] * zz[1]) / d;
        }
        return w;
      };
      const Vec fd = (chart(e.immersion.eval(up)) - chart(e.immersion.eval(um))) / (2 * h);
      EXPECT_LT((affine_chart_differential(z, x) - fd).norm(), 1e-8) << e.name;
    }
  }
}

TEST(LiftIdentities, AnalyticResidualsVanish) {
  const LiftResidual r = check_lift_identities(complex_line_cp2(), Vec::Constant(2, 0.3));
  EXPECT_LT(r.max(), 1e-9);
  const auto& g = catalog_get("geodesic-cp2");
  EXPECT_LT(check_lift_identities(g.immersion, g.default_point).hopf_shape, 1e-7);
  for (const auto& e : catalog()) {
    if (!e.immersion.space().curved()) continue;
    EXPECT_LT(check_lift_identities(e.immersion, e.default_point).max(), 1e-9) << e.name;
  }
}

TEST(LiftIdentities, FiniteDifferenceRefinement) {
  for (const auto& e : catalog()) {
    if (!e.immersion.space().curved()) continue;
    const double a = check_lift_identities(e.immersion.with_mode(JetMode::FiniteDifference, 1e-2), e.default_point).max();
    const double b = check_lift_identities(e.immersion.with_mode(JetMode::FiniteDifference, 5e-3), e.default_point).max();
    ASSERT_GT(b, 1e-12) << e.name;
    EXPECT_GT(a / b, 3.2) << e.name;
    EXPECT_LT(a / b, 4.8) << e.name;
  }
}

TEST(LiftIdentities, FibreDerivativeOfLiftedNormals) {
  // parallel along the fibre exactly for coisotropic M
  for (const char* name : {"rp2-cp2", "clifford-torus-cp2", "geodesic-sphere-cp2", "rh2-ch2"}) {
    const auto& e = catalog_get(name);
    for (const Vec& u : catalog_samples(e, 3)) {
      const FrameData f = frame_at(e.immersion, u);
      for (int a = 0; a < f.m(); ++a)
        EXPECT_LT(fibre_normal_derivative(e.immersion, u, f.normal.col(a)), 1e-6) << name;
    }
  }
  for (const char* name : {"totally-real-surface-cp3", "geodesic-cp2"}) {
    const auto& e = catalog_get(name);
    const FrameData f = frame_at(e.immersion, e.default_point);
    double worst = 0.0;
    for (int a = 0; a < f.m(); ++a)
      worst = std::max(worst, fibre_normal_derivative(e.immersion, e.default_point, f.normal.col(a)));
    EXPECT_GT(worst, 1e-5) << name;
  }
}
