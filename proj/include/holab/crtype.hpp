#pragma once

#include "holab/linalg.hpp"
#include "holab/submanifold.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace holab {

enum class CRLabel { Complex, TotallyReal, Coisotropic, Lagrangian, GenericCR, NotCR };

inline const char* to_string(CRLabel l) {
  switch (l) {
    case CRLabel::Complex: return "Complex";
    case CRLabel::TotallyReal: return "TotallyReal";
    case CRLabel::Coisotropic: return "Coisotropic";
    case CRLabel::Lagrangian: return "Lagrangian";
    case CRLabel::GenericCR: return "GenericCR";
    case CRLabel::NotCR: return "NotCR";
  }
  return "?";
}

struct CRClassification {
  int dim_D = 0;
  int dim_Dperp = 0;
  CRLabel label = CRLabel::NotCR;
  std::vector<double> angles;  // between J(TM) and TM, ascending
  double tol = 0.0;
  bool coisotropic = false;
  double coisotropic_angle = 0.0;  // largest angle of J(nu) against TM
  double anti_invariance_angle = 0.0;  // largest angle of J(D-perp) against nu
  Mat D;      // orthonormal basis of the holomorphic distribution
  Mat Dperp;  // its complement in TM

  bool totally_real() const { return label == CRLabel::TotallyReal || label == CRLabel::Lagrangian; }
};

inline double default_cr_tolerance(JetMode mode) { return mode == JetMode::Analytic ? 1e-6 : 1e-3; }

inline void check_angle_tolerance(double tol) {
  if (!(tol > 0.0 && tol < std::numbers::pi / 4))
    throw Error(ErrorKind::InvalidTolerance, "angle tolerance must lie in (0, pi/4), got " + std::to_string(tol));
}

namespace detail {

// Largest angle between the vectors of an orthonormal set X and the span of
// the orthonormal basis B (zero when X is empty).
inline double containment_angle(const Mat& x, const Mat& b, const Vec& g) {
  if (x.cols() == 0) return 0.0;
  if (b.cols() == 0) return std::numbers::pi / 2;
  const Mat resid = x - b * (b.transpose() * g.asDiagonal() * x);
  const Mat rg = resid.transpose() * g.asDiagonal() * resid;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rg + rg.transpose()));
  const double s2 = es.eigenvalues().maxCoeff();
  return std::asin(std::sqrt(std::clamp(s2, 0.0, 1.0)));
}

}  // namespace detail

inline CRClassification classify_frame(const FrameData& f, double tol) {
  check_angle_tolerance(tol);
  const Vec& g = f.geo.g;
  const Mat& t = f.tangent;
  const Mat jt = apply_J(t);
  const int k = static_cast<int>(t.cols());
  CRClassification r;
  r.tol = tol;
  r.angles = linalg::principal_angles(jt, t, g);

  // Principal vectors inside TM, ordered by decreasing alignment with J(TM).
  const Mat cross = t.transpose() * g.asDiagonal() * jt;
  Eigen::JacobiSVD<Mat> svd(cross, Eigen::ComputeFullU);
  const Mat pv = t * svd.matrixU();

  int d = 0;
  while (d < k && r.angles[static_cast<std::size_t>(d)] < tol) ++d;
  bool ok = true;
  if (d % 2 == 1) {
    if (d < k && r.angles[static_cast<std::size_t>(d)] < 10.0 * tol)
      ++d;
    else
      ok = false;
  }
  r.dim_D = d;
  r.dim_Dperp = k - d;
  r.D = pv.leftCols(d);
  r.Dperp = pv.rightCols(k - d);

  r.anti_invariance_angle = detail::containment_angle(apply_J(r.Dperp), f.normal, g);
  r.coisotropic_angle = detail::containment_angle(apply_J(f.normal), t, g);
  r.coisotropic = r.coisotropic_angle < tol;
  if (!ok || r.anti_invariance_angle >= tol) {
    r.label = CRLabel::NotCR;
  } else if (d == k) {
    r.label = CRLabel::Complex;
  } else if (d == 0) {
    r.label = r.coisotropic ? CRLabel::Lagrangian : CRLabel::TotallyReal;
  } else {
    r.label = r.coisotropic ? CRLabel::Coisotropic : CRLabel::GenericCR;
  }
  return r;
}

/// Pointwise CR type of M at u. A zero tol picks the jet-mode default.
inline CRClassification classify(const Immersion& m, const Vec& u, double tol = 0.0) {
  if (tol == 0.0) tol = default_cr_tolerance(m.mode());
  check_angle_tolerance(tol);
  return classify_frame(frame_at(m, u), tol);
}

/// Classification over several points; a change of dim_D between points
/// makes the aggregate NotCR.
inline CRClassification classify_samples(const Immersion& m, const std::vector<Vec>& us, double tol = 0.0) {
  CRClassification agg;
  bool first = true;
  for (const Vec& u : us) {
    CRClassification c = classify(m, u, tol);
    if (first) {
      agg = c;
      first = false;
      continue;
    }
    if (c.dim_D != agg.dim_D || c.label != agg.label) agg.label = CRLabel::NotCR;
    agg.coisotropic = agg.coisotropic && c.coisotropic;
    agg.coisotropic_angle = std::max(agg.coisotropic_angle, c.coisotropic_angle);
    agg.anti_invariance_angle = std::max(agg.anti_invariance_angle, c.anti_invariance_angle);
  }
  return agg;
}

}  // namespace holab
