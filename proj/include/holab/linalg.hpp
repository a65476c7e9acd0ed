#pragma once

#include "holab/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace holab::linalg {

/// Projector onto span(B), orthogonal with respect to diag(g). Requires the
/// restricted Gram matrix B^T G B to be nondegenerate.
inline Mat projector(const Mat& b, const Vec& g) {
  if (b.cols() == 0) return Mat::Zero(b.rows(), b.rows());
  const Mat gb = g.asDiagonal() * b;
  const Mat s = b.transpose() * gb;
  return b * s.fullPivLu().solve(gb.transpose());
}

/// Directional derivative of projector(B, g) when B moves with velocity dB:
/// dQ = (I - Q) dB S^-1 B^T G + B S^-1 dB^T G (I - Q).
inline Mat projector_derivative(const Mat& b, const Mat& db, const Vec& g) {
  const Eigen::Index d = b.rows();
  if (b.cols() == 0) return Mat::Zero(d, d);
  const Mat gb = g.asDiagonal() * b;
  const Mat s = b.transpose() * gb;
  const auto lu = s.fullPivLu();
  const Mat q = b * lu.solve(gb.transpose());
  const Mat iq = Mat::Identity(d, d) - q;
  const Mat left = iq * db * lu.solve(gb.transpose());
  const Mat right = b * lu.solve(db.transpose() * g.asDiagonal()) * iq;
  return left + right;
}

/// Euclidean-orthonormal basis of the column span, dropping singular values
/// below max(abs_tol, rel_tol * s_max). Deterministic for fixed input.
inline Mat span_basis(const Mat& cols, double rel_tol = 1e-10, double abs_tol = 1e-12) {
  if (cols.cols() == 0) return Mat(cols.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(cols, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  const double cut = std::max(abs_tol, rel_tol * (s.size() ? s[0] : 0.0));
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > cut) ++r;
  return svd.matrixU().leftCols(r);
}

/// Rank of a column set with the same cutoff rule as span_basis.
inline Eigen::Index numerical_rank(const Mat& cols, double rel_tol, double abs_tol) {
  return span_basis(cols, rel_tol, abs_tol).cols();
}

/// Rescale the columns of a spacelike basis so that B^T G B = I (Cholesky).
inline Mat g_orthonormalize(const Mat& b, const Vec& g) {
  if (b.cols() == 0) return b;
  const Mat s = b.transpose() * g.asDiagonal() * b;
  Eigen::LLT<Mat> llt(s);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::DegenerateImmersion, "subspace is not spacelike");
  // B L^{-T}
  return llt.matrixU().solve<Eigen::OnTheRight>(b);
}

/// Range of a projector as a G-orthonormal basis (the range must be spacelike).
/// Column-pivoted QR keeps the choice of basis deterministic.
inline Mat projector_range(const Mat& p, const Vec& g, Eigen::Index rank) {
  Eigen::ColPivHouseholderQR<Mat> qr(p);
  Mat q = qr.householderQ() * Mat::Identity(p.rows(), rank);
  // Remove the component outside range(P) that round-off leaves behind.
  q = p * q;
  return g_orthonormalize(q, g);
}

/// Principal angles (ascending, radians) between the spans of two
/// G-orthonormal spacelike bases A (p columns) and B (q columns), p <= q.
inline std::vector<double> principal_angles(const Mat& a, const Mat& b, const Vec& g) {
  std::vector<double> out;
  if (a.cols() == 0) return out;
  if (b.cols() == 0) {
    out.assign(static_cast<std::size_t>(a.cols()), std::numbers::pi / 2);
    return out;
  }
  const Mat cross = b.transpose() * g.asDiagonal() * a;  // q x p
  const Mat resid = a - b * cross;                       // component of A outside span(B)
  const Mat rg = resid.transpose() * g.asDiagonal() * resid;
  Eigen::JacobiSVD<Mat> svc(cross);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rg + rg.transpose()));
  const Vec& cs = svc.singularValues();  // descending cosines
  const Vec& s2 = es.eigenvalues();      // ascending squared sines
  const Eigen::Index p = a.cols();
  for (Eigen::Index i = 0; i < p; ++i) {
    const double c = i < cs.size() ? std::clamp(cs[i], 0.0, 1.0) : 0.0;
    const double s = std::sqrt(std::clamp(s2[i], 0.0, 1.0));
    out.push_back(c > std::sqrt(0.5) ? std::asin(s) : std::acos(c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double max_angle(const std::vector<double>& angles) {
  return angles.empty() ? 0.0 : *std::max_element(angles.begin(), angles.end());
}

/// Principal logarithm of a real orthogonal matrix via its real Schur form.
/// Returns false when an eigenvalue sits at -1 (no real principal branch).
inline bool orthogonal_log(const Mat& q, Mat& out) {
  const Eigen::Index m = q.rows();
  if (m == 0) {
    out = Mat(0, 0);
    return true;
  }
  Eigen::RealSchur<Mat> schur(q);
  const Mat& t = schur.matrixT();
  const Mat& u = schur.matrixU();
  Mat l = Mat::Zero(m, m);
  for (Eigen::Index i = 0; i < m;) {
    if (i + 1 < m && std::abs(t(i + 1, i)) > 1e-14) {
      const double c = 0.5 * (t(i, i) + t(i + 1, i + 1));
      const double s = 0.5 * (t(i + 1, i) - t(i, i + 1));
      const double ang = std::atan2(s, c);
      l(i, i + 1) = -ang;
      l(i + 1, i) = ang;
      i += 2;
    } else {
      if (t(i, i) < 0.0) return false;
      ++i;
    }
  }
  out = u * l * u.transpose();
  out = 0.5 * (out - out.transpose()).eval();
  return true;
}

/// Nearest orthogonal matrix (polar factor), used for frame alignment.
inline Mat procrustes(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

inline Mat skew(const Mat& a) { return 0.5 * (a - a.transpose()); }
inline Mat sym(const Mat& a) { return 0.5 * (a + a.transpose()); }

/// Flatten a square matrix column-major (Frobenius inner product = dot).
inline Vec flatten(const Mat& a) { return Eigen::Map<const Vec>(a.data(), a.size()); }

inline Mat unflatten(const Vec& v, Eigen::Index m) { return Eigen::Map<const Mat>(v.data(), m, m); }

/// Frobenius-orthonormal basis of span{mats}, keeping singular values above
/// max(abs_tol, rel_tol * s_max).
inline std::vector<Mat> matrix_span(const std::vector<Mat>& mats, Eigen::Index m, double rel_tol, double abs_tol,
                                    Vec* singular_values = nullptr) {
  std::vector<Mat> basis;
  if (mats.empty() || m == 0) return basis;
  Mat stack(m * m, static_cast<Eigen::Index>(mats.size()));
  for (std::size_t i = 0; i < mats.size(); ++i) stack.col(static_cast<Eigen::Index>(i)) = flatten(mats[i]);
  Eigen::JacobiSVD<Mat> svd(stack, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  if (singular_values) *singular_values = s;
  const double cut = std::max(abs_tol, rel_tol * s[0]);
  for (Eigen::Index i = 0; i < s.size() && s[i] > cut; ++i) {
    Mat b = unflatten(svd.matrixU().col(i), m);
    // fix the sign so the largest-magnitude entry is positive
    Eigen::Index r, c;
    b.cwiseAbs().maxCoeff(&r, &c);
    if (b(r, c) < 0) b = -b;
    basis.push_back(b);
  }
  return basis;
}

/// Distance of a matrix from the span of a Frobenius-orthonormal basis.
inline double span_residual(const Mat& a, const std::vector<Mat>& basis) {
  Mat r = a;
  for (const auto& b : basis) r -= (b.array() * a.array()).sum() * b;
  return r.norm();
}

/// Principal angles between two Frobenius-orthonormal matrix families.
inline std::vector<double> matrix_span_angles(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  if (a.empty()) return {};
  const Eigen::Index d = a.front().size();
  Mat am(d, static_cast<Eigen::Index>(a.size())), bm(d, static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) am.col(static_cast<Eigen::Index>(i)) = flatten(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) bm.col(static_cast<Eigen::Index>(i)) = flatten(b[i]);
  if (a.size() > b.size()) std::swap(am, bm);
  return principal_angles(am, bm, Vec::Ones(d));
}

}  // namespace holab::linalg
