#pragma once

#include "holab/linalg.hpp"
#include "holab/submanifold.hpp"
#include "holab/transport.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace holab {

struct HolonomyConfig {
  std::vector<double> radii{0.1, 0.05, 0.025};
  int plaquettes = 4;        // spokes per coordinate pair and radius
  double rank_tol = 1e-6;    // relative singular-value cutoff
  double abs_floor = 1e-8;   // absolute cutoff (flat bundles give pure round-off)
  int steps = 24;            // RK4 steps per curve piece
  std::uint64_t seed = 7;
  std::vector<double> periods;  // per coordinate, 0 = not periodic
  bool period_loops = true;
  int max_subdivision = 3;
};

struct InvariantBlock {
  Mat basis;  // columns in the normal frame coordinates
  int dim = 0;
  bool trivial = false;  // the algebra acts as zero on this block
};

struct HolonomyEstimate {
  Vec base;
  Mat normal_frame;              // ambient normal frame the matrices refer to
  std::vector<Mat> generators;   // loop transports
  std::vector<Mat> algebra;      // Frobenius-orthonormal skew basis
  Vec singular_values;
  std::vector<InvariantBlock> blocks;
  bool flat = true;
  double orthogonality = 0.0;
  double skew = 0.0;
  double closure = 0.0;
  int loops = 0;
  int subdivided = 0;
  int skipped_period_loops = 0;

  int dim() const { return static_cast<int>(algebra.size()); }
};

namespace detail {

// Principal log of a near-identity loop transport; false if |G - I| >= 1 or
// the log does not exist.
inline bool near_identity_log(const Mat& g, Mat& out) {
  const double dist = (g - Mat::Identity(g.rows(), g.cols())).norm();
  if (dist >= 1.0) return false;
  return linalg::orthogonal_log(g, out);
}

// Logs (scaled by -1/area) of a counter-clockwise square, subdividing into
// quadrants when the transport is too far from the identity.
inline void square_logs(const Immersion& m, const Vec& u0, const Vec& center, int a, int b, double side,
                        const HolonomyConfig& cfg, int depth, HolonomyEstimate& est, std::vector<Mat>& out) {
  const ParamCurve loop = ParamCurve::lasso(u0, center, a, b, side, cfg.steps);
  const Mat g = loop_transport(m, loop);
  est.generators.push_back(g);
  est.orthogonality = std::max(est.orthogonality, orthogonality_defect(g));
  ++est.loops;
  Mat l;
  if (near_identity_log(g, l)) {
    out.push_back(-l / (side * side));
    return;
  }
  if (depth >= cfg.max_subdivision)
    throw Error(ErrorKind::NonconvergentLog, "loop transport stays too far from the identity after subdivision");
  ++est.subdivided;
  const double q = 0.25 * side;
  const Vec ea = Vec::Unit(u0.size(), a), eb = Vec::Unit(u0.size(), b);
  for (int sa : {-1, 1})
    for (int sb : {-1, 1})
      square_logs(m, u0, center + q * (sa * ea + sb * eb), a, b, 0.5 * side, cfg, depth + 1, est, out);
}

// Split an invariant subspace further using a random symmetric element of
// the commutant of the algebra restricted to it.
inline std::vector<Mat> refine_block(const Mat& e, const std::vector<Mat>& algebra, std::mt19937_64& rng) {
  const Eigen::Index d = e.cols();
  if (d <= 1) return {e};
  std::vector<Mat> restricted;
  for (const auto& a : algebra) restricted.push_back(e.transpose() * a * e);
  // unknowns: upper triangle of a symmetric d x d matrix
  std::vector<std::pair<Eigen::Index, Eigen::Index>> idx;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i; j < d; ++j) idx.emplace_back(i, j);
  const Eigen::Index nu = static_cast<Eigen::Index>(idx.size());
  Mat sys(static_cast<Eigen::Index>(restricted.size()) * d * d, nu);
  sys.setZero();
  for (Eigen::Index c = 0; c < nu; ++c) {
    Mat s = Mat::Zero(d, d);
    s(idx[c].first, idx[c].second) = 1.0;
    s(idx[c].second, idx[c].first) = 1.0;
    for (std::size_t r = 0; r < restricted.size(); ++r) {
      const Mat com = s * restricted[r] - restricted[r] * s;
      sys.block(static_cast<Eigen::Index>(r) * d * d, c, d * d, 1) = linalg::flatten(com);
    }
  }
  Eigen::JacobiSVD<Mat> svd(sys, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double cut = 1e-8 * std::max(1.0, sv.size() ? sv[0] : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > cut) ++rank;
  const Eigen::Index nullity = nu - rank;
  if (nullity <= 1) return {e};
  std::normal_distribution<double> nd;
  Vec coef = Vec::Zero(nu);
  for (Eigen::Index c = rank; c < nu; ++c) coef += nd(rng) * svd.matrixV().col(c);
  Mat s = Mat::Zero(d, d);
  for (Eigen::Index c = 0; c < nu; ++c) {
    s(idx[c].first, idx[c].second) = coef[c];
    s(idx[c].second, idx[c].first) = coef[c];
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  const Vec& ev = es.eigenvalues();
  const double scale = std::max(1e-300, ev.cwiseAbs().maxCoeff());
  std::vector<Mat> out;
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= d; ++i) {
    if (i == d || ev[i] - ev[i - 1] > 1e-6 * scale) {
      out.push_back(e * es.eigenvectors().middleCols(start, i - start));
      start = i;
    }
  }
  return out;
}

}  // namespace detail

/// Decompose the normal space into invariant subspaces of a skew algebra:
/// eigenspaces of the Casimir element -sum A_k^2, split further by the
/// symmetric commutant when an eigenvalue is degenerate. The kernel (where
/// the algebra acts trivially) is kept as one block.
inline std::vector<InvariantBlock> invariant_blocks(const std::vector<Mat>& algebra, Eigen::Index m,
                                                    std::uint64_t seed) {
  std::vector<InvariantBlock> out;
  if (m == 0) return out;
  Mat cas = Mat::Zero(m, m);
  for (const auto& a : algebra) cas -= a * a;
  cas = linalg::sym(cas);
  Eigen::SelfAdjointEigenSolver<Mat> es(cas);
  const Vec& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double tol = 1e-6 * scale;
  std::mt19937_64 rng(seed);
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= m; ++i) {
    if (i < m && ev[i] - ev[i - 1] <= tol) continue;
    const Mat e = es.eigenvectors().middleCols(start, i - start);
    const bool trivial = std::abs(ev[start]) <= tol && std::abs(ev[i - 1]) <= tol;
    if (trivial) {
      out.push_back({e, static_cast<int>(e.cols()), true});
    } else {
      for (const Mat& piece : detail::refine_block(e, algebra, rng))
        out.push_back({piece, static_cast<int>(piece.cols()), false});
    }
    start = i;
  }
  return out;
}

/// Closure defect: largest distance of a bracket [A_i, A_j] from the span.
inline double closure_residual(const std::vector<Mat>& basis) {
  double r = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      const Mat br = basis[i] * basis[j] - basis[j] * basis[i];
      r = std::max(r, linalg::span_residual(br, basis));
    }
  return r;
}

/// Estimate of the restricted normal holonomy algebra at u0 (plus period
/// loops of closed curves when enabled). All matrices refer to the normal
/// frame of M at u0.
inline HolonomyEstimate holonomy_algebra(const Immersion& m, const Vec& u0, const HolonomyConfig& cfg = {}) {
  for (double r : cfg.radii)
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidInput, "radius schedule entries must be positive");
  HolonomyEstimate est;
  est.base = u0;
  const NormalCurvature nc0 = normal_curvature(m, u0);
  const FrameData& f0 = nc0.data.frame;
  est.normal_frame = f0.normal;
  const Eigen::Index nm = f0.m();
  const int k = m.k();
  std::vector<Mat> collected = nc0.pairs();

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      const double offset = unif(rng);
      const Vec ea = Vec::Unit(k, a), eb = Vec::Unit(k, b);
      for (double r : cfg.radii) {
        detail::square_logs(m, u0, u0, a, b, r, cfg, 0, est, collected);
        for (int p = 0; p < cfg.plaquettes; ++p) {
          const double phi = 2 * std::numbers::pi * (p + offset) / cfg.plaquettes;
          const Vec c = u0 + 2.0 * r * (std::cos(phi) * ea + std::sin(phi) * eb);
          // curvature at the spoke end, conjugated back to u0
          const ParamCurve spoke = ParamCurve::segment(u0, c, cfg.steps);
          const Mat moved = transport_frame(m, spoke, f0.normal, Bundle::Normal);
          const NormalCurvature ncc = normal_curvature(m, c);
          const Mat t = ncc.data.frame.normal.transpose() * ncc.data.frame.geo.g.asDiagonal() * moved;
          for (const Mat& rc : ncc.pairs()) collected.push_back(t.transpose() * rc * t);
          detail::square_logs(m, u0, c, a, b, r, cfg, 0, est, collected);
        }
      }
    }
  if (cfg.period_loops)
    for (int a = 0; a < k && a < static_cast<int>(cfg.periods.size()); ++a) {
      if (cfg.periods[static_cast<std::size_t>(a)] <= 0.0) continue;
      const ParamCurve loop = ParamCurve::period_loop(u0, a, cfg.periods[static_cast<std::size_t>(a)]);
      const Mat g = loop_transport(m, loop);
      est.generators.push_back(g);
      est.orthogonality = std::max(est.orthogonality, orthogonality_defect(g));
      ++est.loops;
      Mat l;
      if (linalg::orthogonal_log(g, l))
        collected.push_back(l);
      else
        ++est.skipped_period_loops;
    }

  for (const Mat& c : collected) est.skew = std::max(est.skew, c.size() ? (c + c.transpose()).cwiseAbs().maxCoeff() : 0.0);
  std::vector<Mat> sk;
  for (const Mat& c : collected) sk.push_back(linalg::skew(c));
  est.algebra = linalg::matrix_span(sk, nm, cfg.rank_tol, cfg.abs_floor, &est.singular_values);
  est.flat = est.algebra.empty();
  est.closure = closure_residual(est.algebra);
  est.blocks = invariant_blocks(est.algebra, nm, cfg.seed);
  return est;
}

/// -log(loop transport)/area for the centred counter-clockwise square of the
/// given side in the (a, b) plane; tends to R_perp(d_a, d_b) as side -> 0.
inline Mat plaquette_curvature(const Immersion& m, const Vec& u0, int a, int b, double side, int steps = 24) {
  const Mat g = loop_transport(m, ParamCurve::lasso(u0, u0, a, b, side, steps));
  Mat l;
  if (!detail::near_identity_log(g, l))
    throw Error(ErrorKind::NonconvergentLog, "plaquette transport too far from the identity");
  return -l / (side * side);
}

/// Quadrilinear form <R(xi1, xi2) xi3, xi4> = -1/2 tr([A1, A2] [A3, A4]) on the
/// normal space of a pull-back, built from its shape operators.
struct ScriptR {
  FundamentalData data;
  int m = 0;

  Mat shape(const Vec& x) const {
    Mat s = Mat::Zero(data.kt(), data.kt());
    for (int a = 0; a < m; ++a) s += x[a] * data.shape_op[static_cast<std::size_t>(a)];
    return s;
  }
  static Mat bracket(const Mat& x, const Mat& y) { return x * y - y * x; }

  double value(const Vec& x1, const Vec& x2, const Vec& x3, const Vec& x4) const {
    return -0.5 * (bracket(shape(x1), shape(x2)) * bracket(shape(x3), shape(x4))).trace();
  }
  double value(int i, int j, int k, int l) const {
    return value(Vec::Unit(m, i), Vec::Unit(m, j), Vec::Unit(m, k), Vec::Unit(m, l));
  }
  /// Operator R(x1, x2) on normal coordinates: entry (b, a) = <R(x1,x2) e_a, e_b>.
  Mat op(const Vec& x1, const Vec& x2) const {
    Mat r(m, m);
    const Mat c = bracket(shape(x1), shape(x2));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        r(b, a) = -0.5 * (c * bracket(data.shape_op[static_cast<std::size_t>(a)],
                                      data.shape_op[static_cast<std::size_t>(b)])).trace();
    return r;
  }
  double sectional(const Vec& xi, const Vec& zeta) const { return value(xi, zeta, zeta, xi); }
  double commutator_norm(const Vec& xi, const Vec& zeta) const { return bracket(shape(xi), shape(zeta)).norm(); }

  std::vector<Mat> image() const {
    std::vector<Mat> out;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) out.push_back(op(Vec::Unit(m, i), Vec::Unit(m, j)));
    return out;
  }
};

struct ScriptRProperties {
  double antisymmetry = 0.0;  // (i)
  double skew = 0.0;          // (ii)
  double pair_symmetry = 0.0; // (iii)
  double bianchi = 0.0;       // (iv)
  double image_angle = 0.0;   // (v) largest principal angle between the images
  int image_dim = 0;
  int curvature_image_dim = 0;
  double max_sectional = 0.0;  // over frame pairs
};

inline ScriptR script_R_tensor(const Immersion& mhat, const Vec& p) {
  if (mhat.target() != Target::TotalSpace)
    throw Error(ErrorKind::Precondition, "the tensor is defined on a pull-back immersion");
  ScriptR r;
  r.data = fundamental_data(mhat, p);
  r.m = r.data.m();
  return r;
}

inline ScriptRProperties script_R_properties(const ScriptR& t, const NormalCurvature& rhat) {
  ScriptRProperties pr;
  const int m = t.m;
  std::vector<double> v(static_cast<std::size_t>(m * m * m * m));
  auto at = [m, &v](int i, int j, int k, int l) -> double& {
    return v[static_cast<std::size_t>(((i * m + j) * m + k) * m + l)];
  };
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) at(i, j, k, l) = t.value(i, j, k, l);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          pr.antisymmetry = std::max(pr.antisymmetry, std::abs(at(i, j, k, l) + at(j, i, k, l)));
          pr.skew = std::max(pr.skew, std::abs(at(i, j, k, l) + at(i, j, l, k)));
          pr.pair_symmetry = std::max(pr.pair_symmetry, std::abs(at(i, j, k, l) - at(k, l, i, j)));
          pr.bianchi = std::max(pr.bianchi, std::abs(at(i, j, k, l) + at(j, k, i, l) + at(k, i, j, l)));
        }
  pr.max_sectional = m > 1 ? -std::numeric_limits<double>::infinity() : 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) pr.max_sectional = std::max(pr.max_sectional, at(i, j, j, i));
  const std::vector<Mat> a = linalg::matrix_span(t.image(), m, 1e-8, 1e-10);
  const std::vector<Mat> b = linalg::matrix_span(rhat.pairs(), m, 1e-8, 1e-10);
  pr.image_dim = static_cast<int>(a.size());
  pr.curvature_image_dim = static_cast<int>(b.size());
  pr.image_angle = pr.image_dim == pr.curvature_image_dim ? linalg::max_angle(linalg::matrix_span_angles(a, b))
                                                          : std::numbers::pi / 2;
  return pr;
}

}  // namespace holab
