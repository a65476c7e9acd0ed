#pragma once

#include "holab/ambient.hpp"
#include "holab/immersion.hpp"
#include "holab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace holab {

/// Everything the frame/connection machinery needs at one parameter point.
///
/// For an immersion into CP^n or CH^n the representative z(u) is a local
/// section of the pull-back; tangent vectors of M are represented by their
/// horizontal lifts at z(u) and normal vectors by horizontal vectors normal to
/// those. The gauge one-form `gauge` (w_a = <d_a z, Jz>/<Jz, Jz>) records how
/// far the section is from horizontal; it enters every covariant derivative.
struct LocalGeometry {
  AmbientSpace space;
  Target target = Target::Base;
  Vec g;  // metric diagonal
  Vec u;
  Jet jet;
  Mat coord;   // coordinate tangent vectors (horizontal lifts for a curved base)
  Vec gauge;   // w_a, zero unless target is a curved base
  Mat extras;  // directions removed besides the tangent space: [z, Jz], [z] or none
  Mat span_all;
  Mat p_normal;
  Mat p_tangent;

  int k() const { return static_cast<int>(jet.d1.cols()); }
  bool gauged() const { return target == Target::Base && space.curved(); }
  double gauge_rate(const Vec& du) const { return gauge.dot(du); }

  Mat extras_derivative(const Vec& du) const {
    const Vec dz = jet.d1 * du;
    if (target == Target::TotalSpace) return dz;
    if (space.curved()) {
      Mat r(dz.size(), 2);
      r.col(0) = dz;
      r.col(1) = apply_J(dz);
      return r;
    }
    return Mat(dz.size(), 0);
  }

  Mat span_derivative(const Vec& du) const {
    Mat r(span_all.rows(), span_all.cols());
    r << jet.d1_derivative(du), extras_derivative(du);
    return r;
  }

  /// d/dt of the normal projector when u moves with velocity du.
  Mat normal_projector_derivative(const Vec& du) const {
    return -linalg::projector_derivative(span_all, span_derivative(du), g);
  }

  /// d/dt of the (horizontal) tangent projector.
  Mat tangent_projector_derivative(const Vec& du) const {
    Mat d = linalg::projector_derivative(span_all, span_derivative(du), g);
    if (extras.cols() > 0) d -= linalg::projector_derivative(extras, extras_derivative(du), g);
    return d;
  }

  /// Second fundamental form on coordinate vectors (ambient normal vector).
  Vec alpha_coord(int a, int b) const {
    Vec v = jet.second(a, b);
    if (gauged()) v -= gauge[b] * apply_J(Vec(jet.d1.col(a))) + gauge[a] * apply_J(Vec(jet.d1.col(b)));
    return p_normal * v;
  }

  /// Flat derivative of the coordinate field h_b along h_a, before projection.
  Vec coord_derivative(int a, int b) const {
    Vec v = jet.second(a, b);
    if (gauged()) v -= gauge[b] * apply_J(Vec(jet.d1.col(a))) + gauge[a] * apply_J(Vec(coord.col(b)));
    return v;
  }
};

inline LocalGeometry local_geometry(const Immersion& m, const Vec& u) {
  LocalGeometry geo;
  geo.space = m.space();
  geo.target = m.target();
  geo.g = geo.space.metric_diag();
  geo.u = u;
  geo.jet = m.jet(u);
  const Vec& z = geo.jet.value;
  const Eigen::Index d = z.size();
  const int k = m.k();

  if (geo.space.curved()) {
    const double zz = inner(geo.g, z, z);
    if (std::abs(zz - geo.space.total_space_norm()) > 1e-10)
      throw Error(ErrorKind::InvalidRepresentative,
                  "representative has <z,z> = " + std::to_string(zz) + " at the requested point");
  }

  geo.gauge = Vec::Zero(k);
  if (geo.target == Target::TotalSpace) {
    geo.extras = z;
    geo.coord = geo.jet.d1;
  } else if (geo.space.curved()) {
    geo.extras.resize(d, 2);
    geo.extras.col(0) = z;
    geo.extras.col(1) = apply_J(z);
    const Vec jz = geo.extras.col(1);
    const double jj = inner(geo.g, jz, jz);
    for (int a = 0; a < k; ++a) geo.gauge[a] = inner(geo.g, Vec(geo.jet.d1.col(a)), jz) / jj;
    const Mat q = linalg::projector(geo.extras, geo.g);
    geo.coord = geo.jet.d1 - q * geo.jet.d1;
  } else {
    geo.extras = Mat(d, 0);
    geo.coord = geo.jet.d1;
  }

  Eigen::JacobiSVD<Mat> svd(geo.coord);
  const Vec& s = svd.singularValues();
  const Eigen::Index expect = geo.coord.cols();
  if (s.size() < expect || s[expect - 1] <= 0.0 || s[0] / s[expect - 1] > 1e8)
    throw Error(ErrorKind::DegenerateImmersion, "Jacobian is rank deficient (condition number above 1e8)");

  geo.span_all.resize(d, geo.jet.d1.cols() + geo.extras.cols());
  geo.span_all << geo.jet.d1, geo.extras;
  geo.p_normal = Mat::Identity(d, d) - linalg::projector(geo.span_all, geo.g);
  geo.p_tangent = linalg::projector(geo.span_all, geo.g);
  if (geo.extras.cols() > 0) geo.p_tangent -= linalg::projector(geo.extras, geo.g);
  return geo;
}

/// Orthonormal tangent and normal frames at a point. For a Lorentzian
/// pull-back the first tangent vector is the (timelike) Hopf direction.
struct FrameData {
  LocalGeometry geo;
  Vec point;
  Mat tangent;       // real_dim x kt
  Vec tangent_sign;  // +1 / -1 per tangent vector
  Mat param_dirs;    // k x kt, tangent = coord * param_dirs
  Mat normal;        // real_dim x m
  Mat j_frame;       // J in the basis [tangent, normal] (projected)

  int kt() const { return static_cast<int>(tangent.cols()); }
  int m() const { return static_cast<int>(normal.cols()); }
  const Vec& g() const { return geo.g; }
  double ip(const Vec& a, const Vec& b) const { return inner(geo.g, a, b); }

  Vec tangent_coords(const Vec& x) const {
    Vec c(kt());
    for (int i = 0; i < kt(); ++i) c[i] = tangent_sign[i] * ip(x, tangent.col(i));
    return c;
  }
  Vec normal_coords(const Vec& xi) const { return normal.transpose() * geo.g.asDiagonal() * xi; }

  /// Parameter-space direction that realises the ambient tangent vector x.
  Vec param_direction(const Vec& x) const { return param_dirs * tangent_coords(x); }

  /// Gram residual of [tangent, normal] against diag(tangent_sign, 1).
  double gram_residual() const {
    Mat f(tangent.rows(), kt() + m());
    f << tangent, normal;
    Mat target = Mat::Identity(kt() + m(), kt() + m());
    for (int i = 0; i < kt(); ++i) target(i, i) = tangent_sign[i];
    return (f.transpose() * geo.g.asDiagonal() * f - target).cwiseAbs().maxCoeff();
  }
};

namespace detail {

// Gram-Schmidt of parameter directions under the pulled-back metric.
inline void gram_schmidt_params(const Mat& gram, const std::vector<Vec>& candidates, int want, Mat& dirs,
                                Vec& signs) {
  const Eigen::Index k = gram.rows();
  std::vector<Vec> out;
  std::vector<double> sg;
  const double scale = gram.cwiseAbs().maxCoeff();
  for (const Vec& c : candidates) {
    if (static_cast<int>(out.size()) == want) break;
    Vec v = c;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < out.size(); ++j) v -= sg[j] * out[j].dot(gram * v) * out[j];
    const double n2 = v.dot(gram * v);
    if (std::abs(n2) < 1e-14 * scale * std::max(1.0, c.squaredNorm())) continue;
    sg.push_back(n2 > 0 ? 1.0 : -1.0);
    out.push_back(v / std::sqrt(std::abs(n2)));
  }
  if (static_cast<int>(out.size()) != want)
    throw Error(ErrorKind::DegenerateImmersion, "could not build a tangent frame");
  dirs.resize(k, want);
  signs.resize(want);
  for (int i = 0; i < want; ++i) {
    dirs.col(i) = out[static_cast<std::size_t>(i)];
    signs[i] = sg[static_cast<std::size_t>(i)];
  }
}

}  // namespace detail

inline FrameData frame_from_geometry(LocalGeometry geo) {
  FrameData f;
  f.point = geo.jet.value;
  const Mat& c = geo.coord;
  const int k = geo.k();
  const Mat gram = c.transpose() * geo.g.asDiagonal() * c;

  std::vector<Vec> cands;
  if (geo.target == Target::TotalSpace) {
    // Hopf direction first: solve coord * d = Jz in the least-squares sense.
    const Vec jz = apply_J(f.point);
    cands.push_back(c.colPivHouseholderQr().solve(jz));
  }
  for (int a = 0; a < k; ++a) cands.push_back(Vec::Unit(k, a));
  detail::gram_schmidt_params(gram, cands, k, f.param_dirs, f.tangent_sign);
  f.tangent = c * f.param_dirs;

  const Eigen::Index d = f.point.size();
  const Eigen::Index m = d - k - geo.extras.cols();
  f.normal = m > 0 ? linalg::projector_range(geo.p_normal, geo.g, m) : Mat(d, 0);

  Mat all(d, k + m);
  all << f.tangent, f.normal;
  Vec signs(k + m);
  signs << f.tangent_sign, Vec::Ones(m);
  f.j_frame = signs.asDiagonal() * all.transpose() * geo.g.asDiagonal() * apply_J(all);
  f.geo = std::move(geo);
  return f;
}

inline FrameData frame_at(const Immersion& m, const Vec& u) { return frame_from_geometry(local_geometry(m, u)); }

/// Normal frame at u rotated (orthogonal Procrustes) to best match `reference`.
inline Mat aligned_normal_frame(const LocalGeometry& geo, const Mat& reference) {
  const Mat p = geo.p_normal * reference;
  const Mat raw = linalg::g_orthonormalize(p, geo.g);
  return raw * linalg::procrustes(raw.transpose() * geo.g.asDiagonal() * reference);
}

/// Second fundamental form, shape operators and normal-connection
/// coefficients in the frame of `frame`.
struct FundamentalData {
  FrameData frame;
  std::vector<std::vector<Vec>> alpha;  // alpha[i][j] = alpha(e_i, e_j)
  std::vector<Mat> shape;               // bilinear: shape[a](i,j) = <alpha(e_i,e_j), xi_a>
  std::vector<Mat> shape_op;            // operator matrices diag(eps) * shape[a]
  std::vector<Mat> gamma_perp;          // gamma_perp[i](b,a) = <nabla_perp_{e_i} xi_a, xi_b>

  int kt() const { return frame.kt(); }
  int m() const { return frame.m(); }

  Vec alpha_apply(const Vec& x, const Vec& y) const {
    const Vec cx = frame.tangent_coords(x), cy = frame.tangent_coords(y);
    Vec r = Vec::Zero(frame.point.size());
    for (int i = 0; i < kt(); ++i)
      for (int j = 0; j < kt(); ++j) r += cx[i] * cy[j] * alpha[i][j];
    return r;
  }

  /// <alpha(x, y), xi>
  double shape_bilinear(const Vec& xi, const Vec& x, const Vec& y) const { return frame.ip(alpha_apply(x, y), xi); }

  /// Operator matrix of A_xi in the tangent frame for an arbitrary normal xi.
  Mat shape_operator(const Vec& xi) const {
    const Vec c = frame.normal_coords(xi);
    Mat r = Mat::Zero(kt(), kt());
    for (int a = 0; a < m(); ++a) r += c[a] * shape_op[static_cast<std::size_t>(a)];
    return r;
  }

  /// A_xi x as an ambient tangent vector.
  Vec shape_apply(const Vec& xi, const Vec& x) const {
    return frame.tangent * (shape_operator(xi) * frame.tangent_coords(x));
  }

  /// nabla_perp_x xi for the frame-field extension, as ambient normal vector.
  Vec normal_connection(const Vec& x, const Vec& xi) const {
    const Vec cx = frame.tangent_coords(x), cxi = frame.normal_coords(xi);
    Vec r = Vec::Zero(m());
    for (int i = 0; i < kt(); ++i) r += cx[i] * gamma_perp[static_cast<std::size_t>(i)] * cxi;
    return frame.normal * r;
  }

  double alpha_norm() const {
    double s = 0.0;
    for (const auto& row : alpha)
      for (const auto& v : row) s = std::max(s, v.norm());
    return s;
  }
};

/// Connection matrix of the normal bundle along the parameter direction du,
/// acting on the columns of a normal frame `nf` (entry (b, a) = <nabla xi_a, xi_b>).
inline Mat normal_connection_matrix(const LocalGeometry& geo, const Mat& nf, const Vec& du) {
  const Mat dp = geo.normal_projector_derivative(du);
  Mat v = geo.p_normal * (dp * nf - geo.gauge_rate(du) * apply_J(nf));
  return nf.transpose() * geo.g.asDiagonal() * v;
}

inline FundamentalData fundamental_from_frame(FrameData frame) {
  FundamentalData fd;
  const LocalGeometry& geo = frame.geo;
  const int k = geo.k();
  const int kt = frame.kt(), m = frame.m();
  std::vector<std::vector<Vec>> ac(static_cast<std::size_t>(k), std::vector<Vec>(static_cast<std::size_t>(k)));
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) {
      ac[a][b] = geo.alpha_coord(a, b);
      ac[b][a] = ac[a][b];
    }
  const Mat& e = frame.param_dirs;
  fd.alpha.assign(static_cast<std::size_t>(kt), std::vector<Vec>(static_cast<std::size_t>(kt)));
  for (int i = 0; i < kt; ++i)
    for (int j = 0; j < kt; ++j) {
      Vec v = Vec::Zero(frame.point.size());
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) v += e(a, i) * e(b, j) * ac[a][b];
      fd.alpha[i][j] = v;
    }
  for (int a = 0; a < m; ++a) {
    Mat s(kt, kt);
    for (int i = 0; i < kt; ++i)
      for (int j = 0; j < kt; ++j) s(i, j) = frame.ip(fd.alpha[i][j], frame.normal.col(a));
    fd.shape.push_back(s);
    fd.shape_op.push_back(frame.tangent_sign.asDiagonal() * s);
  }
  for (int i = 0; i < kt; ++i) fd.gamma_perp.push_back(normal_connection_matrix(geo, frame.normal, e.col(i)));
  fd.frame = std::move(frame);
  return fd;
}

inline FundamentalData fundamental_data(const Immersion& m, const Vec& u) { return fundamental_from_frame(frame_at(m, u)); }

/// Curvature of the ambient space in which the immersion is taken: the
/// complex space form (base) or the Hopf total space as a real space form.
inline Vec ambient_curvature(const LocalGeometry& geo, const Vec& x, const Vec& y, const Vec& z) {
  if (geo.target == Target::TotalSpace) {
    const double kk = geo.space.total_space_curvature();
    return kk * (inner(geo.g, y, z) * x - inner(geo.g, x, z) * y);
  }
  return curvature_tensor(geo.space, x, y, z);
}

/// Normal curvature R_perp(e_i, e_j) for all tangent frame pairs, evaluated
/// algebraically from the Ricci equation:
/// <R_perp(X,Y) xi, zeta> = <Rbar(X,Y) xi, zeta> + <[A_xi, A_zeta] X, Y>.
struct NormalCurvature {
  FundamentalData data;
  std::vector<std::vector<Mat>> r;  // r[i][j](b, a) = <R_perp(e_i,e_j) xi_a, xi_b>

  int kt() const { return data.kt(); }
  int m() const { return data.m(); }

  /// Skew matrices R_perp(e_i, e_j), i < j.
  std::vector<Mat> pairs() const {
    std::vector<Mat> out;
    for (int i = 0; i < kt(); ++i)
      for (int j = i + 1; j < kt(); ++j) out.push_back(r[i][j]);
    return out;
  }

  /// R_perp(x, y) for ambient tangent vectors.
  Mat apply(const Vec& x, const Vec& y) const {
    const Vec cx = data.frame.tangent_coords(x), cy = data.frame.tangent_coords(y);
    Mat s = Mat::Zero(m(), m());
    for (int i = 0; i < kt(); ++i)
      for (int j = 0; j < kt(); ++j) s += cx[i] * cy[j] * r[i][j];
    return s;
  }

  double max_norm() const {
    double s = 0.0;
    for (const auto& row : r)
      for (const auto& mm : row) s = std::max(s, mm.size() ? mm.cwiseAbs().maxCoeff() : 0.0);
    return s;
  }

  double skew_residual() const {
    double s = 0.0;
    for (const auto& row : r)
      for (const auto& mm : row) s = std::max(s, mm.size() ? (mm + mm.transpose()).cwiseAbs().maxCoeff() : 0.0);
    return s;
  }
};

inline NormalCurvature normal_curvature_from(FundamentalData fd) {
  NormalCurvature nc;
  const FrameData& f = fd.frame;
  const int kt = f.kt(), m = f.m();
  nc.r.assign(static_cast<std::size_t>(kt), std::vector<Mat>(static_cast<std::size_t>(kt), Mat::Zero(m, m)));
  for (int i = 0; i < kt; ++i)
    for (int j = 0; j < kt; ++j) {
      if (i == j) continue;
      Mat& rr = nc.r[i][j];
      const Vec ei = f.tangent.col(i), ej = f.tangent.col(j);
      for (int a = 0; a < m; ++a) {
        const Vec rb = ambient_curvature(f.geo, ei, ej, Vec(f.normal.col(a)));
        for (int b = 0; b < m; ++b) {
          const Mat com = fd.shape_op[a] * fd.shape_op[b] - fd.shape_op[b] * fd.shape_op[a];
          rr(b, a) = f.ip(rb, f.normal.col(b)) + f.tangent_sign[j] * com(j, i);
        }
      }
    }
  nc.data = std::move(fd);
  return nc;
}

inline NormalCurvature normal_curvature(const Immersion& m, const Vec& u) {
  return normal_curvature_from(fundamental_data(m, u));
}

/// Residuals of the Gauss, Codazzi and Ricci equations.
struct GCRResidual {
  double gauss = 0.0;    // symmetry/Bianchi defect of the curvature obtained from the Gauss equation
  double codazzi = 0.0;  // tangential-normal ambient curvature vs covariant derivative of alpha
  double ricci = 0.0;    // algebraic R_perp vs curvature of the normal connection
};

namespace detail {

// Connection matrices of the frame field u -> aligned_normal_frame(u, reference)
// along each coordinate direction. The field itself is differentiated
// (central differences, step eta), so the matrices at neighbouring points
// belong to one and the same frame field.
inline std::vector<Mat> coordinate_connection(const Immersion& im, const Vec& u, const Mat& reference, double eta) {
  const LocalGeometry geo = local_geometry(im, u);
  const Mat nf = aligned_normal_frame(geo, reference);
  std::vector<Mat> out;
  for (int a = 0; a < geo.k(); ++a) {
    Vec up = u, um = u;
    up[a] += eta;
    um[a] -= eta;
    const Mat fp = aligned_normal_frame(local_geometry(im, up), reference);
    const Mat fm = aligned_normal_frame(local_geometry(im, um), reference);
    const Mat df = (fp - fm) / (2.0 * eta);
    const Mat v = geo.p_normal * (df - geo.gauge[a] * apply_J(nf));
    out.push_back(linalg::skew(nf.transpose() * geo.g.asDiagonal() * v));
  }
  return out;
}

}  // namespace detail

/// Gauss/Codazzi/Ricci residuals at u. The Codazzi and Ricci terms use
/// central differences with step `delta` across neighbouring parameter points
/// (0 selects 1e-4 (1 + |u|)). The covariant derivative of alpha is the
/// van der Waerden-Bortolotti derivative nabla (+) nabla_perp.
inline GCRResidual gauss_codazzi_ricci_residual(const Immersion& im, const Vec& u, double delta = 0.0) {
  if (delta <= 0.0) delta = 1e-4 * (1.0 + u.norm());
  GCRResidual res;
  const NormalCurvature nc = normal_curvature(im, u);
  const FundamentalData& fd = nc.data;
  const FrameData& f = fd.frame;
  const LocalGeometry& geo = f.geo;
  const int kt = f.kt(), k = geo.k(), m = f.m();

  // Gauss: intrinsic curvature from the Gauss equation, then its symmetries.
  std::vector<double> rt(static_cast<std::size_t>(kt * kt * kt * kt));
  auto idx = [kt](int i, int j, int l, int q) { return static_cast<std::size_t>(((i * kt + j) * kt + l) * kt + q); };
  for (int i = 0; i < kt; ++i)
    for (int j = 0; j < kt; ++j)
      for (int l = 0; l < kt; ++l)
        for (int q = 0; q < kt; ++q) {
          const Vec rb = ambient_curvature(geo, f.tangent.col(i), f.tangent.col(j), f.tangent.col(l));
          rt[idx(i, j, l, q)] = f.ip(rb, f.tangent.col(q)) - f.ip(fd.alpha[i][l], fd.alpha[j][q]) +
                                f.ip(fd.alpha[i][q], fd.alpha[j][l]);
        }
  for (int i = 0; i < kt; ++i)
    for (int j = 0; j < kt; ++j)
      for (int l = 0; l < kt; ++l)
        for (int q = 0; q < kt; ++q) {
          res.gauss = std::max(res.gauss, std::abs(rt[idx(i, j, l, q)] + rt[idx(j, i, l, q)]));
          res.gauss = std::max(res.gauss, std::abs(rt[idx(i, j, l, q)] - rt[idx(l, q, i, j)]));
          res.gauss = std::max(res.gauss, std::abs(rt[idx(i, j, l, q)] + rt[idx(j, l, i, q)] + rt[idx(l, i, j, q)]));
        }

  // Codazzi in coordinates.
  auto alpha_at = [&](const Vec& uu) {
    const LocalGeometry gg = local_geometry(im, uu);
    std::vector<Vec> out;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) out.push_back(gg.alpha_coord(a, b));
    return out;
  };
  const std::vector<Vec> a0 = alpha_at(u);
  auto a0c = [&](int a, int b) -> const Vec& { return a0[static_cast<std::size_t>(a * k + b)]; };
  const Mat cgram = geo.coord.transpose() * geo.g.asDiagonal() * geo.coord;
  const auto cl = cgram.fullPivLu();
  // christoffel[a*k+b] = coordinates of nabla_{h_a} h_b
  std::vector<Vec> chr;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      chr.push_back(cl.solve(geo.coord.transpose() * geo.g.asDiagonal() * geo.coord_derivative(a, b)));
  // covariant derivative (nabla* alpha)(a; b, c)
  std::vector<std::vector<Vec>> dalpha(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) {
    Vec up = u, um = u;
    up[a] += delta;
    um[a] -= delta;
    const auto ap = alpha_at(up), am = alpha_at(um);
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c) {
        const std::size_t bc = static_cast<std::size_t>(b * k + c);
        const Vec deriv = (ap[bc] - am[bc]) / (2.0 * delta);
        Vec v = geo.p_normal * (deriv - geo.gauge[a] * apply_J(a0[bc]));
        const Vec& gab = chr[static_cast<std::size_t>(a * k + b)];
        const Vec& gac = chr[static_cast<std::size_t>(a * k + c)];
        for (int d = 0; d < k; ++d) v -= gab[d] * a0c(d, c) + gac[d] * a0c(b, d);
        dalpha[a].push_back(v);
      }
  }
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c) {
        const Vec rb = geo.p_normal * ambient_curvature(geo, geo.coord.col(a), geo.coord.col(b), geo.coord.col(c));
        const Vec lhs = dalpha[a][static_cast<std::size_t>(b * k + c)] - dalpha[b][static_cast<std::size_t>(a * k + c)];
        res.codazzi = std::max(res.codazzi, (rb - lhs).cwiseAbs().maxCoeff());
      }

  // Ricci: curvature of the normal connection by differentiating the
  // connection matrices in an aligned frame, against the algebraic R_perp.
  if (m > 0 && k > 1) {
    const Mat& n0 = f.normal;
    const std::vector<Mat> w0 = detail::coordinate_connection(im, u, n0, delta);
    std::vector<std::vector<Mat>> dw(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a) {
      Vec up = u, um = u;
      up[a] += delta;
      um[a] -= delta;
      const auto wp = detail::coordinate_connection(im, up, n0, delta);
      const auto wm = detail::coordinate_connection(im, um, n0, delta);
      for (int b = 0; b < k; ++b) dw[a].push_back((wp[b] - wm[b]) / (2.0 * delta));
    }
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) {
        const Mat conn = dw[a][b] - dw[b][a] + w0[a] * w0[b] - w0[b] * w0[a];
        const Mat alg = nc.apply(geo.coord.col(a), geo.coord.col(b));
        res.ricci = std::max(res.ricci, (conn - alg).cwiseAbs().maxCoeff());
      }
  }
  return res;
}

}  // namespace holab
