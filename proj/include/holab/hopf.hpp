#pragma once

#include "holab/ambient.hpp"
#include "holab/immersion.hpp"
#include "holab/submanifold.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace holab {

namespace detail {

inline void require_curved(const AmbientSpace& s) {
  if (!s.curved()) throw Error(ErrorKind::UnsupportedModel, "operation needs c = 4 or c = -4");
}

}  // namespace detail

/// Horizontal part of v at the total-space point z: removes the position and
/// Hopf (Jz) components. Both have <., .> = eps = +-1, hence the division.
inline Vec horizontal_project(const AmbientSpace& s, const Vec& z, const Vec& v) {
  detail::require_curved(s);
  check_dim(s, z);
  check_dim(s, v);
  const Vec g = s.metric_diag();
  const Vec jz = apply_J(z);
  const double zz = inner(g, z, z), jj = inner(g, jz, jz);
  return v - (inner(g, v, z) / zz) * z - (inner(g, v, jz) / jj) * jz;
}

/// Hopf vector J(eta) = Jz at a total-space point.
inline Vec hopf_vector(const AmbientSpace& s, const Vec& z) {
  detail::require_curved(s);
  return apply_J(s, z);
}

/// Differential of the Hopf projection in the affine chart w_i = z_i / z_0
/// (i >= 1), returned as interleaved complex coordinates of length 2n.
inline Vec affine_chart_differential(const Vec& z, const Vec& v) {
  const Eigen::Index nc = z.size() / 2;
  const std::complex<double> z0(z[0], z[1]), v0(v[0], v[1]);
  Vec out(2 * (nc - 1));
  for (Eigen::Index i = 1; i < nc; ++i) {
    const std::complex<double> zi(z[2 * i], z[2 * i + 1]), vi(v[2 * i], v[2 * i + 1]);
    const std::complex<double> d = (vi * z0 - zi * v0) / (z0 * z0);
    out[2 * (i - 1)] = d.real();
    out[2 * (i - 1) + 1] = d.imag();
  }
  return out;
}

/// Pull-back M^ = pi^{-1}(M): (u, theta) -> e^{i theta} z(u), an immersion of
/// dimension k + 1 into the Hopf total space. The fibre coordinate is last.
inline Immersion pullback(const Immersion& m) {
  detail::require_curved(m.space());
  if (m.target() != Target::Base) throw Error(ErrorKind::InvalidInput, "pull-back needs an immersion into the base");
  const AmbientSpace s = m.space();
  const int k = m.k();
  const double eps = s.total_space_norm();
  const Vec g = s.metric_diag();
  auto check_rep = [s, g, eps](const Vec& z) {
    const double zz = inner(g, z, z);
    if (std::abs(zz - eps) > 1e-10)
      throw Error(ErrorKind::InvalidRepresentative,
                  "representative is off the total space: <z,z> = " + std::to_string(zz));
  };
  RealMap real = [m, k, check_rep](const Vec& x) {
    const Vec z = m.real_map()(x.head(k));
    check_rep(z);
    const double c = std::cos(x[k]), sn = std::sin(x[k]);
    Vec r(z.size());
    for (Eigen::Index i = 0; i + 1 < z.size(); i += 2) {
      r[i] = c * z[i] - sn * z[i + 1];
      r[i + 1] = sn * z[i] + c * z[i + 1];
    }
    return r;
  };
  DualMap dual;
  if (m.has_dual())
    dual = [m, k, check_rep](const std::vector<Dual2>& x) {
      const std::vector<Dual2> head(x.begin(), x.begin() + k);
      const std::vector<Dual2> z = m.dual_map()(head);
      Vec zv(static_cast<Eigen::Index>(z.size()));
      for (std::size_t i = 0; i < z.size(); ++i) zv[static_cast<Eigen::Index>(i)] = z[i].v;
      check_rep(zv);
      const Dual2 c = cos(x[static_cast<std::size_t>(k)]), sn = sin(x[static_cast<std::size_t>(k)]);
      std::vector<Dual2> r(z.size());
      for (std::size_t i = 0; i + 1 < z.size(); i += 2) {
        r[i] = c * z[i] - sn * z[i + 1];
        r[i + 1] = sn * z[i] + c * z[i + 1];
      }
      return r;
    };
  Immersion up(s, k + 1, Target::TotalSpace, std::move(real), std::move(dual), m.name() + "^");
  return m.mode() == JetMode::Analytic ? up : up.with_mode(JetMode::FiniteDifference, m.fd_step());
}

/// Parameter point of the pull-back over u at fibre angle theta.
inline Vec lifted_param(const Vec& u, double theta = 0.0) {
  Vec x(u.size() + 1);
  x << u, theta;
  return x;
}

/// Horizontal lift of the coordinate vector d/du_a on the pull-back, in the
/// pull-back's own jets: d_a F - w_a d_theta F.
struct PullbackCoords {
  Mat horizontal;  // real_dim x k
  Vec w;           // k
  Vec hopf;        // d_theta F
};

inline PullbackCoords pullback_coords(const LocalGeometry& up) {
  const int k = up.k() - 1;
  PullbackCoords pc;
  pc.hopf = up.jet.d1.col(k);
  const double hh = inner(up.g, pc.hopf, pc.hopf);
  pc.w.resize(k);
  pc.horizontal.resize(pc.hopf.size(), k);
  for (int a = 0; a < k; ++a) {
    pc.w[a] = inner(up.g, Vec(up.jet.d1.col(a)), pc.hopf) / hh;
    pc.horizontal.col(a) = up.jet.d1.col(a) - pc.w[a] * pc.hopf;
  }
  return pc;
}

/// Max-norm residuals of the lift identities relating M and its pull-back:
/// connection lift, fibre derivative, second fundamental form, shape operator
/// plus normal connection, and shape operator along the Hopf vector plus the
/// fibre derivative of lifted normals.
struct LiftResidual {
  double connection_lift = 0.0;  // nabla'_{X^} Y^ = (nablabar_X Y)^ + <X, JY>/eps J eta
  double fibre_derivative = 0.0;  // nabla'_{J eta} X^ = nabla'_{X^} J eta = J X^
  double alpha_lift = 0.0;        // alpha^(X^, Y^) = alpha(X, Y)^
  double shape_lift = 0.0;        // A^_xi X^ = (A_xi X)^ - <X, J xi>/eps J eta ; nabla^perp lifts
  double hopf_shape = 0.0;        // A^_xi J eta = -(J xi)^T ; nabla^perp_{J eta} xi^ = (J xi)^perp

  double max() const { return std::max({connection_lift, fibre_derivative, alpha_lift, shape_lift, hopf_shape}); }
};

inline LiftResidual check_lift_identities(const Immersion& m, const Vec& u) {
  detail::require_curved(m.space());
  const Immersion mh = pullback(m);
  const FundamentalData down = fundamental_data(m, u);
  const FundamentalData up = fundamental_data(mh, lifted_param(u));
  const LocalGeometry& gd = down.frame.geo;
  const LocalGeometry& gu = up.frame.geo;
  const Vec& g = gd.g;
  const int k = m.k();
  const double eps = m.space().total_space_norm();
  const Vec z = gd.jet.value;
  const Vec jz = apply_J(z);
  const PullbackCoords pc = pullback_coords(gu);
  const double hh = inner(g, pc.hopf, pc.hopf);
  auto to_total = [&](const Vec& v) { return Vec(v - (inner(g, v, z) / eps) * z); };
  auto dirs = [&](int a) {  // (u, theta)-direction of the horizontal lift of d/du_a
    Vec d = Vec::Zero(k + 1);
    d[a] = 1.0;
    d[k] = -pc.w[a];
    return d;
  };
  auto second = [&](const Vec& dx, int col) {  // derivative of d1.col(col) along dx
    Vec r = Vec::Zero(z.size());
    for (int c = 0; c <= k; ++c) r += dx[c] * gu.jet.second(col, c);
    return r;
  };
  auto dw = [&](const Vec& dx, int b) {  // derivative of w_b along dx
    const Vec fb = gu.jet.d1.col(b);
    const Vec dfb = second(dx, b), dft = second(dx, k);
    return (inner(g, dfb, pc.hopf) + inner(g, fb, dft)) / hh - pc.w[b] * 2.0 * inner(g, dft, pc.hopf) / hh;
  };
  const Mat ph = Mat::Identity(z.size(), z.size()) - linalg::projector(gd.extras, g);

  LiftResidual r;
  for (int a = 0; a < k; ++a) {
    const Vec da = dirs(a);
    const Vec xa = gd.coord.col(a);
    for (int b = 0; b < k; ++b) {
      const Vec xb = gd.coord.col(b);
      const Vec flat = second(da, b) - dw(da, b) * pc.hopf - pc.w[b] * second(da, k);
      const Vec nab = to_total(flat);
      const Vec vert = (inner(g, nab, pc.hopf) / hh) * pc.hopf;
      const Vec vert_expect = (inner(g, xa, apply_J(xb)) / eps) * jz;
      const Vec horiz_expect = ph * gd.coord_derivative(a, b);
      r.connection_lift = std::max({r.connection_lift, (vert - vert_expect).norm(), (ph * nab - horiz_expect).norm()});

      r.alpha_lift = std::max(
          r.alpha_lift, (up.alpha_apply(pc.horizontal.col(a), pc.horizontal.col(b)) - gd.alpha_coord(a, b)).norm());
    }
    // fibre derivatives of the horizontal lift and of the Hopf field
    Vec et = Vec::Zero(k + 1);
    et[k] = 1.0;
    const Vec along_fibre =
        to_total(second(et, a) - dw(et, a) * pc.hopf - pc.w[a] * second(et, k));
    const Vec along_lift = to_total(second(da, k));
    const Vec jx = apply_J(xa);
    r.fibre_derivative = std::max({r.fibre_derivative, (along_fibre - jx).norm(), (along_lift - jx).norm()});

    for (int q = 0; q < down.m(); ++q) {
      const Vec xi = down.frame.normal.col(q);
      const Vec lhs = up.shape_apply(xi, pc.horizontal.col(a));
      const Vec rhs = down.shape_apply(xi, xa) - (inner(g, xa, apply_J(xi)) / eps) * jz;
      const Vec conn_up = up.normal_connection(gu.jet.d1.col(a), xi) - pc.w[a] * (gu.p_normal * apply_J(xi));
      const Vec conn_down = down.normal_connection(xa, xi);
      r.shape_lift = std::max({r.shape_lift, (lhs - rhs).norm(), (conn_up - conn_down).norm()});
    }
  }
  for (int q = 0; q < down.m(); ++q) {
    const Vec xi = down.frame.normal.col(q);
    const Vec jxi = apply_J(xi);
    const Vec lhs = up.shape_apply(xi, jz);
    const Vec rhs = -(gd.p_tangent * jxi + (inner(g, jxi, jz) / eps) * jz);
    r.hopf_shape = std::max({r.hopf_shape, (lhs - rhs).norm(), (gu.p_normal * jxi - gd.p_normal * jxi).norm()});
  }
  return r;
}

/// |nabla^perp_{J eta} xi^| for the fibre-wise lift of a normal xi at u: zero
/// for every xi exactly when M is coisotropic.
inline double fibre_normal_derivative(const Immersion& m, const Vec& u, const Vec& xi) {
  const LocalGeometry up = local_geometry(pullback(m), lifted_param(u));
  return (up.p_normal * apply_J(xi)).norm();
}

}  // namespace holab
