#pragma once

#include "holab/curve.hpp"
#include "holab/hopf.hpp"
#include "holab/submanifold.hpp"

#include <cmath>
#include <string>

namespace holab {

enum class Bundle { Normal, Tangent };

namespace detail {

struct TransportStage {
  LocalGeometry geo;
  Vec vel;             // parameter velocity (of the immersion actually used)
  double dtheta = 0.0;  // fibre-angle rate for lifted transport
};

inline Mat transport_rhs(const TransportStage& s, const Mat& v, Bundle b) {
  const double rate = s.geo.gauge_rate(s.vel);
  if (b == Bundle::Normal) {
    Mat r = s.geo.normal_projector_derivative(s.vel) * v;
    if (rate != 0.0) r += rate * (s.geo.p_normal * apply_J(v));
    return r;
  }
  Mat r = s.geo.tangent_projector_derivative(s.vel) * v;
  if (rate != 0.0) r += rate * (s.geo.p_tangent * apply_J(v));
  return r;
}

// Pull V back onto the bundle and restore its Gram matrix to gram0 (two
// first-order corrections; the defect per step is already O(h^5)).
inline void reproject(const LocalGeometry& geo, Mat& v, Bundle b, const Mat& gram0, const Mat& gram0_inv) {
  v = (b == Bundle::Normal ? geo.p_normal : geo.p_tangent) * v;
  for (int pass = 0; pass < 2; ++pass) {
    const Mat s = v.transpose() * geo.g.asDiagonal() * v;
    v = v * (Mat::Identity(v.cols(), v.cols()) - 0.5 * gram0_inv * (s - gram0));
  }
}

// Classical RK4 along every piece of `curve`. `eval(piece, t, theta)` returns
// the stage data; theta is an optional scalar carried along (the fibre
// angle of a horizontal lift).
template <class Eval>
Mat rk4_transport(const ParamCurve& curve, Eval eval, Mat v, Bundle b, double& theta) {
  const Mat gram0 = [&] {
    const TransportStage s0 = eval(0, 0.0, theta);
    return Mat(v.transpose() * s0.geo.g.asDiagonal() * v);
  }();
  const Mat gram0_inv = gram0.cols() ? Mat(gram0.inverse()) : gram0;
  for (std::size_t pi = 0; pi < curve.pieces.size(); ++pi) {
    const int n = curve.pieces[pi].steps;
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i) {
      const double t = i * h;
      try {
        const TransportStage s1 = eval(pi, t, theta);
        const Mat k1 = transport_rhs(s1, v, b);
        const double q1 = s1.dtheta;
        const TransportStage s2 = eval(pi, t + 0.5 * h, theta + 0.5 * h * q1);
        const Mat k2 = transport_rhs(s2, v + 0.5 * h * k1, b);
        const double q2 = s2.dtheta;
        const TransportStage s3 = q2 == q1 ? s2 : eval(pi, t + 0.5 * h, theta + 0.5 * h * q2);
        const Mat k3 = transport_rhs(s3, v + 0.5 * h * k2, b);
        const double q3 = s3.dtheta;
        const TransportStage s4 = eval(pi, t + h, theta + h * q3);
        const Mat k4 = transport_rhs(s4, v + h * k3, b);
        v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        theta += (h / 6.0) * (q1 + 2.0 * q2 + 2.0 * q3 + s4.dtheta);
        const TransportStage se = eval(pi, t + h, theta);
        reproject(se.geo, v, b, gram0, gram0_inv);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateImmersion) throw;
        throw Error(ErrorKind::DegenerateImmersion, std::string(e.what()) + " (curve piece " + std::to_string(pi) +
                                                        ", t = " + std::to_string(t) + ")");
      }
    }
  }
  return v;
}

}  // namespace detail

/// Transport the columns of v0 (sections of the normal or tangent bundle at
/// the start of the curve) along the curve.
inline Mat transport_frame(const Immersion& m, const ParamCurve& curve, const Mat& v0, Bundle b) {
  auto eval = [&](std::size_t pi, double t, double) {
    const CurvePiece& p = curve.pieces[pi];
    return detail::TransportStage{local_geometry(m, p.pos(t)), p.vel(t), 0.0};
  };
  double theta = 0.0;
  return detail::rk4_transport(curve, eval, v0, b, theta);
}

/// Parallel transport of the normal vector xi0 along the curve.
inline Vec parallel_transport(const Immersion& m, const ParamCurve& curve, const Vec& xi0) {
  const FrameData f = frame_at(m, curve.start());
  check_dim(m.space(), xi0);
  const double off = (xi0 - f.geo.p_normal * xi0).norm();
  if (off > 1e-8 * std::max(1.0, xi0.norm()))
    throw Error(ErrorKind::InvalidInput, "initial vector is not normal (off-normal part " + std::to_string(off) + ")");
  const Mat nf = transport_frame(m, curve, f.normal, Bundle::Normal);
  return nf * f.normal_coords(xi0);
}

namespace detail {

inline void check_closed(const Immersion& m, const ParamCurve& loop) {
  const double gap = (m.eval(loop.end()) - m.eval(loop.start())).norm();
  if (gap > 1e-9) throw Error(ErrorKind::InvalidInput, "curve is not closed (gap " + std::to_string(gap) + ")");
}

}  // namespace detail

/// Normal holonomy of a loop as a matrix in the normal frame at its base
/// point: entry (b, a) = <tau xi_a, xi_b>.
inline Mat loop_transport(const Immersion& m, const ParamCurve& loop) {
  detail::check_closed(m, loop);
  const FrameData f = frame_at(m, loop.start());
  const Mat nf = transport_frame(m, loop, f.normal, Bundle::Normal);
  return f.normal.transpose() * f.geo.g.asDiagonal() * nf;
}

/// Levi-Civita holonomy of a loop in the tangent frame at its base point.
inline Mat loop_transport_tangent(const Immersion& m, const ParamCurve& loop) {
  detail::check_closed(m, loop);
  const FrameData f = frame_at(m, loop.start());
  const Mat tf = transport_frame(m, loop, f.tangent, Bundle::Tangent);
  return f.tangent_sign.asDiagonal() * f.tangent.transpose() * f.geo.g.asDiagonal() * tf;
}

/// Transport upstairs on the pull-back along the horizontal lift of a
/// downstairs loop, closed by the fibre segment back to theta = 0. The
/// matrix is taken in the normal frame of M at the base point, which is also
/// a normal frame of the pull-back there.
struct LiftedLoop {
  Mat matrix;
  double theta_end = 0.0;  // fibre angle at which the horizontal lift ends
};

inline LiftedLoop lifted_loop_transport(const Immersion& m, const ParamCurve& loop) {
  detail::check_closed(m, loop);
  const Immersion up = pullback(m);
  const FrameData f = frame_at(m, loop.start());
  const int k = m.k();
  auto eval = [&](std::size_t pi, double t, double theta) {
    const CurvePiece& p = loop.pieces[pi];
    const LocalGeometry geo = local_geometry(up, lifted_param(p.pos(t), theta));
    const PullbackCoords pc = pullback_coords(geo);
    const Vec du = p.vel(t);
    const double dth = -pc.w.dot(du);
    Vec vel(k + 1);
    vel << du, dth;
    return detail::TransportStage{geo, vel, dth};
  };
  LiftedLoop out;
  double theta = 0.0;
  Mat v = detail::rk4_transport(loop, eval, f.normal, Bundle::Normal, theta);
  out.theta_end = theta;
  // vertical return along the fibre
  const int nfib = std::max(8, static_cast<int>(std::ceil(std::abs(theta) / 0.02)));
  const ParamCurve fibre = ParamCurve::segment(lifted_param(loop.start(), theta), lifted_param(loop.start(), 0.0), nfib);
  v = transport_frame(up, fibre, v, Bundle::Normal);
  out.matrix = f.normal.transpose() * f.geo.g.asDiagonal() * v;
  return out;
}

/// Orthogonality defect |G^T G - I| (max entry).
inline double orthogonality_defect(const Mat& g) {
  if (g.size() == 0) return 0.0;
  return (g.transpose() * g - Mat::Identity(g.cols(), g.cols())).cwiseAbs().maxCoeff();
}

}  // namespace holab
