#pragma once

#include "holab/catalog.hpp"
#include "holab/crtype.hpp"
#include "holab/holonomy.hpp"
#include "holab/hopf.hpp"
#include "holab/submanifold.hpp"
#include "holab/transport.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <limits>
#include <map>
#include <thread>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace holab {

enum class CheckStatus { Pass, Fail, PreconditionFailed, Vacuous, Skipped };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::PreconditionFailed: return "precondition-failed";
    case CheckStatus::Vacuous: return "vacuous";
    case CheckStatus::Skipped: return "skipped";
  }
  return "?";
}

/// One verified quantity: raw residual against its own tolerance.
struct CheckItem {
  std::string name;
  double residual = 0.0;
  double tolerance = 1.0;
  bool pass() const { return residual < tolerance; }
};

struct DetailRow {
  std::string where;
  std::string item;
  double value = 0.0;
};

/// Result of one check. `max_residual` is the largest item residual measured
/// in units of that item's tolerance, so pass <=> max_residual < tolerance = 1.
struct CheckReport {
  std::string check_name;
  std::string subject;
  int points_sampled = 0;
  double max_residual = 0.0;
  double tolerance = 1.0;
  bool pass = false;
  CheckStatus status = CheckStatus::Fail;
  std::string message;
  std::vector<CheckItem> items;
  std::vector<DetailRow> details;
  std::vector<std::pair<std::string, double>> metrics;

  CheckItem* item(const std::string& name) {
    for (auto& it : items)
      if (it.name == name) return &it;
    return nullptr;
  }
  const CheckItem* item(const std::string& name) const {
    for (const auto& it : items)
      if (it.name == name) return &it;
    return nullptr;
  }
  double residual(const std::string& name) const {
    const CheckItem* it = item(name);
    return it ? it->residual : 0.0;
  }
  std::optional<double> metric(const std::string& name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    return std::nullopt;
  }

  /// Raise the residual of an item (created on first use).
  void update(const std::string& name, double residual, double tol) {
    CheckItem* it = item(name);
    if (!it) {
      items.push_back({name, residual, tol});
      return;
    }
    it->residual = std::max(it->residual, residual);
  }
  void flag(const std::string& name, bool ok) { update(name, ok ? 0.0 : 2.0, 1.0); }
  void metric(const std::string& name, double v) {
    for (auto& kv : metrics)
      if (kv.first == name) {
        kv.second = v;
        return;
      }
    metrics.emplace_back(name, v);
  }
  void detail(const std::string& where, const std::string& it, double v) { details.push_back({where, it, v}); }

  void precondition_failed(const std::string& msg, double measure, double threshold) {
    status = CheckStatus::PreconditionFailed;
    if (message.empty()) message = msg;
    update("precondition", measure, threshold);
  }

  void finalize() {
    max_residual = 0.0;
    for (const auto& it : items) max_residual = std::max(max_residual, it.residual / it.tolerance);
    if (status == CheckStatus::Vacuous || status == CheckStatus::Skipped) {
      pass = true;
      return;
    }
    pass = max_residual < tolerance && status != CheckStatus::PreconditionFailed;
    if (status != CheckStatus::PreconditionFailed) status = pass ? CheckStatus::Pass : CheckStatus::Fail;
  }
};

/// What a check runs on: an immersion plus the sampling metadata.
struct Subject {
  std::string name;
  Immersion immersion;
  Vec base;
  std::vector<Vec> samples;
  Vec lo, hi;
  std::vector<double> period;
  std::optional<AmbientChain> chain;
};

inline Subject subject_from_catalog(const CatalogEntry& e, int samples = 4) {
  Subject s;
  s.name = e.name;
  s.immersion = e.immersion;
  s.base = e.default_point;
  s.samples = catalog_samples(e, samples);
  s.lo = e.lo;
  s.hi = e.hi;
  s.period = e.period;
  s.chain = e.truth.chain;
  return s;
}

struct VerifyOptions {
  double tol = 0.0;  // 0 = per-check default
  int loops = 20;
  std::uint64_t seed = 7;
  int steps = 24;
  HolonomyConfig holonomy;
  std::string w0 = "jtm";
};

inline std::string format_point(const Vec& u) {
  std::string s = "(";
  char buf[32];
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", u[i]);
    s += (i ? ", " : "") + std::string(buf);
  }
  return s + ")";
}

namespace detail {

inline double default_tol(const Immersion& m, double analytic = 1e-6) {
  return m.mode() == JetMode::Analytic ? analytic : 1e-3;
}

inline double pick_tol(const VerifyOptions& o, const Immersion& m, double analytic = 1e-6) {
  return o.tol > 0.0 ? o.tol : default_tol(m, analytic);
}

inline double max_abs(const Mat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

// G-orthonormal basis of the part of `cols` orthogonal to the span of `away`.
inline Mat complement_in(const Mat& cols, const Mat& away, const Vec& g) {
  Mat r = cols;
  if (away.cols()) r -= away * (away.transpose() * g.asDiagonal() * cols);
  Eigen::JacobiSVD<Mat> svd(r, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > 1e-8 * std::max(1.0, s.size() ? s[0] : 0.0)) ++rank;
  return linalg::g_orthonormalize(svd.matrixU().leftCols(rank), g);
}

}  // namespace detail

/// Deterministic family of loops at the subject's base point: a backtracking
/// loop first, then spoke-and-square loops in random coordinate planes. Curves
/// get backtracking loops of several lengths instead.
inline std::vector<ParamCurve> make_loops(const Subject& s, int count, std::uint64_t seed, int steps) {
  std::vector<ParamCurve> out;
  const Vec& u0 = s.base;
  const int k = static_cast<int>(u0.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto backtrack = [&](double len, int a) {
    const ParamCurve seg = ParamCurve::segment(u0, u0 + len * Vec::Unit(k, a), steps);
    return seg.then(seg.reversed());
  };
  out.push_back(backtrack(0.1, 0));
  while (static_cast<int>(out.size()) < count) {
    if (k == 1) {
      out.push_back(backtrack(0.05 + 0.3 * unif(rng), 0));
      continue;
    }
    int a = static_cast<int>(unif(rng) * k), b = static_cast<int>(unif(rng) * (k - 1));
    if (b >= a) ++b;
    if (a > b) std::swap(a, b);
    const double r = 0.15 * unif(rng), phi = 2 * std::numbers::pi * unif(rng), side = 0.05 + 0.15 * unif(rng);
    const Vec c = u0 + r * (std::cos(phi) * Vec::Unit(k, a) + std::sin(phi) * Vec::Unit(k, b));
    out.push_back(ParamCurve::lasso(u0, c, a, b, side, steps));
  }
  return out;
}

// ---------------------------------------------------------------------------

/// Coisotropic lemma: A_xi J zeta = A_zeta J xi downstairs, and on the
/// pull-back R^perp(J eta, X^) = 0 and [A_xi, A_zeta] J eta = 0.
inline CheckReport check_coisotropic_lemma(const Subject& s, const VerifyOptions& o = {}) {
  CheckReport rep;
  rep.check_name = "coisotropic-lemma";
  rep.subject = s.name;
  const Immersion& m = s.immersion;
  const double tol = detail::pick_tol(o, m);
  const double cr_tol = default_cr_tolerance(m.mode());
  double max_term = 0.0;
  for (const Vec& u : s.samples) {
    const std::string where = format_point(u);
    ++rep.points_sampled;
    const CRClassification cls = classify(m, u, cr_tol);
    if (!cls.coisotropic)
      rep.precondition_failed("not coisotropic at u = " + where, cls.coisotropic_angle, cr_tol);

    const FundamentalData fd = fundamental_data(m, u);
    const Mat& nf = fd.frame.normal;
    const Mat& pt = fd.frame.geo.p_tangent;
    double r3 = 0.0;
    for (int a = 0; a < fd.m(); ++a)
      for (int b = 0; b < fd.m(); ++b) {
        const Vec xa = nf.col(a), xb = nf.col(b);
        const Vec lhs = fd.shape_apply(xa, pt * apply_J(xb));
        const Vec rhs = fd.shape_apply(xb, pt * apply_J(xa));
        r3 = std::max(r3, (lhs - rhs).norm());
        max_term = std::max(max_term, lhs.norm());
      }
    rep.update("shape-symmetry", r3, tol);
    rep.detail(where, "shape-symmetry", r3);

    if (m.space().curved()) {
      const Immersion up = pullback(m);
      const NormalCurvature nu = normal_curvature(up, lifted_param(u));
      const FundamentalData& fu = nu.data;
      const Vec jz = apply_J(fu.frame.point);
      const PullbackCoords pc = pullback_coords(fu.frame.geo);
      double r1 = 0.0, r2 = 0.0;
      for (int a = 0; a < m.k(); ++a) {
        const Vec x = pc.horizontal.col(a) / std::sqrt(inner(fu.frame.geo.g, Vec(pc.horizontal.col(a)),
                                                             Vec(pc.horizontal.col(a))));
        r1 = std::max(r1, detail::max_abs(nu.apply(jz, x)));
      }
      const Vec cj = fu.frame.tangent_coords(jz);
      for (int a = 0; a < fu.m(); ++a)
        for (int b = a + 1; b < fu.m(); ++b) {
          const Mat& A = fu.shape_op[static_cast<std::size_t>(a)];
          const Mat& B = fu.shape_op[static_cast<std::size_t>(b)];
          r2 = std::max(r2, ((A * B - B * A) * cj).norm());
        }
      rep.update("mixed-curvature", r1, tol);
      rep.update("commutator-hopf", r2, tol);
      rep.detail(where, "mixed-curvature", r1);
      rep.detail(where, "commutator-hopf", r2);
    }
  }
  rep.metric("max_shape_term", max_term);
  rep.finalize();
  return rep;
}

/// tau_perp(J v) = J tau_tan(v) around loops on a Lagrangian submanifold.
inline CheckReport check_lagrangian_intertwiner(const Subject& s, const VerifyOptions& o = {}) {
  CheckReport rep;
  rep.check_name = "lagrangian-intertwiner";
  rep.subject = s.name;
  const Immersion& m = s.immersion;
  const double tol = o.tol > 0.0 ? o.tol : 1e-5;
  const CRClassification cls = classify(m, s.base);
  if (cls.label != CRLabel::Lagrangian) {
    const double measure = std::max({cls.coisotropic_angle, cls.anti_invariance_angle,
                                     cls.dim_D > 0 ? std::numbers::pi / 2 : 0.0});
    rep.precondition_failed("not Lagrangian at u = " + format_point(s.base) + " (label " + to_string(cls.label) + ")",
                            measure, default_cr_tolerance(m.mode()));
  }
  const FrameData f = frame_at(m, s.base);
  const Mat jmat = f.normal.transpose() * f.geo.g.asDiagonal() * apply_J(f.tangent);  // (b, i) = <J e_i, xi_b>
  const auto loops = make_loops(s, o.loops, o.seed, o.steps);
  double tan_move = 0.0, nor_move = 0.0;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    const Mat n = loop_transport(m, loops[i]);
    const Mat t = loop_transport_tangent(m, loops[i]);
    const double r = detail::max_abs(n * jmat - jmat * t);
    rep.update("intertwiner", r, tol);
    rep.update("orthogonality", std::max(orthogonality_defect(n), orthogonality_defect(t)), 1e-7);
    rep.detail("loop " + std::to_string(i), "intertwiner", r);
    tan_move = std::max(tan_move, detail::max_abs(t - Mat::Identity(t.rows(), t.cols())));
    nor_move = std::max(nor_move, detail::max_abs(n - Mat::Identity(n.rows(), n.cols())));
  }
  rep.points_sampled = static_cast<int>(loops.size());
  rep.metric("max_tangent_holonomy", tan_move);
  rep.metric("max_normal_holonomy", nor_move);
  rep.finalize();
  return rep;
}

/// Pull-back of a curve: shape operators in the frame {J eta, T^}, their
/// commutator, and the three equivalent flatness predicates.
inline CheckReport check_curve_pullback(const Subject& s, const VerifyOptions& o = {}) {
  CheckReport rep;
  rep.check_name = "curve-pullback";
  rep.subject = s.name;
  const Immersion& m = s.immersion;
  if (m.k() != 1 || !m.space().curved() || m.space().n < 2) {
    rep.precondition_failed("needs a curve in a curved model of complex dimension at least 2", 1.0, 0.5);
    rep.finalize();
    return rep;
  }
  const double tol = detail::pick_tol(o, m, 1e-7);
  const double pred_tol = 1e-6;
  const double eps = m.space().total_space_norm();
  const Immersion up = pullback(m);
  double max_rperp = 0.0, max_a = 0.0, max_acc = 0.0;
  for (const Vec& u : s.samples) {
    const std::string where = format_point(u);
    ++rep.points_sampled;
    const FundamentalData fd = fundamental_data(m, u);
    const Vec& g = fd.frame.geo.g;
    const Vec t = fd.frame.tangent.col(0);
    const Vec jt = apply_J(t);
    const Mat others = detail::complement_in(fd.frame.normal, jt, g);

    const NormalCurvature nu = normal_curvature(up, lifted_param(u));
    const FundamentalData& fu = nu.data;
    // operator matrices in the basis {J z, t^}
    const Vec jz = apply_J(fu.frame.point);
    auto op_matrix = [&](const Vec& xi) {
      const std::array<Vec, 2> e{jz, t};
      Mat r(2, 2);
      for (int j = 0; j < 2; ++j) {
        const Vec ae = fu.shape_apply(xi, e[static_cast<std::size_t>(j)]);
        for (int i = 0; i < 2; ++i)
          r(i, j) = inner(g, ae, e[static_cast<std::size_t>(i)]) /
                    inner(g, e[static_cast<std::size_t>(i)], e[static_cast<std::size_t>(i)]);
      }
      return r;
    };
    auto a_of = [&](const Vec& xi) { return fd.shape_bilinear(xi, t, t); };

    const Mat got_jt = op_matrix(jt);
    const double sgn = got_jt(1, 0) >= 0.0 ? 1.0 : -1.0;
    rep.update("unit-mixed-entry", std::abs(std::abs(got_jt(1, 0)) - 1.0), tol);
    Mat ejt(2, 2);
    ejt << 0.0, sgn / eps, sgn, a_of(jt);
    double r = detail::max_abs(got_jt - ejt);
    double rc = 0.0;
    for (Eigen::Index q = 0; q < others.cols(); ++q) {
      const Vec xi = others.col(q);
      const double a = a_of(xi);
      max_a = std::max(max_a, std::abs(a));
      Mat ex(2, 2);
      ex << 0.0, 0.0, 0.0, a;
      const Mat got = op_matrix(xi);
      r = std::max(r, detail::max_abs(got - ex));
      const Mat com = got * got_jt - got_jt * got;
      Mat ecom(2, 2);
      ecom << 0.0, -a * sgn / eps, a * sgn, 0.0;
      rc = std::max(rc, detail::max_abs(com - ecom));
    }
    rep.update("shape-matrices", r, tol);
    rep.update("commutator", rc, tol);
    rep.detail(where, "shape-matrices", r);
    rep.detail(where, "commutator", rc);

    max_rperp = std::max(max_rperp, nu.max_norm());
    // acceleration of the unit tangent, computed from the flat second
    // derivative with the span of T and JT removed
    const LocalGeometry& geo = fd.frame.geo;
    const Vec h = geo.coord.col(0);
    const double hh = inner(g, h, h);
    const Mat q = Mat::Identity(h.size(), h.size()) - linalg::projector(geo.extras, g);
    Vec acc = q * geo.coord_derivative(0, 0) / hh;
    acc -= inner(g, acc, t) * t + inner(g, acc, jt) * jt;
    max_acc = std::max(max_acc, acc.norm());
  }
  const bool flat = max_rperp < pred_tol, a_zero = max_a < pred_tol, circle = max_acc < pred_tol;
  rep.flag("predicates-agree", flat == a_zero && a_zero == circle);
  rep.metric("flat_pullback", flat ? 1.0 : 0.0);
  rep.metric("shape_entry_zero", a_zero ? 1.0 : 0.0);
  rep.metric("holomorphic_circle", circle ? 1.0 : 0.0);
  rep.metric("max_pullback_normal_curvature", max_rperp);
  rep.metric("max_shape_entry", max_a);
  rep.metric("max_acceleration_off_JT", max_acc);
  rep.finalize();
  return rep;
}

namespace detail {

inline void compare_lifted_loops(const Subject& s, const VerifyOptions& o, CheckReport& rep, bool closure_item) {
  const auto loops = make_loops(s, o.loops, o.seed, o.steps);
  const double tol = o.tol > 0.0 ? o.tol : 1e-5;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    const Mat down = loop_transport(s.immersion, loops[i]);
    const LiftedLoop up = lifted_loop_transport(s.immersion, loops[i]);
    const double r = max_abs(down - up.matrix);
    rep.update("transport-match", r, tol);
    rep.update("orthogonality", std::max(orthogonality_defect(down), orthogonality_defect(up.matrix)), 1e-7);
    rep.detail("loop " + std::to_string(i), "transport-match", r);
    if (closure_item) {
      rep.update("lift-closure", std::abs(up.theta_end), 1e-6);
      rep.detail("loop " + std::to_string(i), "lift-closure", up.theta_end);
    }
  }
  rep.points_sampled = static_cast<int>(loops.size());
}

}  // namespace detail

/// Downstairs loop transport against transport on the pull-back along the
/// horizontal lift closed by a fibre segment.
inline CheckReport check_holonomy_identification(const Subject& s, const VerifyOptions& o = {}) {
  CheckReport rep;
  rep.check_name = "holonomy-identification";
  rep.subject = s.name;
  const Immersion& m = s.immersion;
  if (!m.space().curved()) {
    rep.precondition_failed("needs c = 4 or c = -4", 1.0, 0.5);
    rep.finalize();
    return rep;
  }
  const CRClassification cls = classify(m, s.base);
  if (!cls.coisotropic)
    rep.precondition_failed("not coisotropic at u = " + format_point(s.base), cls.coisotropic_angle,
                            default_cr_tolerance(m.mode()));
  detail::compare_lifted_loops(s, o, rep, false);
  rep.finalize();
  return rep;
}

/// Totally real case: the horizontal lift of a null-homotopic loop closes
/// and the transports agree.
inline CheckReport check_holonomy_injection(const Subject& s, const VerifyOptions& o = {}) {
  CheckReport rep;
  rep.check_name = "holonomy-injection";
  rep.subject = s.name;
  const Immersion& m = s.immersion;
  if (!m.space().curved()) {
    rep.precondition_failed("needs c = 4 or c = -4", 1.0, 0.5);
    rep.finalize();
    return rep;
  }
  const CRClassification cls = classify(m, s.base);
  if (!cls.totally_real())
    rep.precondition_failed("not totally real at u = " + format_point(s.base),
                            cls.angles.empty() ? 1.0 : std::numbers::pi / 2 - cls.angles.front(),
                            default_cr_tolerance(m.mode()));
  detail::compare_lifted_loops(s, o, rep, true);
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Normal subbundles given as fields u -> G-orthonormal basis.

using SubbundleField = std::function<Mat(const Vec&)>;

namespace detail {

inline Mat horizontal_projector(const LocalGeometry& geo) {
  const Eigen::Index d = geo.g.size();
  if (geo.extras.cols() == 0) return Mat::Identity(d, d);
  return Mat::Identity(d, d) - linalg::projector(geo.extras, geo.g);
}

// G-orthonormal basis of span(cols) after dropping directions below `cut`.
inline Mat spacelike_span(const Mat& cols, const Vec& g, double cut = 1e-8) {
  if (cols.cols() == 0) return Mat(cols.rows(), 0);
  return linalg::g_orthonormalize(linalg::span_basis(cols, 0.0, cut), g);
}

// Largest component of nabla_perp(W-section) leaving W, per unit coordinate
// length. Sections are u' -> Q(u') xi0; Q is differentiated with step h.
inline double parallel_residual(const Immersion& m, const Vec& u, const SubbundleField& w, double h) {
  const LocalGeometry geo = local_geometry(m, u);
  const Mat b = w(u);
  if (b.cols() == 0) return 0.0;
  const Mat q = linalg::projector(b, geo.g);
  double r = 0.0;
  for (int a = 0; a < geo.k(); ++a) {
    Vec up = u, um = u;
    up[a] += h;
    um[a] -= h;
    const Mat dq = (linalg::projector(w(up), geo.g) - linalg::projector(w(um), geo.g)) / (2.0 * h);
    const Mat d = geo.p_normal * (dq * b - geo.gauge[a] * apply_J(b));
    const Mat out = d - q * d;
    const double len = std::sqrt(inner(geo.g, Vec(geo.coord.col(a)), Vec(geo.coord.col(a))));
    r = std::max(r, out.colwise().norm().maxCoeff() / len);
  }
  return r;
}

inline Mat chain_tangent(const AmbientChain& chain, const LocalGeometry& geo) {
  if (geo.space.curved()) {
    const Vec& z = geo.jet.value;
    const Mat qv = chain.V * (chain.V.transpose() * chain.V).ldlt().solve(chain.V.transpose());
    const double off = (z - qv * z).norm();
    if (off > 1e-8)
      throw Error(ErrorKind::InvalidInput, "chain " + chain.name + " does not contain the representative (distance " +
                                               std::to_string(off) + ")");
  }
  return spacelike_span(horizontal_projector(geo) * chain.V, geo.g);
}

}  // namespace detail

/// nu_N M: normal directions of M that stay inside the chain N.
inline SubbundleField chain_normal_field(const Immersion& m, const AmbientChain& chain) {
  return [m, chain](const Vec& u) {
    const LocalGeometry geo = local_geometry(m, u);
    return detail::spacelike_span(geo.p_normal * detail::chain_tangent(chain, geo), geo.g);
  };
}

/// nu N restricted to M: horizontal directions orthogonal to the chain.
inline SubbundleField chain_complement_field(const Immersion& m, const AmbientChain& chain) {
  return [m, chain](const Vec& u) {
    const LocalGeometry geo = local_geometry(m, u);
    const Mat tn = detail::chain_tangent(chain, geo);
    const Mat r = detail::horizontal_projector(geo) - linalg::projector(tn, geo.g);
    return detail::spacelike_span(geo.p_normal * r, geo.g);
  };
}

inline SubbundleField jtm_field(const Immersion& m) {
  return [m](const Vec& u) {
    const FrameData f = frame_at(m, u);
    return detail::spacelike_span(f.geo.p_normal * apply_J(f.tangent), f.geo.g);
  };
}

/// Candidate bundle by name: jtm, chain-normal, chain-normal-plus-j, normal.
inline SubbundleField w0_field(const Subject& s, const std::string& name) {
  const Immersion& m = s.immersion;
  if (name == "jtm") return jtm_field(m);
  if (name == "normal")
    return [m](const Vec& u) { return Mat(frame_at(m, u).normal); };
  if (name == "chain-normal" || name == "chain-normal-plus-j") {
    if (!s.chain) throw Error(ErrorKind::InvalidInput, "w0 '" + name + "' needs chain data for " + s.name);
    const SubbundleField base = chain_normal_field(m, *s.chain);
    if (name == "chain-normal") return base;
    return [m, base](const Vec& u) {
      const LocalGeometry geo = local_geometry(m, u);
      const Mat b = base(u);
      Mat both(b.rows(), 2 * b.cols());
      both << b, apply_J(b);
      return detail::spacelike_span(geo.p_normal * both, geo.g);
    };
  }
  throw Error(ErrorKind::InvalidInput, "unknown w0 '" + name + "' (jtm, chain-normal, chain-normal-plus-j, normal)");
}

/// Parallelism of W0 and the two reduction conditions: (1) TM + W0 is
/// J-invariant, (2) N1 inside W0 and W0 orthogonal to J(TM + W0).
inline CheckReport check_reduction_conditions(const Subject& s, const VerifyOptions& o = {}) {
  CheckReport rep;
  rep.check_name = "reduction-conditions";
  rep.subject = s.name;
  const Immersion& m = s.immersion;
  const double tol = detail::pick_tol(o, m);
  const CRClassification cls = classify(m, s.base);
  if (!cls.totally_real()) {
    rep.precondition_failed("not totally real at u = " + format_point(s.base),
                            cls.angles.empty() ? 1.0 : std::numbers::pi / 2 - cls.angles.front(),
                            default_cr_tolerance(m.mode()));
    rep.finalize();
    return rep;
  }
  const SubbundleField w = w0_field(s, o.w0);
  double r1 = 0.0, r2 = 0.0;
  for (const Vec& u : s.samples) {
    const std::string where = format_point(u);
    ++rep.points_sampled;
    const FundamentalData fd = fundamental_data(m, u);
    const FrameData& f = fd.frame;
    const Vec& g = f.geo.g;
    const Mat b = w(u);
    const double off = detail::max_abs(b - f.geo.p_normal * b);
    if (off > 1e-6) throw Error(ErrorKind::InvalidInput, "w0 is not inside the normal bundle at u = " + where);
    const double par = detail::parallel_residual(m, u, w, 1e-4);
    rep.update("parallel", par, tol);
    rep.detail(where, "parallel", par);

    Mat tw(b.rows(), f.kt() + b.cols());
    tw << f.tangent, b;
    const Mat q = linalg::projector(tw, g);
    const Mat jtw = apply_J(tw);
    const double c1 = (jtw - q * jtw).colwise().norm().maxCoeff();
    const Mat qw = linalg::projector(b, g);
    double n1 = 0.0;
    for (const auto& row : fd.alpha)
      for (const Vec& a : row) n1 = std::max(n1, (a - qw * a).norm());
    const double orth = b.cols() ? (b.transpose() * g.asDiagonal() * jtw).cwiseAbs().maxCoeff() : 0.0;
    const double c2 = std::max(n1, orth);
    r1 = std::max(r1, c1);
    r2 = std::max(r2, c2);
    rep.detail(where, "condition-1", c1);
    rep.detail(where, "condition-2", c2);
    rep.metric("w0_rank", static_cast<double>(b.cols()));
  }
  if (rep.residual("parallel") >= tol)
    rep.precondition_failed("w0 = " + o.w0 + " is not parallel", rep.residual("parallel"), tol);
  rep.update("reduction", std::min(r1, r2), tol);
  rep.metric("condition_1_residual", r1);
  rep.metric("condition_2_residual", r2);
  rep.metric("condition_1_holds", r1 < tol ? 1.0 : 0.0);
  rep.metric("condition_2_holds", r2 < tol ? 1.0 : 0.0);
  if (r1 >= tol && r2 >= tol && rep.message.empty()) rep.message = "neither reduction condition holds for w0 = " + o.w0;
  rep.finalize();
  return rep;
}

/// Iterated covariant derivatives of J(TM): W = J(TM) + E1 + E2 + ...
struct WSpan {
  Mat basis;  // G-orthonormal, at the base point
  int iterations = 0;
  bool stabilized = false;
  double rejected = 0.0;  // largest dropped new component at the last step
  std::vector<int> ranks;
};

namespace detail {

class WBuilder {
 public:
  WBuilder(const Immersion& m, Vec u0, double h, double cut) : m_(m), u0_(std::move(u0)), h_(h), cut_(cut) {}

  Mat level(int lvl, const std::vector<int>& n, double* rejected = nullptr) {
    const auto key = std::make_pair(lvl, n);
    if (!rejected) {
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    Vec u = u0_;
    for (std::size_t a = 0; a < n.size(); ++a) u[static_cast<Eigen::Index>(a)] += h_ * n[a];
    const LocalGeometry geo = local_geometry(m_, u);
    Mat out;
    if (lvl == 0) {
      out = spacelike_span(geo.p_normal * apply_J(frame_from_geometry(geo).tangent), geo.g);
    } else {
      const Mat b = level(lvl - 1, n);
      const Mat q = linalg::projector(b, geo.g);
      Mat fresh(b.rows(), 0);
      for (int a = 0; a < geo.k(); ++a) {
        std::vector<int> np = n, nm = n;
        ++np[static_cast<std::size_t>(a)];
        --nm[static_cast<std::size_t>(a)];
        const Mat dq = (linalg::projector(level(lvl - 1, np), geo.g) - linalg::projector(level(lvl - 1, nm), geo.g)) /
                       (2.0 * h_);
        const double len = std::sqrt(inner(geo.g, Vec(geo.coord.col(a)), Vec(geo.coord.col(a))));
        Mat d = geo.p_normal * (dq * b - geo.gauge[a] * apply_J(b)) / len;
        d -= q * d;
        Mat grown(b.rows(), fresh.cols() + d.cols());
        grown << fresh, d;
        fresh = grown;
      }
      Mat add(b.rows(), 0);
      if (fresh.cols()) {
        Eigen::JacobiSVD<Mat> svd(fresh, Eigen::ComputeThinU);
        const Vec& sv = svd.singularValues();
        Eigen::Index r = 0;
        while (r < sv.size() && sv[r] > cut_) ++r;
        if (rejected) *rejected = r < sv.size() ? sv[r] : 0.0;
        add = svd.matrixU().leftCols(r);
      }
      Mat all(b.rows(), b.cols() + add.cols());
      all << b, add;
      out = spacelike_span(all, geo.g);
    }
    memo_[key] = out;
    return out;
  }

 private:
  const Immersion& m_;
  Vec u0_;
  double h_, cut_;
  std::map<std::pair<int, std::vector<int>>, Mat> memo_;
};

}  // namespace detail

inline WSpan w_span(const Immersion& m, const Vec& u, int max_iter = 10, double cut = 1e-5, double h = 1e-3) {
  detail::WBuilder wb(m, u, h, cut);
  const std::vector<int> origin(static_cast<std::size_t>(u.size()), 0);
  WSpan out;
  Mat prev = wb.level(0, origin);
  out.ranks.push_back(static_cast<int>(prev.cols()));
  for (int it = 1; it <= max_iter; ++it) {
    double rej = 0.0;
    const Mat next = wb.level(it, origin, &rej);
    out.iterations = it;
    out.rejected = rej;
    out.ranks.push_back(static_cast<int>(next.cols()));
    if (next.cols() == prev.cols()) {
      out.stabilized = true;
      out.basis = next;
      return out;
    }
    prev = next;
  }
  out.basis = prev;
  return out;
}

/// Splitting of nu M for M inside a totally geodesic totally real chain N.
inline CheckReport check_totally_real_splitting(const Subject& s, const VerifyOptions& o = {}) {
  CheckReport rep;
  rep.check_name = "totally-real-splitting";
  rep.subject = s.name;
  const Immersion& m = s.immersion;
  if (!s.chain) throw Error(ErrorKind::InvalidInput, "no chain data for " + s.name);
  const double tol = detail::pick_tol(o, m);
  const double c = m.space().c;
  const CRClassification cls = classify(m, s.base);
  if (!cls.totally_real())
    rep.precondition_failed("not totally real at u = " + format_point(s.base),
                            cls.angles.empty() ? 1.0 : std::numbers::pi / 2 - cls.angles.front(),
                            default_cr_tolerance(m.mode()));
  const SubbundleField nun = chain_normal_field(m, *s.chain);
  const SubbundleField nN = chain_complement_field(m, *s.chain);
  double alpha_max = 0.0;
  for (const Vec& u : s.samples) {
    const std::string where = format_point(u);
    ++rep.points_sampled;
    const double pa = std::max(detail::parallel_residual(m, u, nun, 1e-4), detail::parallel_residual(m, u, nN, 1e-4));
    rep.update("parallel-summands", pa, tol);
    rep.detail(where, "parallel-summands", pa);

    const NormalCurvature nc = normal_curvature(m, u);
    const FrameData& f = nc.data.frame;
    const Vec& g = f.geo.g;
    const Mat bn = nN(u);
    double rc = 0.0;
    for (int i = 0; i < f.kt(); ++i)
      for (int j = i + 1; j < f.kt(); ++j) {
        const Vec x = f.tangent.col(i), y = f.tangent.col(j);
        const Vec jx = apply_J(x), jy = apply_J(y);
        const Mat r = nc.apply(x, y);
        for (Eigen::Index q = 0; q < bn.cols(); ++q) {
          const Vec xi = bn.col(q);
          const Vec got = f.normal * (r * f.normal_coords(xi));
          const Vec want = (c / 4.0) * (inner(g, jy, xi) * jx - inner(g, jx, xi) * jy);
          rc = std::max(rc, (got - want).norm());
        }
      }
    rep.update("curvature-formula", rc, 1e-7);
    rep.detail(where, "curvature-formula", rc);
    alpha_max = std::max(alpha_max, nc.data.alpha_norm());
    rep.metric("rank_nu_N_M", static_cast<double>(nun(u).cols()));
    rep.metric("rank_nu_N", static_cast<double>(bn.cols()));
  }

  const WSpan ws = w_span(m, s.base);
  const int w = static_cast<int>(ws.basis.cols());
  rep.flag("w-stabilized", ws.stabilized);
  if (!ws.stabilized) rep.message = "W not stabilized after " + std::to_string(ws.iterations) + " iterations";
  rep.metric("w_rank", w);
  rep.metric("w_iterations", ws.iterations);
  rep.metric("w_rejected", ws.rejected);

  HolonomyConfig hc = o.holonomy;
  if (hc.periods.empty()) hc.periods = s.period;
  const HolonomyEstimate est = holonomy_algebra(m, s.base, hc);
  const Vec& g = frame_at(m, s.base).geo.g;
  const Mat cw = est.normal_frame.transpose() * g.asDiagonal() * ws.basis;
  std::vector<Mat> restricted;
  double inv = 0.0;
  for (const Mat& x : est.algebra) {
    restricted.push_back(cw.transpose() * x * cw);
    const Mat xc = x * cw;
    inv = std::max(inv, detail::max_abs(xc - cw * (cw.transpose() * xc)));
  }
  const int dim = static_cast<int>(
      linalg::matrix_span(restricted, w, o.holonomy.rank_tol, o.holonomy.abs_floor).size());
  rep.update("w-invariance", inv, 1e-5);
  rep.flag("algebra-full", dim == w * (w - 1) / 2);
  rep.metric("algebra_dim_on_w", dim);
  rep.metric("so_w_dim", w * (w - 1) / 2);

  const bool geodesic = alpha_max < tol;
  const bool w_is_jtm = w == m.k();
  rep.flag("geodesic-iff-w-is-jtm", geodesic == w_is_jtm);
  rep.metric("max_alpha", alpha_max);
  rep.metric("totally_geodesic", geodesic ? 1.0 : 0.0);
  rep.finalize();
  return rep;
}

/// R_perp(X, JX) = -(c/2) J on nu, for X in the relative nullity.
inline CheckReport check_complex_nullity(const Subject& s, const VerifyOptions& o = {}) {
  CheckReport rep;
  rep.check_name = "complex-nullity";
  rep.subject = s.name;
  const Immersion& m = s.immersion;
  const double tol = detail::pick_tol(o, m);
  const double c = m.space().c;
  int mu_max = 0;
  for (const Vec& u : s.samples) {
    const std::string where = format_point(u);
    ++rep.points_sampled;
    const CRClassification cls = classify(m, u);
    if (cls.label != CRLabel::Complex)
      rep.precondition_failed("not a complex submanifold at u = " + where, linalg::max_angle(cls.angles),
                              default_cr_tolerance(m.mode()));
    const NormalCurvature nc = normal_curvature(m, u);
    const FundamentalData& fd = nc.data;
    const FrameData& f = fd.frame;
    const int kt = f.kt(), mm = f.m();
    Mat stack(std::max(1, mm) * kt, kt);
    stack.setZero();
    for (int a = 0; a < mm; ++a) stack.middleRows(a * kt, kt) = fd.shape_op[static_cast<std::size_t>(a)];
    Eigen::JacobiSVD<Mat> svd(stack, Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    int rank = 0;
    while (rank < sv.size() && sv[rank] > 1e-8 * std::max(1.0, sv[0])) ++rank;
    const int mu = kt - rank;
    mu_max = std::max(mu_max, mu);
    rep.detail(where, "mu", mu);
    const Mat jnu = f.normal.transpose() * f.geo.g.asDiagonal() * apply_J(f.normal);
    double r = 0.0;
    for (int q = 0; q < mu; ++q) {
      Vec x = f.tangent * svd.matrixV().col(rank + q);
      x /= std::sqrt(inner(f.geo.g, x, x));
      r = std::max(r, detail::max_abs(nc.apply(x, f.geo.p_tangent * apply_J(x)) + 0.5 * c * jnu));
    }
    rep.update("nullity-identity", r, tol);
    rep.detail(where, "nullity-identity", r);
  }
  rep.metric("mu_max", mu_max);
  if (mu_max == 0 && rep.status != CheckStatus::PreconditionFailed) {
    rep.status = CheckStatus::Vacuous;
    rep.message = "relative nullity is zero at every sample";
  }
  rep.finalize();
  return rep;
}

/// Lift identities between M and its pull-back, plus a step-refinement ratio
/// for the finite-difference jets.
inline CheckReport check_lift_identities(const Subject& s, const VerifyOptions& o = {}) {
  CheckReport rep;
  rep.check_name = "lift-identities";
  rep.subject = s.name;
  const Immersion& m = s.immersion;
  if (!m.space().curved()) {
    rep.precondition_failed("needs c = 4 or c = -4", 1.0, 0.5);
    rep.finalize();
    return rep;
  }
  const double tol = detail::pick_tol(o, m);
  for (const Vec& u : s.samples) {
    const std::string where = format_point(u);
    ++rep.points_sampled;
    const LiftResidual r = holab::check_lift_identities(m, u);
    const std::pair<const char*, double> parts[] = {{"connection-lift", r.connection_lift},
                                                    {"fibre-derivative", r.fibre_derivative},
                                                    {"alpha-lift", r.alpha_lift},
                                                    {"shape-lift", r.shape_lift},
                                                    {"hopf-shape", r.hopf_shape}};
    for (const auto& [name, v] : parts) {
      rep.update(name, v, tol);
      rep.detail(where, name, v);
    }
  }
  const double coarse = holab::check_lift_identities(m.with_mode(JetMode::FiniteDifference, 1e-2), s.base).max();
  const double fine = holab::check_lift_identities(m.with_mode(JetMode::FiniteDifference, 5e-3), s.base).max();
  rep.metric("fd_residual_h", coarse);
  rep.metric("fd_residual_h_half", fine);
  if (fine > 1e-12) {
    const double ratio = coarse / fine;
    rep.metric("fd_refinement_ratio", ratio);
    rep.update("fd-refinement", std::abs(ratio - 4.0), 0.8);
  }
  rep.finalize();
  return rep;
}

inline CheckReport check_gauss_codazzi_ricci(const Subject& s, const VerifyOptions& o = {}) {
  CheckReport rep;
  rep.check_name = "gauss-codazzi-ricci";
  rep.subject = s.name;
  const double tol = detail::pick_tol(o, s.immersion);
  for (const Vec& u : s.samples) {
    const std::string where = format_point(u);
    ++rep.points_sampled;
    const GCRResidual r = gauss_codazzi_ricci_residual(s.immersion, u);
    rep.update("gauss", r.gauss, tol);
    rep.update("codazzi", r.codazzi, tol);
    rep.update("ricci", r.ricci, tol);
    rep.detail(where, "gauss", r.gauss);
    rep.detail(where, "codazzi", r.codazzi);
    rep.detail(where, "ricci", r.ricci);
  }
  rep.finalize();
  return rep;
}

/// Algebraic tensor built from shape-operator brackets on the pull-back.
inline CheckReport check_script_r_tensor(const Subject& s, const VerifyOptions& o = {}) {
  CheckReport rep;
  rep.check_name = "script-r-tensor";
  rep.subject = s.name;
  const Immersion& m = s.immersion;
  if (!m.space().curved()) {
    rep.precondition_failed("needs c = 4 or c = -4", 1.0, 0.5);
    rep.finalize();
    return rep;
  }
  const double cr_tol = default_cr_tolerance(m.mode());
  const Immersion up = pullback(m);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  int pairs = 0, mismatched = 0;
  double max_sec = -std::numeric_limits<double>::infinity();
  for (const Vec& u : s.samples) {
    const std::string where = format_point(u);
    ++rep.points_sampled;
    const CRClassification cls = classify(m, u, cr_tol);
    if (!cls.coisotropic)
      rep.precondition_failed("not coisotropic at u = " + where, cls.coisotropic_angle, cr_tol);
    const Vec p = lifted_param(u);
    const ScriptR t = script_R_tensor(up, p);
    const NormalCurvature rhat = normal_curvature(up, p);
    const ScriptRProperties pr = script_R_properties(t, rhat);
    rep.update("antisymmetry", pr.antisymmetry, 1e-9);
    rep.update("skew", pr.skew, 1e-9);
    rep.update("pair-symmetry", pr.pair_symmetry, 1e-9);
    rep.update("bianchi", pr.bianchi, 1e-9);
    rep.update("image-angle", pr.image_angle, 1e-5);
    rep.detail(where, "image-angle", pr.image_angle);
    rep.detail(where, "image-dim", pr.image_dim);
    if (t.m > 1) max_sec = std::max(max_sec, pr.max_sectional);

    const int per_point = (50 + static_cast<int>(s.samples.size()) - 1) / static_cast<int>(s.samples.size());
    for (int q = 0; q < per_point && pairs < 50; ++q, ++pairs) {
      Vec xi(t.m), zeta(t.m);
      for (int a = 0; a < t.m; ++a) xi[a] = normal(rng);
      for (int a = 0; a < t.m; ++a) zeta[a] = normal(rng);
      xi.normalize();
      zeta -= xi.dot(zeta) * xi;
      if (zeta.norm() < 1e-12) continue;
      zeta.normalize();
      const double sec = t.sectional(xi, zeta);
      const double com = t.commutator_norm(xi, zeta);
      max_sec = std::max(max_sec, sec);
      if ((std::abs(sec) < 1e-9) != (com < 1e-4)) ++mismatched;
    }
  }
  if (!std::isfinite(max_sec)) max_sec = 0.0;
  rep.update("sectional-nonpositive", std::max(0.0, max_sec), 1e-9);
  rep.flag("zero-sectional-iff-commuting", mismatched == 0);
  rep.metric("max_sectional", max_sec);
  rep.metric("random_pairs", pairs);
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------

using CheckFn = std::function<CheckReport(const Subject&, const VerifyOptions&)>;

struct CheckInfo {
  std::string name;
  CheckFn run;
  std::function<bool(const Subject&, const CRClassification&)> applies;
};

inline const std::vector<CheckInfo>& check_registry() {
  static const std::vector<CheckInfo> reg = [] {
    auto curved = [](const Subject& s) { return s.immersion.space().curved(); };
    std::vector<CheckInfo> r{
        {"coisotropic-lemma", check_coisotropic_lemma,
         [](const Subject&, const CRClassification& c) { return c.coisotropic; }},
        {"complex-nullity", check_complex_nullity,
         [](const Subject&, const CRClassification& c) { return c.label == CRLabel::Complex; }},
        {"curve-pullback", check_curve_pullback,
         [curved](const Subject& s, const CRClassification&) {
           return curved(s) && s.immersion.k() == 1 && s.immersion.space().n >= 2;
         }},
        {"gauss-codazzi-ricci", check_gauss_codazzi_ricci, [](const Subject&, const CRClassification&) { return true; }},
        {"holonomy-identification", check_holonomy_identification,
         [curved](const Subject& s, const CRClassification& c) { return curved(s) && c.coisotropic; }},
        {"holonomy-injection", check_holonomy_injection,
         [curved](const Subject& s, const CRClassification& c) { return curved(s) && c.totally_real(); }},
        {"lagrangian-intertwiner", check_lagrangian_intertwiner,
         [](const Subject&, const CRClassification& c) { return c.label == CRLabel::Lagrangian; }},
        {"lift-identities", static_cast<CheckReport (*)(const Subject&, const VerifyOptions&)>(check_lift_identities), [curved](const Subject& s, const CRClassification&) { return curved(s); }},
        {"reduction-conditions", check_reduction_conditions,
         [](const Subject& s, const CRClassification& c) {
           // the reduction needs a parallel candidate; J(TM) is the default one
           return c.totally_real() &&
                  detail::parallel_residual(s.immersion, s.base, jtm_field(s.immersion), 1e-4) <
                      detail::default_tol(s.immersion);
         }},
        {"script-r-tensor", check_script_r_tensor,
         [curved](const Subject& s, const CRClassification& c) { return curved(s) && c.coisotropic; }},
        {"totally-real-splitting", check_totally_real_splitting,
         [](const Subject& s, const CRClassification& c) { return s.chain.has_value() && c.totally_real(); }},
    };
    return r;
  }();
  return reg;
}

inline std::vector<std::string> check_names() {
  std::vector<std::string> out;
  for (const auto& c : check_registry()) out.push_back(c.name);
  return out;
}

inline const CheckInfo& find_check(const std::string& name) {
  for (const auto& c : check_registry())
    if (c.name == name) return c;
  std::string known;
  for (const auto& c : check_registry()) known += (known.empty() ? "" : ", ") + c.name;
  throw Error(ErrorKind::NotFound, "unknown check '" + name + "' (known: " + known + ")");
}

inline CheckReport run_check(const std::string& name, const Subject& s, const VerifyOptions& o = {}) {
  return find_check(name).run(s, o);
}

/// Every registered check, ordered by name. Checks that do not apply to the
/// subject come back as skipped. `threads` <= 1 runs sequentially.
inline std::vector<CheckReport> run_all_checks(const Subject& s, const VerifyOptions& o = {}, unsigned threads = 1) {
  const auto& reg = check_registry();
  const CRClassification cls = classify(s.immersion, s.base);
  std::vector<CheckReport> out(reg.size());
  std::vector<std::exception_ptr> errs(reg.size());
  auto one = [&](std::size_t i) {
    try {
      if (!reg[i].applies(s, cls)) {
        CheckReport r;
        r.check_name = reg[i].name;
        r.subject = s.name;
        r.status = CheckStatus::Skipped;
        r.message = "not applicable (" + std::string(to_string(cls.label)) + ")";
        r.finalize();
        out[i] = r;
      } else {
        out[i] = reg[i].run(s, o);
      }
    } catch (...) {
      errs[i] = std::current_exception();
    }
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < reg.size(); ++i) one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, reg.size()); ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < reg.size(); i = next++) one(i);
      });
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace holab
