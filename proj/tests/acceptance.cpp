// Acceptance suite: one PASS/FAIL line per criterion. Usage: holab_acceptance <path-to-holab-cli>
#include "holab/report.hpp"
#include "holab/verify.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

using namespace holab;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream note;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      note << " [failed: " << what << "]";
    }
  }
};

std::string sci(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2e", x);
  return b;
}

Subject subject(const std::string& name, int samples = 4) { return subject_from_catalog(catalog_get(name), samples); }

double item_residual(const CheckReport& r, const std::string& name) {
  const CheckItem* it = r.item(name);
  return it ? it->residual : std::numeric_limits<double>::infinity();
}

// [1 : p(t) : q(t)] with random complex cubic p, q
Subject random_curve(std::mt19937& rng, int index) {
  std::normal_distribution<double> nd(0.0, 0.7);
  std::array<double, 16> coef{};
  for (auto& c : coef) c = nd(rng);
  coef[2] += 1.0;  // keep p'(0) away from zero so the curve is immersed
  auto f = [coef](const auto& u) {
    using S = std::decay_t<decltype(u[0])>;
    const S t = u[0];
    auto poly = [&](int off) {
      Cx<S> acc{S(coef[static_cast<std::size_t>(off + 6)]), S(coef[static_cast<std::size_t>(off + 7)])};
      for (int d = 2; d >= 0; --d)
        acc = Cx<S>{acc.re * t + S(coef[static_cast<std::size_t>(off + 2 * d)]),
                    acc.im * t + S(coef[static_cast<std::size_t>(off + 2 * d + 1)])};
      return acc;
    };
    return detail::normalized<S>({Cx<S>{S(1.0), S(0.0)}, poly(0), poly(8)});
  };
  Subject s;
  s.name = "random-curve-" + std::to_string(index);
  s.immersion = make_immersion(AmbientSpace::make(4.0, 2), 1, f, s.name);
  s.base = Vec::Constant(1, 0.0);
  s.lo = Vec::Constant(1, -0.3);
  s.hi = Vec::Constant(1, 0.3);
  for (double t : {-0.25, -0.1, 0.0, 0.15, 0.3}) s.samples.push_back(Vec::Constant(1, t));
  return s;
}

Outcome criterion1() {
  Outcome o;
  std::mt19937 rng(2024);
  double worst = 0.0;
  int used = 0;
  for (int i = 0; used < 10 && i < 40; ++i) {
    const Subject s = random_curve(rng, i);
    bool regular = true;
    for (const Vec& u : s.samples) regular = regular && s.immersion.jet(u).d1.norm() > 1e-2;
    if (!regular) continue;
    ++used;
    const CheckReport r = check_curve_pullback(s);
    const double m = std::max({item_residual(r, "shape-matrices"), item_residual(r, "commutator"),
                               item_residual(r, "unit-mixed-entry")});
    worst = std::max(worst, m);
    o.require(m < 1e-7, s.name + " residual " + sci(m));
  }
  o.require(used == 10, "only " + std::to_string(used) + " regular curves");
  o.note << used << " curves, worst entrywise residual " << sci(worst);
  return o;
}

Outcome criterion2() {
  Outcome o;
  const CheckReport g = check_curve_pullback(subject("geodesic-cp2"));
  const CheckReport l = check_curve_pullback(subject("latitude-circle-cp2"));
  const double rg = *g.metric("max_pullback_normal_curvature"), rl = *l.metric("max_pullback_normal_curvature");
  o.require(rg < 1e-6, "geodesic |R^perp| " + sci(rg));
  o.require(rl > 1e-2, "latitude |R^perp| " + sci(rl));
  o.require(item_residual(g, "predicates-agree") == 0.0, "geodesic predicates disagree");
  o.require(item_residual(l, "predicates-agree") == 0.0, "latitude predicates disagree");
  o.note << "geodesic " << sci(rg) << ", latitude " << sci(rl) << ", predicates agree on both";
  return o;
}

Outcome criterion3() {
  Outcome o;
  double worst = 0.0;
  for (const char* name : {"rp2-cp2", "clifford-torus-cp2", "geodesic-sphere-cp2", "rh2-ch2"}) {
    const CheckReport r = check_coisotropic_lemma(subject(name));
    for (const char* it : {"mixed-curvature", "commutator-hopf", "shape-symmetry"}) {
      worst = std::max(worst, item_residual(r, it));
      o.require(item_residual(r, it) < 1e-6, std::string(name) + " " + it);
    }
    o.require(r.pass, std::string(name) + " status " + to_string(r.status));
  }
  const CheckReport neg = check_coisotropic_lemma(subject("totally-real-surface-cp3"));
  const double nr = item_residual(neg, "shape-symmetry");
  o.require(neg.status == CheckStatus::PreconditionFailed, "negative control not flagged");
  o.require(nr > 1e-2, "negative control residual " + sci(nr));
  o.note << "worst " << sci(worst) << "; control " << sci(nr) << " (" << to_string(neg.status) << ")";
  return o;
}

Outcome criterion4() {
  Outcome o;
  VerifyOptions vo;
  vo.loops = 20;
  double worst = 0.0;
  for (const char* name : {"rp2-cp2", "clifford-torus-cp2", "geodesic-sphere-cp2", "rh2-ch2"}) {
    const CheckReport r = check_holonomy_identification(subject(name), vo);
    const double t = item_residual(r, "transport-match");
    worst = std::max(worst, t);
    o.require(t < 1e-5 && r.pass, std::string(name) + " " + sci(t));
    o.require(r.points_sampled >= 20, std::string(name) + " loops " + std::to_string(r.points_sampled));
  }
  o.note << "20 loops x 4 examples, worst " << sci(worst);
  return o;
}

Outcome criterion5() {
  Outcome o;
  double worst = 0.0, angle = 0.0, sec = -1.0;
  for (const char* name : {"rh2-ch2", "rp2-cp2", "clifford-torus-cp2", "geodesic-sphere-cp2"}) {
    const CheckReport r = check_script_r_tensor(subject(name));
    for (const char* it : {"antisymmetry", "skew", "pair-symmetry", "bianchi"}) worst = std::max(worst, item_residual(r, it));
    angle = std::max(angle, item_residual(r, "image-angle"));
    if (std::string(name) == "rh2-ch2") sec = *r.metric("max_sectional");
    o.require(r.pass, std::string(name) + " " + r.message);
    o.require(r.metric("random_pairs").value_or(0) >= 50, std::string(name) + " pairs");
  }
  o.require(worst < 1e-9, "symmetries " + sci(worst));
  o.require(angle < 1e-5, "image angle " + sci(angle));
  o.require(sec <= 1e-9, "rh2 sectional " + sci(sec));
  o.note << "symmetries " << sci(worst) << ", image angle " << sci(angle) << ", rh2 max sectional " << sci(sec);
  return o;
}

Outcome criterion6() {
  Outcome o;
  VerifyOptions vo;
  vo.loops = 20;
  double worst = 0.0;
  for (const char* name : {"clifford-torus-cp2", "rp2-cp2"}) {
    const CheckReport r = check_lagrangian_intertwiner(subject(name), vo);
    const double t = item_residual(r, "intertwiner");
    worst = std::max(worst, t);
    o.require(r.pass && t < 1e-5, std::string(name) + " " + sci(t));
    o.require(r.points_sampled >= 20, std::string(name) + " loops");
  }
  o.note << "worst " << sci(worst);
  return o;
}

Outcome criterion7() {
  Outcome o;
  for (const char* name : {"rp1-in-rp2-cp2", "rp1-in-rp2-cp2-circle"}) {
    const CheckReport r = check_totally_real_splitting(subject(name));
    const double curv = item_residual(r, "curvature-formula");
    o.require(r.pass, std::string(name) + " " + r.message);
    o.require(curv < 1e-7, std::string(name) + " curvature " + sci(curv));
    for (const char* it : {"w-stabilized", "algebra-full", "geodesic-iff-w-is-jtm"})
      o.require(item_residual(r, it) == 0.0, std::string(name) + " " + it);
    o.note << name << ": w " << r.metric("w_rank").value_or(-1) << ", algebra dim "
           << r.metric("algebra_dim_on_w").value_or(-1) << "; ";
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  const Subject s = subject("complex-line-cp3");
  const CheckReport r = check_complex_nullity(s);
  const double res = item_residual(r, "nullity-identity");
  o.require(res < 1e-8, "nullity identity " + sci(res));
  HolonomyConfig hc;
  hc.periods = s.period;
  const HolonomyEstimate h = holonomy_algebra(s.immersion, s.base, hc);
  o.require(h.dim() == 1, "algebra dim " + std::to_string(h.dim()));
  double angle = std::numbers::pi / 2;
  if (h.dim() == 1) {
    const FrameData f = frame_at(s.immersion, s.base);
    Mat j = f.normal.transpose() * f.geo.g.asDiagonal() * apply_J(f.normal);
    j /= j.norm();
    angle = linalg::max_angle(linalg::matrix_span_angles(h.algebra, {j}));
  }
  o.require(angle < 1e-3, "generator angle " + sci(angle));
  o.note << "identity " << sci(res) << ", dim " << h.dim() << ", angle to J_nu " << sci(angle);
  return o;
}

Outcome criterion9() {
  Outcome o;
  double orth = 0.0;
  for (const auto& e : catalog()) {
    HolonomyConfig hc;
    hc.periods = e.period;
    orth = std::max(orth, holonomy_algebra(e.immersion, e.default_point, hc).orthogonality);
  }
  o.require(orth < 1e-7, "orthogonality " + sci(orth));

  double lo_order = 1e9, hi_order = -1e9;
  for (const char* name : {"conic-cp2", "rh2-ch2", "totally-real-surface-cp3"}) {
    const auto& e = catalog_get(name);
    const ParamCurve loop = ParamCurve::circle(e.default_point, 0, 1, 0.3, 8);
    const Mat ref = loop_transport(e.immersion, loop.with_steps(512));
    const double e1 = (loop_transport(e.immersion, loop.with_steps(8)) - ref).norm();
    const double e2 = (loop_transport(e.immersion, loop.with_steps(16)) - ref).norm();
    const double order = std::log2(e1 / e2);
    lo_order = std::min(lo_order, order);
    hi_order = std::max(hi_order, order);
  }
  o.require(lo_order >= 3.5 && hi_order <= 4.5, "integrator order");

  double lo_ratio = 1e9, hi_ratio = -1e9;
  for (const auto& e : catalog()) {
    if (!e.immersion.space().curved()) continue;
    const CheckReport r = check_lift_identities(subject_from_catalog(e, 1));
    if (const auto ratio = r.metric("fd_refinement_ratio")) {
      lo_ratio = std::min(lo_ratio, *ratio);
      hi_ratio = std::max(hi_ratio, *ratio);
    }
  }
  o.require(lo_ratio >= 3.2 && hi_ratio <= 4.8, "fd refinement ratio");
  char buf[160];
  std::snprintf(buf, sizeof buf, "orthogonality %s, order [%.3f, %.3f], fd ratio [%.4f, %.4f]", sci(orth).c_str(),
                lo_order, hi_order, lo_ratio, hi_ratio);
  o.note << buf;
  return o;
}

std::string run_cli(const std::string& cmd, int& rc) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    rc = -1;
    return out;
  }
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int st = pclose(p);
  rc = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return out;
}

Outcome criterion10(const std::string& cli) {
  Outcome o;
  int compared = 0;
  for (const auto& name : catalog_names()) {
    const std::string cmd = "'" + cli + "' verify --example " + name + " --check all --seed 7 2>&1";
    int rc1 = 0, rc2 = 0;
    const std::string a = run_cli(cmd, rc1), b = run_cli(cmd, rc2);
    o.require(!a.empty() && a == b, name + " output differs");
    o.require(rc1 == rc2 && rc1 == 0, name + " exit " + std::to_string(rc1) + "/" + std::to_string(rc2));
    ++compared;
  }
  o.note << compared << " catalog entries, byte-identical";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <holab-cli>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "curve pull-back matrices", criterion1},
      {2, "holomorphic-circle criterion", criterion2},
      {3, "coisotropic shape lemma", criterion3},
      {4, "holonomy identification", criterion4},
      {5, "pull-back curvature tensor", criterion5},
      {6, "lagrangian intertwiner", criterion6},
      {7, "totally real splitting", criterion7},
      {8, "complex nullity", criterion8},
      {9, "numerical hygiene", criterion9},
      {10, "determinism", [&] { return criterion10(cli); }},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.note << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %2d %-30s %s (%.1fs)\n", o.ok ? "PASS" : "FAIL", c.id, c.title, o.note.str().c_str(),
                secs);
    std::fflush(stdout);
    failed += !o.ok;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed ? 1 : 0;
}
