#pragma once

#include "holab/crtype.hpp"
#include "holab/immersion.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace holab {

/// Totally geodesic totally real submanifold N of the base, given by a real
/// subspace V of the representative space with V orthogonal to JV. N is the
/// image of V under the Hopf projection (or V itself in the flat model).
struct AmbientChain {
  std::string name;
  Mat V;  // columns: orthonormal basis of V
};

struct GroundTruth {
  CRLabel cr_label = CRLabel::NotCR;
  bool coisotropic = false;
  // Normal bundle flatness of the pull-back (curved models) or of M itself
  // (flat model).
  std::optional<bool> flat_normal;
  std::optional<AmbientChain> chain;
  // Restricted holonomy algebra dimension; for closed curves the period loop
  // is included.
  std::optional<int> expected_algebra_dim;
  std::optional<int> relative_nullity;  // at generic points
  std::optional<bool> totally_geodesic;
};

struct CatalogEntry {
  std::string name;
  std::string description;
  Immersion immersion;
  GroundTruth truth;
  Vec default_point;
  Vec lo, hi;                  // sampling box in parameter space
  std::vector<double> period;  // per coordinate, 0 = not periodic
};

namespace detail {

template <class S>
std::vector<S> normalized(const std::vector<Cx<S>>& z, double eps = 1.0) {
  // eps = -1: normalize against the signature (1, n) form used for CH^n.
  S nn(0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const S q = z[i].re * z[i].re + z[i].im * z[i].im;
    nn = (i == 0 && eps < 0) ? nn - q : nn + q;
  }
  using std::sqrt;
  const S inv = S(1.0) / sqrt(eps < 0 ? S(0.0) - nn : nn);
  std::vector<S> out;
  for (const auto& c : z) {
    out.push_back(inv * c.re);
    out.push_back(inv * c.im);
  }
  return out;
}

template <class S>
Cx<S> cx(const S& re, const S& im = S(0.0)) {
  return {re, im};
}

inline Vec box(std::initializer_list<double> v) {
  Vec r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r[i++] = x;
  return r;
}

inline AmbientChain real_chain(int nc, const std::string& name) {
  AmbientChain ch;
  ch.name = name;
  ch.V = Mat::Zero(2 * nc, nc);
  for (int i = 0; i < nc; ++i) ch.V(2 * i, i) = 1.0;
  return ch;
}

inline constexpr double kLatitude = 0.7;
inline constexpr double kSphereRadius = 0.6;

inline std::vector<CatalogEntry> build_catalog() {
  using std::numbers::pi;
  std::vector<CatalogEntry> out;
  const auto c2 = AmbientSpace::make(0.0, 2);
  const auto cp2 = AmbientSpace::make(4.0, 2);
  const auto cp3 = AmbientSpace::make(4.0, 3);
  const auto ch2 = AmbientSpace::make(-4.0, 2);

  {
    CatalogEntry e;
    e.name = "plane-c2";
    e.description = "real plane R^2 in C^2 (Lagrangian, flat)";
    e.immersion = make_immersion(
        c2, 2, [](const auto& u) { return std::vector{u[0], u[0] * 0.0, u[1], u[1] * 0.0}; }, e.name);
    e.truth.cr_label = CRLabel::Lagrangian;
    e.truth.coisotropic = true;
    e.truth.flat_normal = true;
    e.truth.expected_algebra_dim = 0;
    e.truth.totally_geodesic = true;
    e.truth.relative_nullity = 2;
    e.default_point = box({0.3, -0.2});
    e.lo = box({-1, -1});
    e.hi = box({1, 1});
    e.period = {0, 0};
    out.push_back(e);
  }
  {
    CatalogEntry e;
    e.name = "complex-line-c2";
    e.description = "complex line C x {0} in C^2";
    e.immersion = make_immersion(
        c2, 2, [](const auto& u) { return std::vector{u[0], u[1], u[0] * 0.0, u[1] * 0.0}; }, e.name);
    e.truth.cr_label = CRLabel::Complex;
    e.truth.flat_normal = true;
    e.truth.expected_algebra_dim = 0;
    e.truth.totally_geodesic = true;
    e.truth.relative_nullity = 2;
    e.default_point = box({0.3, 0.1});
    e.lo = box({-1, -1});
    e.hi = box({1, 1});
    e.period = {0, 0};
    out.push_back(e);
  }
  {
    CatalogEntry e;
    e.name = "holomorphic-graph-c2";
    e.description = "graph w -> (w, w^2) in C^2";
    e.immersion = make_immersion(
        c2, 2,
        [](const auto& u) {
          using S = std::decay_t<decltype(u[0])>;
          const Cx<S> w = cx<S>(u[0], u[1]);
          const Cx<S> w2 = w * w;
          return interleave(std::vector<Cx<S>>{w, w2});
        },
        e.name);
    e.truth.cr_label = CRLabel::Complex;
    e.truth.flat_normal = false;
    e.truth.expected_algebra_dim = 1;
    e.truth.relative_nullity = 0;
    e.truth.totally_geodesic = false;
    e.default_point = box({0.3, 0.2});
    e.lo = box({-0.8, -0.8});
    e.hi = box({0.8, 0.8});
    e.period = {0, 0};
    out.push_back(e);
  }
  {
    CatalogEntry e;
    e.name = "complex-line-cp3";
    e.description = "totally geodesic CP^1 in CP^3";
    e.immersion = make_immersion(
        cp3, 2,
        [](const auto& u) {
          using S = std::decay_t<decltype(u[0])>;
          const S zero(0.0);
          return normalized<S>({cx<S>(S(1.0)), cx<S>(u[0], u[1]), cx<S>(zero), cx<S>(zero)});
        },
        e.name);
    e.truth.cr_label = CRLabel::Complex;
    e.truth.flat_normal = true;  // pull-back is a great S^3
    e.truth.expected_algebra_dim = 1;
    e.truth.relative_nullity = 2;
    e.truth.totally_geodesic = true;
    e.default_point = box({0.3, 0.1});
    e.lo = box({-1, -1});
    e.hi = box({1, 1});
    e.period = {0, 0};
    out.push_back(e);
  }
  {
    CatalogEntry e;
    e.name = "conic-cp2";
    e.description = "conic [1 : w : w^2] in CP^2";
    e.immersion = make_immersion(
        cp2, 2,
        [](const auto& u) {
          using S = std::decay_t<decltype(u[0])>;
          const Cx<S> w = cx<S>(u[0], u[1]);
          return normalized<S>({cx<S>(S(1.0)), w, w * w});
        },
        e.name);
    e.truth.cr_label = CRLabel::Complex;
    e.truth.flat_normal = false;
    e.truth.expected_algebra_dim = 1;
    e.truth.relative_nullity = 0;
    e.truth.totally_geodesic = false;
    e.default_point = box({0.3, 0.2});
    e.lo = box({-0.8, -0.8});
    e.hi = box({0.8, 0.8});
    e.period = {0, 0};
    out.push_back(e);
  }
  auto circle = [&](const std::string& name, double rho, bool with_chain) {
    CatalogEntry e;
    e.name = name;
    e.immersion = make_immersion(
        cp2, 1,
        [rho](const auto& u) {
          using S = std::decay_t<decltype(u[0])>;
          using std::cos;
          using std::sin;
          const S zero(0.0);
          return std::vector<S>{S(std::cos(rho)), zero, S(std::sin(rho)) * cos(u[0]), zero,
                                S(std::sin(rho)) * sin(u[0]), zero};
        },
        name);
    const bool geodesic = std::abs(rho - pi / 2) < 1e-15;
    e.truth.cr_label = CRLabel::TotallyReal;
    e.truth.flat_normal = geodesic;
    e.truth.expected_algebra_dim = geodesic ? 0 : 1;
    e.truth.relative_nullity = geodesic ? 1 : 0;
    e.truth.totally_geodesic = geodesic;
    if (with_chain) e.truth.chain = real_chain(3, "RP2");
    e.default_point = box({0.4});
    e.lo = box({0.0});
    e.hi = box({2 * pi});
    e.period = {2 * pi};
    return e;
  };
  {
    CatalogEntry e = circle("geodesic-cp2", pi / 2, false);
    e.description = "closed geodesic of CP^2 (holomorphic circle with kappa = 0)";
    out.push_back(e);
  }
  {
    CatalogEntry e = circle("latitude-circle-cp2", kLatitude, false);
    e.description = "latitude circle of polar angle 0.7 inside RP^2 (not a holomorphic circle)";
    out.push_back(e);
  }
  {
    CatalogEntry e;
    e.name = "clifford-torus-cp2";
    e.description = "Clifford torus [e^{iu1} : e^{iu2} : 1] in CP^2";
    e.immersion = make_immersion(
        cp2, 2,
        [](const auto& u) {
          using S = std::decay_t<decltype(u[0])>;
          const S s(1.0 / std::sqrt(3.0));
          return interleave<S>({s * expi(u[0]), s * expi(u[1]), cx<S>(s)});
        },
        e.name);
    e.truth.cr_label = CRLabel::Lagrangian;
    e.truth.coisotropic = true;
    e.truth.flat_normal = true;
    e.truth.expected_algebra_dim = 0;
    e.truth.relative_nullity = 0;
    e.truth.totally_geodesic = false;
    e.default_point = box({0.4, 1.1});
    e.lo = box({0.0, 0.0});
    e.hi = box({2 * pi, 2 * pi});
    e.period = {2 * pi, 2 * pi};
    out.push_back(e);
  }
  {
    CatalogEntry e;
    e.name = "rp2-cp2";
    e.description = "real projective plane [1 : u1 : u2] in CP^2";
    e.immersion = make_immersion(
        cp2, 2,
        [](const auto& u) {
          using S = std::decay_t<decltype(u[0])>;
          return normalized<S>({cx<S>(S(1.0)), cx<S>(u[0]), cx<S>(u[1])});
        },
        e.name);
    e.truth.cr_label = CRLabel::Lagrangian;
    e.truth.coisotropic = true;
    e.truth.flat_normal = false;
    e.truth.expected_algebra_dim = 1;
    e.truth.relative_nullity = 2;
    e.truth.totally_geodesic = true;
    e.truth.chain = real_chain(3, "RP2");
    e.default_point = box({0.3, -0.2});
    e.lo = box({-1, -1});
    e.hi = box({1, 1});
    e.period = {0, 0};
    out.push_back(e);
  }
  {
    CatalogEntry e = circle("rp1-in-rp2-cp2", pi / 2, true);
    e.description = "closed geodesic RP^1 in RP^2 in CP^2";
    out.push_back(e);
  }
  {
    CatalogEntry e = circle("rp1-in-rp2-cp2-circle", kLatitude, true);
    e.description = "latitude circle in RP^2 in CP^2 (non-geodesic)";
    out.push_back(e);
  }
  {
    CatalogEntry e;
    e.name = "geodesic-sphere-cp2";
    e.description = "geodesic sphere of radius 0.6 in CP^2 (real hypersurface)";
    e.immersion = make_immersion(
        cp2, 3,
        [](const auto& u) {
          using S = std::decay_t<decltype(u[0])>;
          using std::cos;
          using std::sin;
          const S cr(std::cos(kSphereRadius)), sr(std::sin(kSphereRadius));
          return interleave<S>({cx<S>(cr), (sr * cos(u[0])) * expi(u[1]), (sr * sin(u[0])) * expi(u[2])});
        },
        e.name);
    e.truth.cr_label = CRLabel::Coisotropic;
    e.truth.coisotropic = true;
    e.truth.flat_normal = true;
    e.truth.expected_algebra_dim = 0;
    e.truth.totally_geodesic = false;
    e.default_point = box({0.7, 0.3, 1.2});
    e.lo = box({0.3, 0.0, 0.0});
    e.hi = box({1.2, 2 * pi, 2 * pi});
    e.period = {0, 2 * pi, 2 * pi};
    out.push_back(e);
  }
  {
    CatalogEntry e;
    e.name = "rh2-ch2";
    e.description = "real hyperbolic plane in CH^2 (Lagrangian, Lorentzian pull-back)";
    e.immersion = make_immersion(
        ch2, 2,
        [](const auto& u) {
          using S = std::decay_t<decltype(u[0])>;
          using std::sqrt;
          const S zero(0.0);
          return std::vector<S>{sqrt(S(1.0) + u[0] * u[0] + u[1] * u[1]), zero, u[0], zero, u[1], zero};
        },
        e.name);
    e.truth.cr_label = CRLabel::Lagrangian;
    e.truth.coisotropic = true;
    e.truth.flat_normal = false;
    e.truth.expected_algebra_dim = 1;
    e.truth.relative_nullity = 2;
    e.truth.totally_geodesic = true;
    e.default_point = box({0.3, -0.4});
    e.lo = box({-1, -1});
    e.hi = box({1, 1});
    e.period = {0, 0};
    out.push_back(e);
  }
  {
    CatalogEntry e;
    e.name = "totally-real-surface-cp3";
    e.description = "surface [1 : u1 : u2 : (u1^2 - u2^2)/2] inside RP^3 in CP^3 (totally real, not coisotropic)";
    e.immersion = make_immersion(
        cp3, 2,
        [](const auto& u) {
          using S = std::decay_t<decltype(u[0])>;
          const S q = S(0.5) * (u[0] * u[0] - u[1] * u[1]);
          return normalized<S>({cx<S>(S(1.0)), cx<S>(u[0]), cx<S>(u[1]), cx<S>(q)});
        },
        e.name);
    e.truth.cr_label = CRLabel::TotallyReal;
    e.truth.coisotropic = false;
    e.truth.totally_geodesic = false;
    e.truth.chain = real_chain(4, "RP3");
    e.default_point = box({0.2, 0.3});
    e.lo = box({-0.8, -0.8});
    e.hi = box({0.8, 0.8});
    e.period = {0, 0};
    out.push_back(e);
  }
  return out;
}

}  // namespace detail

inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = detail::build_catalog();
  return entries;
}

inline std::vector<std::string> catalog_names() {
  std::vector<std::string> r;
  for (const auto& e : catalog()) r.push_back(e.name);
  return r;
}

inline const CatalogEntry& catalog_get(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return e;
  throw Error(ErrorKind::NotFound, "unknown catalog example '" + name + "'");
}

/// Deterministic sample points in the entry's box (Halton sequence, bases
/// 2, 3, 5, ...), starting with the default point.
inline std::vector<Vec> catalog_samples(const CatalogEntry& e, int count) {
  static constexpr int primes[] = {2, 3, 5, 7, 11, 13};
  std::vector<Vec> out;
  if (count <= 0) return out;
  out.push_back(e.default_point);
  for (int i = 1; out.size() < static_cast<std::size_t>(count); ++i) {
    Vec u(e.lo.size());
    for (Eigen::Index a = 0; a < u.size(); ++a) {
      double f = 1.0, x = 0.0;
      for (int j = i; j > 0; j /= primes[a]) {
        f /= primes[a];
        x += f * (j % primes[a]);
      }
      // stay away from the box edges
      u[a] = e.lo[a] + (0.1 + 0.8 * x) * (e.hi[a] - e.lo[a]);
    }
    out.push_back(u);
  }
  return out;
}

}  // namespace holab
