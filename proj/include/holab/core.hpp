#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace holab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Failure categories surfaced by the engine; the CLI maps them to exit codes.
enum class ErrorKind {
  InvalidInput,
  UnsupportedModel,
  InvalidRepresentative,
  DegenerateImmersion,
  InvalidTolerance,
  NonconvergentLog,
  NotFound,
  Precondition,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::UnsupportedModel: return "unsupported-model";
    case ErrorKind::InvalidRepresentative: return "invalid-representative";
    case ErrorKind::DegenerateImmersion: return "degenerate-immersion";
    case ErrorKind::InvalidTolerance: return "invalid-tolerance";
    case ErrorKind::NonconvergentLog: return "nonconvergent-log";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Precondition: return "precondition";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Largest number of independent variables carried by Dual2.
inline constexpr int kMaxVars = 6;

/// Second-order forward-mode number: value, gradient and Hessian with respect
/// to up to kMaxVars seeded variables. Used to produce exact 2-jets of the
/// catalog immersions and of sampled-grid interpolants.
struct Dual2 {
  double v = 0.0;
  int n = 0;
  std::array<double, kMaxVars> g{};
  std::array<double, kMaxVars * kMaxVars> h{};

  Dual2() = default;
  Dual2(double value) : v(value) {}  // NOLINT: implicit constant promotion

  static Dual2 variable(double value, int index, int nvars) {
    Dual2 d(value);
    d.n = nvars;
    d.g[static_cast<std::size_t>(index)] = 1.0;
    return d;
  }

  double hess(int a, int b) const { return h[static_cast<std::size_t>(a * kMaxVars + b)]; }
  double& hess(int a, int b) { return h[static_cast<std::size_t>(a * kMaxVars + b)]; }
};

namespace detail {

// f(x) with f' = d1, f'' = d2 at x.v
inline Dual2 chain(const Dual2& x, double f, double d1, double d2) {
  Dual2 r(f);
  r.n = x.n;
  for (int a = 0; a < x.n; ++a) r.g[a] = d1 * x.g[a];
  for (int a = 0; a < x.n; ++a)
    for (int b = 0; b < x.n; ++b) r.hess(a, b) = d1 * x.hess(a, b) + d2 * x.g[a] * x.g[b];
  return r;
}

}  // namespace detail

inline Dual2 operator+(const Dual2& x, const Dual2& y) {
  Dual2 r(x.v + y.v);
  r.n = std::max(x.n, y.n);
  for (int a = 0; a < r.n; ++a) r.g[a] = x.g[a] + y.g[a];
  for (int a = 0; a < r.n; ++a)
    for (int b = 0; b < r.n; ++b) r.hess(a, b) = x.hess(a, b) + y.hess(a, b);
  return r;
}

inline Dual2 operator-(const Dual2& x) {
  Dual2 r(-x.v);
  r.n = x.n;
  for (int a = 0; a < r.n; ++a) r.g[a] = -x.g[a];
  for (int a = 0; a < r.n; ++a)
    for (int b = 0; b < r.n; ++b) r.hess(a, b) = -x.hess(a, b);
  return r;
}

inline Dual2 operator-(const Dual2& x, const Dual2& y) { return x + (-y); }

inline Dual2 operator*(const Dual2& x, const Dual2& y) {
  Dual2 r(x.v * y.v);
  r.n = std::max(x.n, y.n);
  for (int a = 0; a < r.n; ++a) r.g[a] = x.g[a] * y.v + x.v * y.g[a];
  for (int a = 0; a < r.n; ++a)
    for (int b = 0; b < r.n; ++b)
      r.hess(a, b) = x.hess(a, b) * y.v + x.v * y.hess(a, b) + x.g[a] * y.g[b] + x.g[b] * y.g[a];
  return r;
}

inline Dual2 operator/(const Dual2& x, const Dual2& y) {
  const double iy = 1.0 / y.v;
  return x * detail::chain(y, iy, -iy * iy, 2.0 * iy * iy * iy);
}

inline Dual2& operator+=(Dual2& x, const Dual2& y) { return x = x + y; }
inline Dual2& operator-=(Dual2& x, const Dual2& y) { return x = x - y; }
inline Dual2& operator*=(Dual2& x, const Dual2& y) { return x = x * y; }

inline Dual2 sin(const Dual2& x) { return detail::chain(x, std::sin(x.v), std::cos(x.v), -std::sin(x.v)); }
inline Dual2 cos(const Dual2& x) { return detail::chain(x, std::cos(x.v), -std::sin(x.v), -std::cos(x.v)); }
inline Dual2 exp(const Dual2& x) {
  const double e = std::exp(x.v);
  return detail::chain(x, e, e, e);
}
inline Dual2 sinh(const Dual2& x) { return detail::chain(x, std::sinh(x.v), std::cosh(x.v), std::sinh(x.v)); }
inline Dual2 cosh(const Dual2& x) { return detail::chain(x, std::cosh(x.v), std::sinh(x.v), std::cosh(x.v)); }
inline Dual2 sqrt(const Dual2& x) {
  const double s = std::sqrt(x.v);
  return detail::chain(x, s, 0.5 / s, -0.25 / (s * x.v));
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual2& x) { return x.v; }

/// Minimal complex number over a generic real scalar (double or Dual2).
template <class S>
struct Cx {
  S re{};
  S im{};
};

template <class S>
Cx<S> operator+(const Cx<S>& a, const Cx<S>& b) { return {a.re + b.re, a.im + b.im}; }
template <class S>
Cx<S> operator-(const Cx<S>& a, const Cx<S>& b) { return {a.re - b.re, a.im - b.im}; }
template <class S>
Cx<S> operator*(const Cx<S>& a, const Cx<S>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class S>
Cx<S> operator*(const S& s, const Cx<S>& a) { return {s * a.re, s * a.im}; }

/// e^{i t}
template <class S>
Cx<S> expi(const S& t) {
  using std::cos;
  using std::sin;
  return {cos(t), sin(t)};
}

/// Interleave complex coordinates into a real (re, im, re, im, ...) vector.
template <class S>
std::vector<S> interleave(const std::vector<Cx<S>>& z) {
  std::vector<S> out;
  out.reserve(2 * z.size());
  for (const auto& c : z) {
    out.push_back(c.re);
    out.push_back(c.im);
  }
  return out;
}

}  // namespace holab
