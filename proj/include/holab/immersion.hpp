#pragma once

#include "holab/ambient.hpp"
#include "holab/core.hpp"

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace holab {

enum class JetMode { Analytic, FiniteDifference };

/// Where the immersion lands: the complex space form itself (for c != 0 the
/// map returns a representative in the Hopf total space), or the total space
/// as a pseudo-Riemannian submanifold in its own right (pull-backs).
enum class Target { Base, TotalSpace };

inline const char* to_string(JetMode m) { return m == JetMode::Analytic ? "analytic" : "finite-difference"; }

/// Value, first and second derivatives of an immersion at a parameter point.
struct Jet {
  Vec value;
  Mat d1;               // real_dim x k
  std::vector<Vec> d2;  // k*k entries, index a*k + b

  int k() const { return static_cast<int>(d1.cols()); }
  const Vec& second(int a, int b) const { return d2[static_cast<std::size_t>(a * k() + b)]; }

  /// Directional derivative of the columns of d1 along `du`.
  Mat d1_derivative(const Vec& du) const {
    Mat r = Mat::Zero(d1.rows(), d1.cols());
    for (int a = 0; a < k(); ++a)
      for (int b = 0; b < k(); ++b) r.col(a) += du[b] * second(a, b);
    return r;
  }
};

using RealMap = std::function<Vec(const Vec&)>;
using DualMap = std::function<std::vector<Dual2>(const std::vector<Dual2>&)>;

/// Parametric map u in R^k -> ambient representative, with either exact
/// (forward-mode) or central-difference jets.
class Immersion {
 public:
  Immersion() = default;
  Immersion(AmbientSpace space, int k, Target target, RealMap eval, DualMap dual, std::string name = {})
      : space_(space), k_(k), target_(target), eval_(std::move(eval)), dual_(std::move(dual)), name_(std::move(name)) {
    if (k_ < 1 || k_ >= kMaxVars) throw Error(ErrorKind::InvalidInput, "parameter dimension out of range");
    mode_ = dual_ ? JetMode::Analytic : JetMode::FiniteDifference;
    if (target_ == Target::TotalSpace && !space_.curved())
      throw Error(ErrorKind::UnsupportedModel, "flat model has no Hopf total space");
  }

  const AmbientSpace& space() const { return space_; }
  int k() const { return k_; }
  Target target() const { return target_; }
  JetMode mode() const { return mode_; }
  double fd_step() const { return fd_step_; }
  const std::string& name() const { return name_; }
  bool has_dual() const { return static_cast<bool>(dual_); }
  const DualMap& dual_map() const { return dual_; }
  const RealMap& real_map() const { return eval_; }

  /// Same map with a different jet mode. A positive `step` fixes the
  /// finite-difference step; zero selects h = 1e-4 (1 + |u|).
  Immersion with_mode(JetMode mode, double step = 0.0) const {
    if (mode == JetMode::Analytic && !dual_)
      throw Error(ErrorKind::InvalidInput, "immersion '" + name_ + "' has no analytic jets");
    Immersion r = *this;
    r.mode_ = mode;
    r.fd_step_ = step;
    return r;
  }

  Vec eval(const Vec& u) const {
    check_param(u);
    Vec z = eval_(u);
    check_dim(space_, z);
    return z;
  }

  Jet jet(const Vec& u) const {
    check_param(u);
    return mode_ == JetMode::Analytic ? analytic_jet(u) : fd_jet(u);
  }

  double step_at(const Vec& u) const { return fd_step_ > 0.0 ? fd_step_ : 1e-4 * (1.0 + u.norm()); }

 private:
  void check_param(const Vec& u) const {
    if (u.size() != k_)
      throw Error(ErrorKind::InvalidInput, "parameter point has dimension " + std::to_string(u.size()) +
                                               ", immersion expects " + std::to_string(k_));
  }

  Jet analytic_jet(const Vec& u) const {
    std::vector<Dual2> x;
    for (int a = 0; a < k_; ++a) x.push_back(Dual2::variable(u[a], a, k_));
    const std::vector<Dual2> y = dual_(x);
    const Eigen::Index d = static_cast<Eigen::Index>(y.size());
    if (d != space_.real_dim()) throw Error(ErrorKind::InvalidInput, "immersion output has wrong dimension");
    Jet j;
    j.value.resize(d);
    j.d1.resize(d, k_);
    j.d2.assign(static_cast<std::size_t>(k_ * k_), Vec(d));
    for (Eigen::Index i = 0; i < d; ++i) {
      const Dual2& yi = y[static_cast<std::size_t>(i)];
      j.value[i] = yi.v;
      for (int a = 0; a < k_; ++a) {
        j.d1(i, a) = yi.g[a];
        for (int b = 0; b < k_; ++b) j.d2[static_cast<std::size_t>(a * k_ + b)][i] = yi.hess(a, b);
      }
    }
    return j;
  }

  // Central differences; the second derivatives use the 3x3 stencil on each
  // parameter pair.
  Jet fd_jet(const Vec& u) const {
    const double h = step_at(u);
    Jet j;
    j.value = eval(u);
    const Eigen::Index d = j.value.size();
    j.d1.resize(d, k_);
    j.d2.assign(static_cast<std::size_t>(k_ * k_), Vec(d));
    std::vector<Vec> plus(static_cast<std::size_t>(k_)), minus(static_cast<std::size_t>(k_));
    for (int a = 0; a < k_; ++a) {
      Vec up = u, um = u;
      up[a] += h;
      um[a] -= h;
      plus[a] = eval(up);
      minus[a] = eval(um);
      j.d1.col(a) = (plus[a] - minus[a]) / (2.0 * h);
      j.d2[static_cast<std::size_t>(a * k_ + a)] = (plus[a] - 2.0 * j.value + minus[a]) / (h * h);
    }
    for (int a = 0; a < k_; ++a)
      for (int b = a + 1; b < k_; ++b) {
        auto at = [&](double sa, double sb) {
          Vec w = u;
          w[a] += sa * h;
          w[b] += sb * h;
          return eval(w);
        };
        const Vec m = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
        j.d2[static_cast<std::size_t>(a * k_ + b)] = m;
        j.d2[static_cast<std::size_t>(b * k_ + a)] = m;
      }
    return j;
  }

  AmbientSpace space_{};
  int k_ = 1;
  Target target_ = Target::Base;
  JetMode mode_ = JetMode::FiniteDifference;
  double fd_step_ = 0.0;
  RealMap eval_;
  DualMap dual_;
  std::string name_;
};

/// Build an immersion from a generic callable `f(const std::vector<S>&) ->
/// std::vector<S>` instantiated for S = double and S = Dual2.
template <class F>
Immersion make_immersion(const AmbientSpace& space, int k, F f, std::string name = {},
                         Target target = Target::Base) {
  RealMap real = [f](const Vec& u) {
    std::vector<double> x(u.data(), u.data() + u.size());
    const std::vector<double> y = f(x);
    return Vec(Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(y.size())));
  };
  DualMap dual = [f](const std::vector<Dual2>& x) { return f(x); };
  return Immersion(space, k, target, std::move(real), std::move(dual), std::move(name));
}

/// The same immersion precomposed with u -> scale * u.
inline Immersion reparametrize(const Immersion& m, double scale) {
  RealMap real = [m, scale](const Vec& u) { return m.real_map()(scale * u); };
  DualMap dual;
  if (m.has_dual())
    dual = [m, scale](const std::vector<Dual2>& x) {
      std::vector<Dual2> y;
      for (const auto& xi : x) y.push_back(Dual2(scale) * xi);
      return m.dual_map()(y);
    };
  Immersion r(m.space(), m.k(), m.target(), std::move(real), std::move(dual), m.name());
  return m.mode() == JetMode::Analytic ? r : r.with_mode(JetMode::FiniteDifference, m.fd_step());
}

}  // namespace holab
