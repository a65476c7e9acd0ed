#pragma once

#include "holab/core.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace holab {

/// One smooth piece of a parameter-space curve, t in [0, 1].
struct CurvePiece {
  std::function<Vec(double)> pos;
  std::function<Vec(double)> vel;
  int steps = 32;
};

/// Piecewise-smooth curve in parameter space. Each piece is integrated with
/// its own number of RK4 steps.
class ParamCurve {
 public:
  std::vector<CurvePiece> pieces;

  Vec start() const { return pieces.front().pos(0.0); }
  Vec end() const { return pieces.back().pos(1.0); }
  bool empty() const { return pieces.empty(); }

  int total_steps() const {
    int n = 0;
    for (const auto& p : pieces) n += p.steps;
    return n;
  }

  /// Same curve with every piece using `steps` integration steps.
  ParamCurve with_steps(int steps) const {
    ParamCurve c = *this;
    for (auto& p : c.pieces) p.steps = std::max(1, steps);
    return c;
  }

  /// Same curve with the step count of every piece multiplied by `factor`.
  ParamCurve refined(int factor) const {
    ParamCurve c = *this;
    for (auto& p : c.pieces) p.steps *= factor;
    return c;
  }

  ParamCurve then(const ParamCurve& other) const {
    ParamCurve c = *this;
    c.pieces.insert(c.pieces.end(), other.pieces.begin(), other.pieces.end());
    return c;
  }

  ParamCurve reversed() const {
    ParamCurve c;
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
      const CurvePiece p = *it;
      c.pieces.push_back({[p](double t) { return p.pos(1.0 - t); }, [p](double t) { return Vec(-p.vel(1.0 - t)); },
                          p.steps});
    }
    return c;
  }

  static ParamCurve segment(const Vec& a, const Vec& b, int steps = 32) {
    ParamCurve c;
    const Vec d = b - a;
    c.pieces.push_back({[a, d](double t) { return Vec(a + t * d); }, [d](double) { return d; }, steps});
    return c;
  }

  static ParamCurve polyline(const std::vector<Vec>& pts, int steps = 32) {
    ParamCurve c;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) c = c.then(segment(pts[i], pts[i + 1], steps));
    return c;
  }

  /// Counter-clockwise square in the (a, b) coordinate plane with corner u0.
  static ParamCurve plaquette(const Vec& u0, int a, int b, double side, int steps = 32) {
    const Vec ea = side * Vec::Unit(u0.size(), a), eb = side * Vec::Unit(u0.size(), b);
    return polyline({u0, u0 + ea, u0 + ea + eb, u0 + eb, u0}, steps);
  }

  /// Spoke from u0 to the lower-left corner of a counter-clockwise square of
  /// the given side centred at `center`, around the square, and back.
  static ParamCurve lasso(const Vec& u0, const Vec& center, int a, int b, double side, int steps = 32) {
    const Vec ea = side * Vec::Unit(u0.size(), a), eb = side * Vec::Unit(u0.size(), b);
    const Vec corner = center - 0.5 * (ea + eb);
    ParamCurve sq = plaquette(corner, a, b, side, steps);
    if ((corner - u0).norm() == 0.0) return sq;
    const ParamCurve spoke = segment(u0, corner, steps);
    return spoke.then(sq).then(spoke.reversed());
  }

  /// Counter-clockwise circle of radius r in the (a, b) plane, starting and
  /// ending at center + r e_a.
  static ParamCurve circle(const Vec& center, int a, int b, double r, int steps = 64) {
    ParamCurve c;
    const Eigen::Index k = center.size();
    c.pieces.push_back({[=](double t) {
                          const double s = 2 * std::numbers::pi * t;
                          return Vec(center + r * std::cos(s) * Vec::Unit(k, a) + r * std::sin(s) * Vec::Unit(k, b));
                        },
                        [=](double t) {
                          const double s = 2 * std::numbers::pi * t, w = 2 * std::numbers::pi * r;
                          return Vec(-w * std::sin(s) * Vec::Unit(k, a) + w * std::cos(s) * Vec::Unit(k, b));
                        },
                        steps});
    return c;
  }

  /// Once around a periodic coordinate: closed in M although not in
  /// parameter space.
  static ParamCurve period_loop(const Vec& u0, int a, double period, int steps = 512) {
    return segment(u0, u0 + period * Vec::Unit(u0.size(), a), steps);
  }
};

}  // namespace holab
