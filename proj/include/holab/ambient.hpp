#pragma once

#include "holab/core.hpp"

#include <string>

namespace holab {

enum class Model { Flat, Projective, Hyperbolic };

/// One of the standard complex space forms C^n (c = 0), CP^n (c = 4) or
/// CH^n (c = -4). Vectors are stored as interleaved (re, im) pairs: 2n reals
/// for the flat model, 2n + 2 reals (the Hopf total space in C^{n+1}) otherwise.
struct AmbientSpace {
  double c = 0.0;
  int n = 1;
  Model model = Model::Flat;

  static AmbientSpace make(double c, int n) {
    if (n < 1) throw Error(ErrorKind::InvalidInput, "complex dimension must be positive");
    AmbientSpace s;
    s.c = c;
    s.n = n;
    if (c == 0.0)
      s.model = Model::Flat;
    else if (c == 4.0)
      s.model = Model::Projective;
    else if (c == -4.0)
      s.model = Model::Hyperbolic;
    else
      throw Error(ErrorKind::InvalidInput, "holomorphic curvature must be one of 0, 4, -4");
    return s;
  }

  bool curved() const { return model != Model::Flat; }

  /// Number of complex coordinates of the representative vectors.
  int complex_dim() const { return curved() ? n + 1 : n; }

  /// Number of real coordinates of the representative vectors.
  int real_dim() const { return 2 * complex_dim(); }

  /// Diagonal of the real Gram matrix of the model inner product.
  Vec metric_diag() const {
    Vec g = Vec::Ones(real_dim());
    if (model == Model::Hyperbolic) g.head<2>().setConstant(-1.0);
    return g;
  }

  /// Value of <z, z> on the Hopf total space (+1 sphere, -1 anti-de Sitter).
  double total_space_norm() const { return model == Model::Hyperbolic ? -1.0 : 1.0; }

  /// Sectional curvature of the Hopf total space as a real space form.
  double total_space_curvature() const { return c / 4.0; }
};

inline std::string to_string(Model m) {
  switch (m) {
    case Model::Flat: return "Flat";
    case Model::Projective: return "Projective";
    case Model::Hyperbolic: return "Hyperbolic";
  }
  return "?";
}

inline void check_dim(const AmbientSpace& s, const Vec& v) {
  if (v.size() != s.real_dim())
    throw Error(ErrorKind::InvalidInput, "vector has dimension " + std::to_string(v.size()) +
                                             ", model expects " + std::to_string(s.real_dim()));
}

/// Re(sum z_i conj(w_i)), with the first term negated for the hyperbolic model.
inline double inner(const AmbientSpace& s, const Vec& v, const Vec& w) {
  check_dim(s, v);
  check_dim(s, w);
  double r = v.dot(w);
  if (s.model == Model::Hyperbolic) r -= 2.0 * (v[0] * w[0] + v[1] * w[1]);
  return r;
}

/// Unchecked inner product for hot loops; `g` is metric_diag().
inline double inner(const Vec& g, const Vec& v, const Vec& w) { return (g.array() * v.array() * w.array()).sum(); }

/// Multiplication by i: each (re, im) pair maps to (-im, re).
inline Vec apply_J(const Vec& v) {
  Vec r(v.size());
  for (Eigen::Index i = 0; i + 1 < v.size(); i += 2) {
    r[i] = -v[i + 1];
    r[i + 1] = v[i];
  }
  return r;
}

inline Vec apply_J(const AmbientSpace& s, const Vec& v) {
  check_dim(s, v);
  return apply_J(v);
}

/// Column-wise J.
inline Mat apply_J(const Mat& m) {
  Mat r(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) r.col(j) = apply_J(Vec(m.col(j)));
  return r;
}

/// Curvature of the complex space form,
/// R(X,Y)Z = (c/4)[<Y,Z>X - <X,Z>Y + <JY,Z>JX - <JX,Z>JY - 2<JX,Y>JZ],
/// for X, Y, Z in one tangent (horizontal) space.
inline Vec curvature_tensor(const AmbientSpace& s, const Vec& x, const Vec& y, const Vec& z) {
  check_dim(s, x);
  check_dim(s, y);
  check_dim(s, z);
  if (s.c == 0.0) return Vec::Zero(x.size());
  const Vec g = s.metric_diag();
  const Vec jx = apply_J(x), jy = apply_J(y), jz = apply_J(z);
  Vec r = inner(g, y, z) * x - inner(g, x, z) * y + inner(g, jy, z) * jx - inner(g, jx, z) * jy -
          2.0 * inner(g, jx, y) * jz;
  return (s.c / 4.0) * r;
}

}  // namespace holab
