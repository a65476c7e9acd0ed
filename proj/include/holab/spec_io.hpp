#pragma once

#include "holab/catalog.hpp"
#include "holab/verify.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

namespace holab {

/// One grid node: value with first and second derivatives (interleaved real
/// coordinates; d1[a] = d/du_a, d2[a*k+b]).
struct GridNode {
  Vec value;
  std::vector<Vec> d1;
  std::vector<Vec> d2;
};

struct ImmersionSpec {
  std::string name = "spec";
  double c = 0.0;
  int n = 1;
  int k = 1;
  JetMode mode = JetMode::Analytic;
  double fd_step = 0.0;
  std::optional<std::string> catalog;
  std::vector<std::vector<double>> axes;
  std::vector<GridNode> nodes;  // row-major, last axis fastest
  std::optional<Vec> point;
};

namespace detail {

[[noreturn]] inline void spec_error(const std::string& source, const YAML::Node& at, const std::string& field,
                                    const std::string& what) {
  std::string where = source;
  if (at && at.Mark().line >= 0) where += ":" + std::to_string(at.Mark().line + 1);
  throw Error(ErrorKind::InvalidInput, where + ": field '" + field + "': " + what);
}

template <class T>
T spec_scalar(const std::string& src, const YAML::Node& node, const std::string& field) {
  if (!node || !node.IsScalar()) spec_error(src, node, field, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    spec_error(src, node, field, "cannot convert '" + node.Scalar() + "'");
  }
}

inline Vec spec_vector(const std::string& src, const YAML::Node& node, const std::string& field,
                       Eigen::Index expect = -1) {
  if (!node || !node.IsSequence()) spec_error(src, node, field, "expected a list of numbers");
  if (expect >= 0 && static_cast<Eigen::Index>(node.size()) != expect)
    spec_error(src, node, field,
               "expected " + std::to_string(expect) + " entries, got " + std::to_string(node.size()));
  Vec v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = spec_scalar<double>(src, node[i], field + "[" + std::to_string(i) + "]");
  return v;
}

inline std::vector<Vec> spec_vectors(const std::string& src, const YAML::Node& node, const std::string& field,
                                     std::size_t count, Eigen::Index len) {
  if (!node || !node.IsSequence()) spec_error(src, node, field, "expected a list of lists");
  if (node.size() != count)
    spec_error(src, node, field, "expected " + std::to_string(count) + " arrays, got " + std::to_string(node.size()));
  std::vector<Vec> out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(spec_vector(src, node[i], field + "[" + std::to_string(i) + "]", len));
  return out;
}

}  // namespace detail

/// Parse an immersion spec document. `source` only labels error messages.
inline ImmersionSpec parse_spec(const std::string& text, const std::string& source = "spec") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::InvalidInput, source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw Error(ErrorKind::InvalidInput, source + ": expected a mapping at top level");
  for (auto it = root.begin(); it != root.end(); ++it) {
    static const char* known[] = {"name", "model", "k", "jet", "fd_step", "catalog", "grid", "point"};
    const std::string key = it->first.as<std::string>();
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      detail::spec_error(source, it->first, key, "unknown field");
  }
  ImmersionSpec s;
  using detail::spec_error;
  if (root["name"]) s.name = detail::spec_scalar<std::string>(source, root["name"], "name");

  const YAML::Node model = root["model"];
  if (!model || !model.IsMap()) spec_error(source, model ? model : root, "model", "missing mapping {c, n}");
  s.c = detail::spec_scalar<double>(source, model["c"], "model.c");
  s.n = detail::spec_scalar<int>(source, model["n"], "model.n");
  if (s.c != 0.0 && s.c != 4.0 && s.c != -4.0) spec_error(source, model["c"], "model.c", "must be 0, 4 or -4");
  if (s.n < 1) spec_error(source, model["n"], "model.n", "must be at least 1");

  if (!root["k"]) spec_error(source, root, "k", "missing");
  s.k = detail::spec_scalar<int>(source, root["k"], "k");
  if (s.k < 1 || s.k >= kMaxVars) spec_error(source, root["k"], "k", "out of range");

  if (root["jet"]) {
    const std::string j = detail::spec_scalar<std::string>(source, root["jet"], "jet");
    if (j == "analytic")
      s.mode = JetMode::Analytic;
    else if (j == "finite-difference")
      s.mode = JetMode::FiniteDifference;
    else
      spec_error(source, root["jet"], "jet", "expected analytic or finite-difference");
  }
  if (root["fd_step"]) {
    s.fd_step = detail::spec_scalar<double>(source, root["fd_step"], "fd_step");
    if (!(s.fd_step > 0.0)) spec_error(source, root["fd_step"], "fd_step", "must be positive");
  }
  if (root["point"]) s.point = detail::spec_vector(source, root["point"], "point", s.k);

  const bool has_cat = static_cast<bool>(root["catalog"]), has_grid = static_cast<bool>(root["grid"]);
  if (has_cat == has_grid) spec_error(source, root, has_cat ? "grid" : "catalog", "give exactly one of catalog, grid");
  if (has_cat) {
    s.catalog = detail::spec_scalar<std::string>(source, root["catalog"], "catalog");
    return s;
  }

  const YAML::Node grid = root["grid"];
  const YAML::Node axes = grid["axes"];
  if (!axes || !axes.IsSequence() || static_cast<int>(axes.size()) != s.k)
    spec_error(source, axes ? axes : grid, "grid.axes", "expected k = " + std::to_string(s.k) + " axes");
  std::size_t total = 1;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const std::string f = "grid.axes[" + std::to_string(a) + "]";
    const Vec ax = detail::spec_vector(source, axes[a], f);
    if (ax.size() < 2) spec_error(source, axes[a], f, "needs at least two nodes");
    for (Eigen::Index i = 1; i < ax.size(); ++i)
      if (!(ax[i] > ax[i - 1])) spec_error(source, axes[a], f, "must be strictly increasing");
    s.axes.emplace_back(ax.data(), ax.data() + ax.size());
    total *= static_cast<std::size_t>(ax.size());
  }
  const YAML::Node nodes = grid["nodes"];
  if (!nodes || !nodes.IsSequence() || nodes.size() != total)
    spec_error(source, nodes ? nodes : grid, "grid.nodes",
               "expected " + std::to_string(total) + " nodes for a rectangular grid");
  const AmbientSpace space = AmbientSpace::make(s.c, s.n);
  const Eigen::Index d = space.real_dim();
  const auto kk = static_cast<std::size_t>(s.k);
  for (std::size_t i = 0; i < total; ++i) {
    const std::string f = "grid.nodes[" + std::to_string(i) + "]";
    const YAML::Node nd = nodes[i];
    GridNode g;
    g.value = detail::spec_vector(source, nd["value"], f + ".value", d);
    g.d1 = detail::spec_vectors(source, nd["d1"], f + ".d1", kk, d);
    g.d2 = detail::spec_vectors(source, nd["d2"], f + ".d2", kk * kk, d);
    if (space.curved()) {
      const double zz = inner(space, g.value, g.value);
      if (std::abs(zz - space.total_space_norm()) > 1e-6)
        spec_error(source, nd["value"], f + ".value", "representative has <z,z> = " + std::to_string(zz));
    }
    s.nodes.push_back(std::move(g));
  }
  return s;
}

inline ImmersionSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot read spec file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str(), path);
}

namespace detail {

template <class S>
S smoothstep5(const S& t) {
  if (value_of(t) <= 0.0) return S(0.0);
  if (value_of(t) >= 1.0) return S(1.0);
  return t * t * t * (S(10.0) - S(15.0) * t + S(6.0) * t * t);
}

/// C2 interpolant: second-order Taylor polynomials at the cell corners,
/// blended with quintic smoothstep weights.
struct TaylorBlend {
  std::vector<std::vector<double>> axes;
  std::vector<GridNode> nodes;
  AmbientSpace space;

  template <class S>
  std::vector<S> operator()(const std::vector<S>& u) const {
    const std::size_t k = axes.size();
    std::vector<std::size_t> cell(k);
    std::vector<S> t(k);
    for (std::size_t a = 0; a < k; ++a) {
      const auto& ax = axes[a];
      const double x = value_of(u[a]);
      std::size_t j = static_cast<std::size_t>(std::upper_bound(ax.begin(), ax.end(), x) - ax.begin());
      j = std::clamp<std::size_t>(j, 1, ax.size() - 1) - 1;
      cell[a] = j;
      t[a] = smoothstep5(S((u[a] - S(ax[j])) / S(ax[j + 1] - ax[j])));
    }
    const std::size_t d = nodes.front().value.size();
    std::vector<S> out(d, S(0.0));
    for (std::size_t corner = 0; corner < (std::size_t{1} << k); ++corner) {
      std::size_t idx = 0;
      S w(1.0);
      std::vector<S> delta(k);
      for (std::size_t a = 0; a < k; ++a) {
        const bool up = (corner >> a) & 1u;
        const std::size_t j = cell[a] + (up ? 1 : 0);
        idx = idx * axes[a].size() + j;
        w = w * (up ? t[a] : S(1.0) - t[a]);
        delta[a] = u[a] - S(axes[a][j]);
      }
      const GridNode& g = nodes[idx];
      for (std::size_t i = 0; i < d; ++i) {
        S v(g.value[static_cast<Eigen::Index>(i)]);
        for (std::size_t a = 0; a < k; ++a) {
          v = v + S(g.d1[a][static_cast<Eigen::Index>(i)]) * delta[a];
          for (std::size_t b = 0; b < k; ++b)
            v = v + S(0.5 * g.d2[a * k + b][static_cast<Eigen::Index>(i)]) * delta[a] * delta[b];
        }
        out[i] = out[i] + w * v;
      }
    }
    if (space.curved()) {
      const Vec g = space.metric_diag();
      S zz(0.0);
      for (std::size_t i = 0; i < d; ++i) zz = zz + S(g[static_cast<Eigen::Index>(i)]) * out[i] * out[i];
      using std::sqrt;
      const S s = sqrt(S(space.total_space_norm()) * zz);
      for (auto& x : out) x = x / s;
    }
    return out;
  }
};

}  // namespace detail

/// Resolve a spec to a subject (immersion plus sampling metadata).
inline Subject subject_from_spec(const ImmersionSpec& s, int samples = 4) {
  CatalogEntry e;
  if (s.catalog) {
    e = catalog_get(*s.catalog);
    const AmbientSpace& sp = e.immersion.space();
    if (sp.c != s.c || sp.n != s.n || e.immersion.k() != s.k)
      throw Error(ErrorKind::InvalidInput, "spec model (c, n, k) does not match catalog entry " + e.name);
  } else {
    const AmbientSpace space = AmbientSpace::make(s.c, s.n);
    detail::TaylorBlend tb{s.axes, s.nodes, space};
    e.name = s.name;
    e.immersion = make_immersion(space, s.k, tb, s.name);
    const auto k = static_cast<Eigen::Index>(s.k);
    e.lo.resize(k);
    e.hi.resize(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      e.lo[a] = s.axes[static_cast<std::size_t>(a)].front();
      e.hi[a] = s.axes[static_cast<std::size_t>(a)].back();
    }
    e.default_point = 0.5 * (e.lo + e.hi);
  }
  if (s.point) e.default_point = *s.point;
  if (s.mode == JetMode::FiniteDifference) e.immersion = e.immersion.with_mode(JetMode::FiniteDifference, s.fd_step);
  Subject sub = subject_from_catalog(e, samples);
  if (!s.catalog) sub.name = s.name;
  return sub;
}

}  // namespace holab
