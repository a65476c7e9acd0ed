#pragma once

#include "holab/crtype.hpp"
#include "holab/holonomy.hpp"
#include "holab/verify.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace holab {

using Json = nlohmann::ordered_json;

enum class Format { Json, Csv, Text };

inline Format parse_format(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  if (s == "text") return Format::Text;
  throw Error(ErrorKind::InvalidInput, "unknown format '" + s + "' (json, csv, text)");
}

/// Round to 12 significant digits so that output does not depend on the
/// last few bits of a computation.
inline double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x == 0.0 ? 0.0 : x;  // also folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline Json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return round12(x);
}

inline Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

inline Json vec_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

/// Row-major matrix with explicit dimensions.
inline Json mat_json(const Mat& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(num(m(i, j)));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Json to_json(const CRClassification& c) {
  return Json{{"label", to_string(c.label)},
              {"dim_D", c.dim_D},
              {"dim_D_perp", c.dim_Dperp},
              {"coisotropic", c.coisotropic},
              {"coisotropic_angle", num(c.coisotropic_angle)},
              {"anti_invariance_angle", num(c.anti_invariance_angle)},
              {"tolerance", num(c.tol)},
              {"angles", vec_json(c.angles)}};
}

inline Json to_json(const CheckReport& r) {
  Json items = Json::array();
  for (const auto& it : r.items)
    items.push_back(Json{{"name", it.name}, {"residual", num(it.residual)}, {"tolerance", num(it.tolerance)},
                         {"pass", it.pass()}});
  Json metrics = Json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = num(v);
  Json details = Json::array();
  for (const auto& d : r.details) details.push_back(Json{{"where", d.where}, {"item", d.item}, {"value", num(d.value)}});
  Json j{{"check_name", r.check_name},
         {"subject", r.subject},
         {"status", to_string(r.status)},
         {"pass", r.pass},
         {"points_sampled", r.points_sampled},
         {"max_residual", num(r.max_residual)},
         {"tolerance", num(r.tolerance)}};
  if (!r.message.empty()) j["message"] = r.message;
  j["items"] = items;
  j["metrics"] = metrics;
  j["details"] = details;
  return j;
}

inline Json to_json(const HolonomyEstimate& e) {
  Json gens = Json::array();
  for (const auto& g : e.generators) gens.push_back(mat_json(g));
  Json alg = Json::array();
  for (const auto& g : e.algebra) alg.push_back(mat_json(g));
  Json blocks = Json::array();
  for (const auto& b : e.blocks) blocks.push_back(Json{{"dim", b.dim}, {"trivial", b.trivial}, {"basis", mat_json(b.basis)}});
  return Json{{"base", vec_json(e.base)},
              {"normal_rank", e.normal_frame.cols()},
              {"algebra_dim", e.dim()},
              {"flat", e.flat},
              {"loops", e.loops},
              {"subdivided", e.subdivided},
              {"skipped_period_loops", e.skipped_period_loops},
              {"orthogonality_defect", num(e.orthogonality)},
              {"skew_defect", num(e.skew)},
              {"closure_residual", num(e.closure)},
              {"singular_values", vec_json(e.singular_values)},
              {"algebra", alg},
              {"blocks", blocks},
              {"generators", gens}};
}

namespace detail {

inline std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v.get<double>());
    return buf;
  }
  return v.dump();
}

inline void flatten(const Json& j, const std::string& path, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
  } else if (j.is_array()) {
    if (j.empty()) out.emplace_back(path, "[]");
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", out);
  } else {
    out.emplace_back(path, scalar_text(j));
  }
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string r = "\"";
  for (char c : s) r += c == '"' ? std::string("\"\"") : std::string(1, c);
  return r + "\"";
}

}  // namespace detail

/// Serialize one report document. Numbers are already rounded by num().
inline std::string render(const Json& doc, Format f) {
  switch (f) {
    case Format::Json: return doc.dump(2) + "\n";
    case Format::Csv: {
      std::vector<std::pair<std::string, std::string>> rows;
      detail::flatten(doc, "", rows);
      std::string s = "key,value\n";
      for (const auto& [k, v] : rows) s += detail::csv_field(k) + "," + detail::csv_field(v) + "\n";
      return s;
    }
    case Format::Text: {
      std::vector<std::pair<std::string, std::string>> rows;
      detail::flatten(doc, "", rows);
      std::string s;
      for (const auto& [k, v] : rows) s += k + " = " + v + "\n";
      return s;
    }
  }
  return {};
}

}  // namespace holab
