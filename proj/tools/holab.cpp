// holab command-line front end.
#include "holab/crtype.hpp"
#include "holab/holonomy.hpp"
#include "holab/report.hpp"
#include "holab/spec_io.hpp"
#include "holab/transport.hpp"
#include "holab/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace holab;

namespace {

struct Common {
  std::string example;
  std::string spec;
  std::string point;
  std::string format = "json";
  std::string out;
  bool timings = false;
};

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidInput, what + ": cannot parse '" + tok + "' as a number");
    }
  }
  if (v.empty()) throw Error(ErrorKind::InvalidInput, what + ": empty list");
  return v;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

Subject load_subject(const Common& c, int samples = 4) {
  if (c.example.empty() == c.spec.empty())
    throw Error(ErrorKind::InvalidInput, "give exactly one of --example and --spec");
  Subject s = c.example.empty() ? subject_from_spec(load_spec(c.spec), samples)
                                : subject_from_catalog(catalog_get(c.example), samples);
  if (!c.point.empty()) {
    const Vec u = to_vec(parse_list(c.point, "--point"));
    if (u.size() != s.immersion.k())
      throw Error(ErrorKind::InvalidInput, "--point needs " + std::to_string(s.immersion.k()) + " coordinates");
    s.base = u;
    if (!s.samples.empty()) s.samples.front() = u;
  }
  return s;
}

Json inputs_json(const Common& c, const Subject& s) {
  Json j;
  if (!c.example.empty()) j["example"] = c.example;
  if (!c.spec.empty()) j["spec"] = c.spec;
  j["model"] = Json{{"c", num(s.immersion.space().c)}, {"n", s.immersion.space().n}};
  j["k"] = s.immersion.k();
  j["jet"] = to_string(s.immersion.mode());
  j["point"] = vec_json(s.base);
  return j;
}

void emit(const Common& c, const Json& doc) {
  const std::string text = render(doc, parse_format(c.format));
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidInput, "cannot write " + c.out);
  f << text;
}

unsigned thread_count() {
  const char* env = std::getenv("HOLAB_THREADS");
  if (!env || !*env) return 1;
  const long n = std::strtol(env, nullptr, 10);
  if (n > 0) return static_cast<unsigned>(n);
  return std::max(1u, std::thread::hardware_concurrency());
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--example", c.example, "catalog entry name");
  app->add_option("--spec", c.spec, "immersion spec file (YAML)");
  app->add_option("--point", c.point, "parameter point u1,u2,...");
  app->add_option("--format", c.format, "json | csv | text")->check(CLI::IsMember({"json", "csv", "text"}));
  app->add_option("--out", c.out, "write the report to FILE");
  app->add_flag("--timings", c.timings, "include wall-clock timings (makes output non-reproducible)");
}

int exit_code_for(ErrorKind k) { return k == ErrorKind::NonconvergentLog ? 1 : 2; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holab: normal holonomy of submanifolds in complex space forms"};
  app.require_subcommand(1);
  Common c;
  double tol = 0.0;
  int steps = 24;
  std::uint64_t seed = 7;
  std::string radii, check = "all", w0 = "jtm", path, vector;
  int samples = 4, loops = 20;

  auto* classify_cmd = app.add_subcommand("classify", "CR type at one or more points");
  add_common(classify_cmd, c);
  classify_cmd->add_option("--tol", tol, "angle tolerance (0 = default for the jet mode)");
  std::vector<std::string> extra_points;
  classify_cmd->add_option("--points", extra_points, "additional points (u1,u2,... each)");

  auto* curv_cmd = app.add_subcommand("curvature", "normal curvature matrices at a point");
  add_common(curv_cmd, c);

  auto* tr_cmd = app.add_subcommand("transport", "parallel transport of a normal vector along a polyline");
  add_common(tr_cmd, c);
  tr_cmd->add_option("--path", path, "polyline vertices after --point: a1,a2;b1,b2;...")->required();
  tr_cmd->add_option("--vector", vector, "initial vector in normal-frame coordinates (default e1)");
  tr_cmd->add_option("--steps", steps, "RK4 steps per segment");

  auto* hol_cmd = app.add_subcommand("holonomy", "restricted normal holonomy algebra estimate");
  add_common(hol_cmd, c);
  hol_cmd->add_option("--radius-schedule", radii, "plaquette sides, e.g. 0.1,0.05,0.025");
  hol_cmd->add_option("--steps", steps, "RK4 steps per plaquette side");
  hol_cmd->add_option("--seed", seed, "seed for plaquette placement and block refinement");

  auto* ver_cmd = app.add_subcommand("verify", "run theorem checks");
  add_common(ver_cmd, c);
  ver_cmd->add_option("--check", check, "check name or 'all'");
  ver_cmd->add_option("--tol", tol, "override tolerance of the main identities");
  ver_cmd->add_option("--steps", steps, "RK4 steps per loop segment");
  ver_cmd->add_option("--seed", seed, "seed for loops and random pairs");
  ver_cmd->add_option("--radius-schedule", radii, "plaquette sides for holonomy estimates");
  ver_cmd->add_option("--w0", w0, "candidate bundle for reduction-conditions");
  ver_cmd->add_option("--samples", samples, "sample points per check");
  ver_cmd->add_option("--loops", loops, "loops per transport check");

  auto* cat_cmd = app.add_subcommand("catalog", "list catalog entries and checks");
  cat_cmd->add_option("--format", c.format, "json | csv | text")->check(CLI::IsMember({"json", "csv", "text"}));
  cat_cmd->add_option("--out", c.out, "write the listing to FILE");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const auto t0 = Clock::now();
  try {
    Json doc;
    bool pass = true;
    if (*cat_cmd) {
      doc["command"] = "catalog";
      Json entries = Json::array();
      for (const auto& e : catalog()) {
        const AmbientSpace& sp = e.immersion.space();
        Json j{{"name", e.name},
               {"description", e.description},
               {"model", Json{{"c", num(sp.c)}, {"n", sp.n}}},
               {"k", e.immersion.k()},
               {"cr_label", to_string(e.truth.cr_label)},
               {"coisotropic", e.truth.coisotropic},
               {"default_point", vec_json(e.default_point)}};
        if (e.truth.expected_algebra_dim) j["expected_algebra_dim"] = *e.truth.expected_algebra_dim;
        if (e.truth.chain) j["chain"] = e.truth.chain->name;
        entries.push_back(j);
      }
      doc["residuals"] = Json{{"entries", entries}, {"checks", check_names()}};
      doc["pass"] = true;
      emit(c, doc);
      return 0;
    }

    if (*classify_cmd) {
      const Subject s = load_subject(c);
      if (tol != 0.0) check_angle_tolerance(tol);
      doc["command"] = "classify";
      doc["inputs"] = inputs_json(c, s);
      Json pts = Json::array();
      std::vector<Vec> us{s.base};
      for (const auto& p : extra_points) us.push_back(to_vec(parse_list(p, "--points")));
      for (const Vec& u : us) {
        if (u.size() != s.immersion.k()) throw Error(ErrorKind::InvalidInput, "point dimension mismatch");
        Json j = to_json(classify(s.immersion, u, tol));
        j["point"] = vec_json(u);
        pts.push_back(j);
      }
      Json res{{"points", pts}};
      if (us.size() > 1) res["overall"] = to_string(classify_samples(s.immersion, us, tol).label);
      doc["residuals"] = res;
    } else if (*curv_cmd) {
      const Subject s = load_subject(c);
      doc["command"] = "curvature";
      doc["inputs"] = inputs_json(c, s);
      const NormalCurvature nc = normal_curvature(s.immersion, s.base);
      const FrameData& f = nc.data.frame;
      Json pairs = Json::array();
      for (int i = 0; i < nc.kt(); ++i)
        for (int j = i + 1; j < nc.kt(); ++j)
          pairs.push_back(Json{{"i", i}, {"j", j}, {"matrix", mat_json(nc.r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])}});
      doc["residuals"] = Json{{"tangent_frame", mat_json(f.tangent)},
                            {"normal_frame", mat_json(f.normal)},
                            {"normal_rank", f.m()},
                            {"max_norm", num(nc.max_norm())},
                            {"skew_defect", num(nc.skew_residual())},
                            {"alpha_norm", num(nc.data.alpha_norm())},
                            {"r_perp", pairs}};
    } else if (*tr_cmd) {
      const Subject s = load_subject(c);
      doc["command"] = "transport";
      Json in = inputs_json(c, s);
      std::vector<Vec> verts{s.base};
      std::stringstream ss(path);
      std::string tok;
      while (std::getline(ss, tok, ';')) {
        const Vec v = to_vec(parse_list(tok, "--path"));
        if (v.size() != s.immersion.k()) throw Error(ErrorKind::InvalidInput, "--path vertex dimension mismatch");
        verts.push_back(v);
      }
      const ParamCurve curve = ParamCurve::polyline(verts, steps);
      const FrameData f0 = frame_at(s.immersion, s.base);
      Vec coords = Vec::Unit(f0.m(), 0);
      if (!vector.empty()) {
        coords = to_vec(parse_list(vector, "--vector"));
        if (coords.size() != f0.m())
          throw Error(ErrorKind::InvalidInput, "--vector needs " + std::to_string(f0.m()) + " normal coordinates");
      }
      const Vec xi0 = f0.normal * coords;
      const Vec xi1 = parallel_transport(s.immersion, curve, xi0);
      const FrameData f1 = frame_at(s.immersion, curve.end());
      in["path"] = path;
      in["steps"] = steps;
      in["vector"] = vec_json(coords);
      doc["inputs"] = in;
      Json res{{"initial", vec_json(xi0)},
               {"transported", vec_json(xi1)},
               {"transported_frame_coords", vec_json(f1.normal_coords(xi1))},
               {"norm_change", num(std::abs(std::sqrt(inner(f1.geo.g, xi1, xi1)) - std::sqrt(inner(f0.geo.g, xi0, xi0))))}};
      if ((curve.end() - curve.start()).norm() < 1e-14) {
        const Mat g = loop_transport(s.immersion, curve);
        res["loop_matrix"] = mat_json(g);
        res["orthogonality_defect"] = num(orthogonality_defect(g));
      }
      doc["residuals"] = res;
    } else if (*hol_cmd) {
      const Subject s = load_subject(c);
      HolonomyConfig cfg;
      if (!radii.empty()) cfg.radii = parse_list(radii, "--radius-schedule");
      cfg.steps = steps;
      cfg.seed = seed;
      cfg.periods = s.period;
      doc["command"] = "holonomy";
      Json in = inputs_json(c, s);
      in["radius_schedule"] = vec_json(cfg.radii);
      in["steps"] = steps;
      in["seed"] = seed;
      doc["inputs"] = in;
      doc["residuals"] = to_json(holonomy_algebra(s.immersion, s.base, cfg));
    } else if (*ver_cmd) {
      const Subject s = load_subject(c, samples);
      VerifyOptions o;
      o.tol = tol;
      o.loops = loops;
      o.seed = seed;
      o.steps = steps;
      o.w0 = w0;
      o.holonomy.seed = seed;
      o.holonomy.steps = steps;
      o.holonomy.periods = s.period;
      if (!radii.empty()) o.holonomy.radii = parse_list(radii, "--radius-schedule");
      doc["command"] = "verify";
      Json in = inputs_json(c, s);
      in["check"] = check;
      in["seed"] = seed;
      in["steps"] = steps;
      in["samples"] = samples;
      in["loops"] = loops;
      in["w0"] = w0;
      if (tol != 0.0) in["tol"] = num(tol);
      doc["inputs"] = in;
      std::vector<CheckReport> reps;
      Json timing = Json::object();
      if (check == "all") {
        reps = run_all_checks(s, o, thread_count());
      } else {
        const auto t1 = Clock::now();
        reps.push_back(run_check(check, s, o));
        timing[check] = ms_since(t1);
      }
      Json arr = Json::array();
      int ran = 0, skipped = 0;
      for (const auto& r : reps) {
        arr.push_back(to_json(r));
        if (r.status == CheckStatus::Skipped) {
          ++skipped;
          continue;
        }
        ++ran;
        pass = pass && r.pass;
      }
      doc["residuals"] = Json{{"checks_run", ran}, {"checks_skipped", skipped}, {"reports", arr}};
      if (c.timings && !timing.empty()) doc["timings_ms_per_check"] = timing;
    }
    doc["pass"] = pass;
    if (c.timings) doc["timings"] = Json{{"wall_ms", ms_since(t0)}};
    emit(c, doc);
    return pass ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "holab: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "holab: " << e.what() << "\n";
    return 2;
  }
}
