#include "nesc/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nesc {

namespace {

[[noreturn]] void fail(const YAML::Node& n, const std::string& what) {
  const YAML::Mark m = n.Mark();
  throw ConfigError(what, m.is_null() ? -1 : m.line + 1, m.is_null() ? -1 : m.column + 1);
}

void require_map(const YAML::Node& n, const std::string& where) {
  if (!n.IsMap()) fail(n, where + " must be a mapping");
}

void check_keys(const YAML::Node& n, const std::string& where, const std::set<std::string>& allowed) {
  require_map(n, where);
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + " must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, "cannot parse " + what + " from '" + n.Scalar() + "'");
  }
}

template <typename T>
void read(const YAML::Node& parent, const char* key, T& out, const std::string& where) {
  if (const YAML::Node n = parent[key]) out = scalar<T>(n, where + "." + key);
}

void read_vec3(const YAML::Node& parent, const char* key, Vector3d& out, const std::string& where) {
  const YAML::Node n = parent[key];
  if (!n) return;
  if (!n.IsSequence() || n.size() != 3) fail(n, where + "." + key + " must be a list of three numbers");
  for (int i = 0; i < 3; ++i) out[i] = scalar<double>(n[i], where + "." + key);
}

template <typename T>
void read_list(const YAML::Node& parent, const char* key, std::vector<T>& out, const std::string& where) {
  const YAML::Node n = parent[key];
  if (!n) return;
  if (!n.IsSequence()) fail(n, where + "." + key + " must be a list");
  out.clear();
  for (const auto& v : n) out.push_back(scalar<T>(v, where + "." + key));
}

void apply_shape(ShapeConfig& s, const YAML::Node& n) {
  check_keys(n, "shape", {"kind", "radius", "semi_axes", "center", "chebyshev"});
  read(n, "kind", s.kind, "shape");
  read(n, "radius", s.radius, "shape");
  read_vec3(n, "semi_axes", s.semi_axes, "shape");
  read_vec3(n, "center", s.center, "shape");
  read_list(n, "chebyshev", s.chebyshev, "shape");
  if (s.kind != "sphere" && s.kind != "ellipsoid" && s.kind != "revolution")
    fail(n["kind"] ? n["kind"] : n, "shape.kind must be sphere, ellipsoid or revolution");
}

void apply_window(WindowConfig& w, const YAML::Node& n) {
  check_keys(n, "window", {"center", "epsilon", "a"});
  read_vec3(n, "center", w.center, "window");
  read(n, "epsilon", w.epsilon, "window");
  read(n, "a", w.a, "window");
}

void apply_root(RunConfig& cfg, const YAML::Node& root) {
  if (root.IsNull()) return;
  check_keys(root, "config",
             {"shape", "window", "method", "greens", "xray", "asymptotic", "simulate", "compare", "output", "seed",
              "jobs"});
  if (const YAML::Node n = root["shape"]) apply_shape(cfg.shape, n);
  if (const YAML::Node n = root["window"]) apply_window(cfg.window, n);
  read(root, "method", cfg.method, "config");
  read(root, "seed", cfg.seed, "config");
  read(root, "jobs", cfg.jobs, "config");
  if (const YAML::Node n = root["greens"]) {
    check_keys(n, "greens", {"mesh", "mu", "h0", "levels", "refinement"});
    read(n, "mesh", cfg.greens.mesh, "greens");
    read(n, "mu", cfg.greens.mu, "greens");
    read(n, "h0", cfg.greens.h0, "greens");
    read(n, "levels", cfg.greens.levels, "greens");
    read_list(n, "refinement", cfg.greens.refinement, "greens");
  }
  if (const YAML::Node n = root["xray"]) {
    check_keys(n, "xray", {"a", "n_r", "n_theta"});
    read(n, "a", cfg.xray.a, "xray");
    read(n, "n_r", cfg.xray.n_r, "xray");
    read(n, "n_theta", cfg.xray.n_theta, "xray");
  }
  if (const YAML::Node n = root["asymptotic"]) {
    check_keys(n, "asymptotic", {"sweep", "field_points", "pairing_n_r", "pairing_n_theta"});
    if (const YAML::Node sw = n["sweep"]) {
      check_keys(sw, "asymptotic.sweep", {"lo", "hi", "n"});
      SweepConfig s;
      read(sw, "lo", s.lo, "asymptotic.sweep");
      read(sw, "hi", s.hi, "asymptotic.sweep");
      read(sw, "n", s.n, "asymptotic.sweep");
      cfg.asymptotic.sweep = s;
    }
    if (const YAML::Node fp = n["field_points"]) {
      if (!fp.IsSequence()) fail(fp, "asymptotic.field_points must be a list of points");
      cfg.asymptotic.field_points.clear();
      for (const auto& p : fp) {
        if (!p.IsSequence() || p.size() != 3) fail(p, "field point must be a list of three numbers");
        cfg.asymptotic.field_points.emplace_back(scalar<double>(p[0], "field point"), scalar<double>(p[1], "field point"),
                                                 scalar<double>(p[2], "field point"));
      }
    }
    read(n, "pairing_n_r", cfg.asymptotic.pairing_n_r, "asymptotic");
    read(n, "pairing_n_theta", cfg.asymptotic.pairing_n_theta, "asymptotic");
  }
  if (const YAML::Node n = root["simulate"]) {
    check_keys(n, "simulate", {"paths", "dt", "max_steps", "start", "start_point", "extrapolate", "reflection"});
    read(n, "paths", cfg.simulate.paths, "simulate");
    read(n, "dt", cfg.simulate.dt, "simulate");
    read(n, "max_steps", cfg.simulate.max_steps, "simulate");
    read(n, "start", cfg.simulate.start, "simulate");
    read_vec3(n, "start_point", cfg.simulate.start_point, "simulate");
    read(n, "extrapolate", cfg.simulate.extrapolate, "simulate");
    read(n, "reflection", cfg.simulate.reflection, "simulate");
  }
  if (const YAML::Node n = root["compare"]) {
    check_keys(n, "compare", {"epsilons"});
    read_list(n, "epsilons", cfg.compare.epsilons, "compare");
  }
  if (const YAML::Node n = root["output"]) {
    check_keys(n, "output", {"json", "csv"});
    read(n, "json", cfg.output.json, "output");
    read(n, "csv", cfg.output.csv, "output");
  }
}

YAML::Node load(const std::string& text, const std::string& origin) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ": " + e.msg, e.mark.line + 1, e.mark.column + 1);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename F>
void with_origin(const std::string& origin, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(origin, 0) == 0) throw;
    throw ConfigError(origin + ": " + what, e.line(), e.column());
  }
}

void apply_section_file(RunConfig& cfg, const std::string& path, const std::string& section) {
  const std::string text = read_file(path);
  with_origin(path, [&] {
    const YAML::Node root = load(text, path);
    require_map(root, section + " file");
    if (root[section]) {
      apply_root(cfg, root);
    } else if (section == "shape") {
      apply_shape(cfg.shape, root);
    } else {
      apply_window(cfg.window, root);
    }
  });
}

}  // namespace

void RunConfig::validate() const {
  static const std::set<std::string> methods{"asymptotic", "simulate", "greens", "xray", "compare"};
  if (!methods.count(method)) throw ConfigError("method must be one of asymptotic, simulate, greens, xray, compare");
  if (shape.kind == "sphere" && !(shape.radius > 0.0)) throw ConfigError("shape.radius must be positive");
  if (shape.kind == "ellipsoid" && !(shape.semi_axes.minCoeff() > 0.0))
    throw ConfigError("shape.semi_axes must be positive");
  if (shape.kind == "revolution" && shape.chebyshev.empty())
    throw ConfigError("shape.chebyshev is required for a surface of revolution");
  if (!(window.epsilon > 0.0)) throw ConfigError("window.epsilon must be positive");
  if (!(window.a > 0.0 && window.a <= 1.0)) throw ConfigError("window.a must lie in (0, 1]");
  if (greens.mesh < 4) throw ConfigError("greens.mesh must be at least 4");
  if (!(greens.mu > 0.0 && greens.mu <= 1.0)) throw ConfigError("greens.mu must lie in (0, 1]");
  if (greens.levels < 2) throw ConfigError("greens.levels must be at least 2");
  for (int m : greens.refinement)
    if (m < 4) throw ConfigError("greens.refinement entries must be at least 4");
  if (!(xray.a > 0.0 && xray.a <= 1.0)) throw ConfigError("xray.a must lie in (0, 1]");
  if (xray.n_r < 2 || xray.n_theta < 4) throw ConfigError("xray resolution too small");
  if (asymptotic.pairing_n_r < 2 || asymptotic.pairing_n_theta < 4)
    throw ConfigError("asymptotic pairing resolution too small");
  if (asymptotic.sweep) {
    const SweepConfig& s = *asymptotic.sweep;
    if (!(s.lo > 0.0 && s.hi >= s.lo && s.n >= 1)) throw ConfigError("asymptotic.sweep needs 0 < lo <= hi and n >= 1");
  }
  if (simulate.paths < 1) throw ConfigError("simulate.paths must be at least 1");
  if (simulate.dt < 0.0) throw ConfigError("simulate.dt must be non-negative");
  if (simulate.max_steps < 0) throw ConfigError("simulate.max_steps must be non-negative");
  if (simulate.start != "uniform" && simulate.start != "fixed")
    throw ConfigError("simulate.start must be uniform or fixed");
  if (simulate.reflection != "specular") throw ConfigError("simulate.reflection must be specular");
  for (double e : compare.epsilons)
    if (!(e > 0.0)) throw ConfigError("compare.epsilons must be positive");
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
  with_origin(origin, [&] { apply_root(cfg, load(text, origin)); });
}

void apply_config_file(RunConfig& cfg, const std::string& path) { apply_config_text(cfg, read_file(path), path); }

void apply_shape_file(RunConfig& cfg, const std::string& path) { apply_section_file(cfg, path, "shape"); }

void apply_window_file(RunConfig& cfg, const std::string& path) { apply_section_file(cfg, path, "window"); }

std::string to_yaml(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  auto vec3 = [&](const Vector3d& v) {
    out << YAML::Flow << YAML::BeginSeq << v[0] << v[1] << v[2] << YAML::EndSeq;
  };
  out << YAML::BeginMap;
  out << YAML::Key << "method" << YAML::Value << c.method;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "jobs" << YAML::Value << c.jobs;

  out << YAML::Key << "shape" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << c.shape.kind;
  out << YAML::Key << "radius" << YAML::Value << c.shape.radius;
  out << YAML::Key << "semi_axes" << YAML::Value;
  vec3(c.shape.semi_axes);
  out << YAML::Key << "center" << YAML::Value;
  vec3(c.shape.center);
  out << YAML::Key << "chebyshev" << YAML::Value << YAML::Flow << c.shape.chebyshev;
  out << YAML::EndMap;

  out << YAML::Key << "window" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "center" << YAML::Value;
  vec3(c.window.center);
  out << YAML::Key << "epsilon" << YAML::Value << c.window.epsilon;
  out << YAML::Key << "a" << YAML::Value << c.window.a;
  out << YAML::EndMap;

  out << YAML::Key << "greens" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mesh" << YAML::Value << c.greens.mesh;
  out << YAML::Key << "mu" << YAML::Value << c.greens.mu;
  out << YAML::Key << "h0" << YAML::Value << c.greens.h0;
  out << YAML::Key << "levels" << YAML::Value << c.greens.levels;
  out << YAML::Key << "refinement" << YAML::Value << YAML::Flow << c.greens.refinement;
  out << YAML::EndMap;

  out << YAML::Key << "xray" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "a" << YAML::Value << c.xray.a;
  out << YAML::Key << "n_r" << YAML::Value << c.xray.n_r;
  out << YAML::Key << "n_theta" << YAML::Value << c.xray.n_theta;
  out << YAML::EndMap;

  out << YAML::Key << "asymptotic" << YAML::Value << YAML::BeginMap;
  if (c.asymptotic.sweep) {
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "lo" << YAML::Value << c.asymptotic.sweep->lo;
    out << YAML::Key << "hi" << YAML::Value << c.asymptotic.sweep->hi;
    out << YAML::Key << "n" << YAML::Value << c.asymptotic.sweep->n;
    out << YAML::EndMap;
  }
  out << YAML::Key << "field_points" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : c.asymptotic.field_points) vec3(p);
  out << YAML::EndSeq;
  out << YAML::Key << "pairing_n_r" << YAML::Value << c.asymptotic.pairing_n_r;
  out << YAML::Key << "pairing_n_theta" << YAML::Value << c.asymptotic.pairing_n_theta;
  out << YAML::EndMap;

  out << YAML::Key << "simulate" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "paths" << YAML::Value << c.simulate.paths;
  out << YAML::Key << "dt" << YAML::Value << c.simulate.dt;
  out << YAML::Key << "max_steps" << YAML::Value << c.simulate.max_steps;
  out << YAML::Key << "start" << YAML::Value << c.simulate.start;
  out << YAML::Key << "start_point" << YAML::Value;
  vec3(c.simulate.start_point);
  out << YAML::Key << "extrapolate" << YAML::Value << c.simulate.extrapolate;
  out << YAML::Key << "reflection" << YAML::Value << c.simulate.reflection;
  out << YAML::EndMap;

  out << YAML::Key << "compare" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "epsilons" << YAML::Value << YAML::Flow << c.compare.epsilons;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "json" << YAML::Value << c.output.json;
  out << YAML::Key << "csv" << YAML::Value << c.output.csv;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

SweepConfig parse_sweep(const std::string& spec) {
  SweepConfig s;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> s.lo >> c1 >> s.hi >> c2 >> s.n) || c1 != ':' || c2 != ':' || !in.eof())
    throw ConfigError("sweep must look like lo:hi:n, got '" + spec + "'");
  if (!(s.lo > 0.0 && s.hi >= s.lo && s.n >= 1)) throw ConfigError("sweep needs 0 < lo <= hi and n >= 1");
  return s;
}

Surface make_surface(const ShapeConfig& shape) {
  if (shape.kind == "sphere") return Surface::sphere(shape.radius, shape.center);
  if (shape.kind == "ellipsoid") return Surface::ellipsoid(shape.semi_axes, shape.center);
  if (shape.kind == "revolution") return Surface::revolution(shape.chebyshev, shape.center);
  throw ConfigError("unknown shape kind " + shape.kind);
}

WindowSpec make_window(const Surface& s, const WindowConfig& w) {
  WindowSpec spec;
  spec.center_u = s.project(w.center).u;
  spec.epsilon = w.epsilon;
  spec.a = w.a;
  return spec;
}

unsigned resolve_jobs(unsigned jobs) { return jobs > 0 ? jobs : default_jobs(); }

}  // namespace nesc
