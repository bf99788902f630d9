#include "nesc/asymptotics.hpp"
#include "nesc/brownian.hpp"
#include "nesc/config.hpp"
#include "nesc/geometry.hpp"
#include "nesc/greens.hpp"
#include "nesc/xray.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

using json = nlohmann::ordered_json;
using namespace nesc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAcceptance = 4;
constexpr const char* kSchemaVersion = "1.0";

json vec(const Vector3d& v) { return json::array({v[0], v[1], v[2]}); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_json(const RunConfig& c) {
  json j;
  j["method"] = c.method;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["shape"] = {{"kind", c.shape.kind},
                {"radius", c.shape.radius},
                {"semi_axes", vec(c.shape.semi_axes)},
                {"center", vec(c.shape.center)},
                {"chebyshev", c.shape.chebyshev}};
  j["window"] = {{"center", vec(c.window.center)}, {"epsilon", c.window.epsilon}, {"a", c.window.a}};
  j["greens"] = {{"mesh", c.greens.mesh},
                 {"mu", c.greens.mu},
                 {"h0", c.greens.h0},
                 {"levels", c.greens.levels},
                 {"refinement", c.greens.refinement}};
  j["xray"] = {{"a", c.xray.a}, {"n_r", c.xray.n_r}, {"n_theta", c.xray.n_theta}};
  json asym;
  if (c.asymptotic.sweep)
    asym["sweep"] = {{"lo", c.asymptotic.sweep->lo}, {"hi", c.asymptotic.sweep->hi}, {"n", c.asymptotic.sweep->n}};
  asym["field_points"] = json::array();
  for (const auto& p : c.asymptotic.field_points) asym["field_points"].push_back(vec(p));
  asym["pairing_n_r"] = c.asymptotic.pairing_n_r;
  asym["pairing_n_theta"] = c.asymptotic.pairing_n_theta;
  j["asymptotic"] = asym;
  j["simulate"] = {{"paths", c.simulate.paths},
                   {"dt", c.simulate.dt},
                   {"max_steps", c.simulate.max_steps},
                   {"start", c.simulate.start},
                   {"start_point", vec(c.simulate.start_point)},
                   {"extrapolate", c.simulate.extrapolate},
                   {"reflection", c.simulate.reflection}};
  j["compare"] = {{"epsilons", c.compare.epsilons}};
  j["output"] = {{"json", c.output.json}, {"csv", c.output.csv}};
  return j;
}

json envelope(const std::string& command, const RunConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["time_convention"] = "generator Delta; standard Brownian motion (generator Delta/2) takes twice as long";
  j["config"] = config_json(cfg);
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

void emit(const json& j, const RunConfig& cfg) {
  const std::string text = j.dump(2) + "\n";
  if (cfg.output.json.empty()) {
    std::cout << text;
  } else {
    write_text(cfg.output.json, text);
  }
}

std::string csv_number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// Leading-order MFPT, used to size simulations.
double leading_mfpt(double volume, const WindowConfig& w) {
  return volume * K_a(w.a) / (4.0 * w.a * w.epsilon * kPi * kPi);
}

ExpansionOptions expansion_options(const RunConfig& cfg) {
  ExpansionOptions o;
  o.mesh_theta = cfg.greens.mesh;
  o.pairing_resolution = {cfg.asymptotic.pairing_n_r, cfg.asymptotic.pairing_n_theta};
  o.regular.mu = cfg.greens.mu;
  o.regular.h0 = cfg.greens.h0;
  o.regular.levels = cfg.greens.levels;
  o.jobs = resolve_jobs(cfg.jobs);
  return o;
}

json breakdown_json(const MfptBreakdown& b) {
  return {{"leading", b.leading},
          {"log_term", b.log_term},
          {"regular_term", b.regular_term},
          {"f_term", b.f_term},
          {"log_pairing_term", b.log_pairing_term},
          {"curvature_diff_term", b.curvature_diff_term},
          {"total", b.total},
          {"error_order", b.error_order},
          {"units", {{"all_terms", "time"}}}};
}

json estimate_json(const MfptEstimate& e) {
  return {{"mean", number_or_null(e.mean)},
          {"std_error", number_or_null(e.std_error)},
          {"ci95", {number_or_null(e.ci_low), number_or_null(e.ci_high)}},
          {"n_paths", e.n_paths},
          {"n_absorbed", e.n_absorbed},
          {"n_censored", e.n_censored},
          {"reflections", e.reflections},
          {"double_reflections", e.double_reflections},
          {"dt", e.dt},
          {"valid", e.valid},
          {"warnings", e.warnings},
          {"units", {{"mean", "time"}, {"std_error", "time"}, {"ci95", "time"}, {"dt", "time"}}}};
}

// ---- commands ----

json geometry_inspect(const RunConfig& cfg) {
  const Surface s = make_surface(cfg.shape);
  const DomainMeasures m = measures(s);
  json j = envelope("geometry inspect", cfg);
  json r;
  r["kind"] = s.kind();
  r["measures"] = {{"volume", m.volume},
                   {"area", m.area},
                   {"volume_error", m.volume_error},
                   {"area_error", m.area_error},
                   {"units", {{"volume", "length^3"}, {"area", "length^2"}}}};
  const WindowSpec spec = make_window(s, cfg.window);
  const WindowChart chart(s, spec);
  const CurvatureData& k = chart.frame();
  r["window_center"] = {{"point", vec(chart.center().x)},
                        {"lambda1", k.lambda1},
                        {"lambda2", k.lambda2},
                        {"mean_curvature", k.mean},
                        {"e1", vec(k.e1)},
                        {"e2", vec(k.e2)},
                        {"outward_normal", vec(k.outward)},
                        {"units", {{"point", "length"}, {"lambda1", "1/length"}, {"lambda2", "1/length"},
                                   {"mean_curvature", "1/length"}}}};
  r["window"] = {{"epsilon", spec.epsilon},
                 {"a", spec.a},
                 {"area", chart.area()},
                 {"admissible_radius", chart.admissible_radius()},
                 {"units", {{"epsilon", "length"}, {"area", "length^2"}, {"admissible_radius", "length"}}}};
  j["result"] = r;
  return j;
}

json xray_verify(const RunConfig& cfg, bool* passed) {
  const IdentityReport rep = verify_identities(cfg.xray.a, {cfg.xray.n_r, cfg.xray.n_theta});
  json j = envelope("xray verify", cfg);
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"identity", c.identity},
                      {"computed", c.computed},
                      {"expected", number_or_null(c.expected)},
                      {"abs_error", c.abs_error},
                      {"tolerance", c.tolerance},
                      {"passed", c.passed}});
  j["result"] = {{"a", rep.a},
                 {"resolution", {{"n_r", rep.resolution.n_r}, {"n_theta", rep.resolution.n_theta}}},
                 {"K_a", K_a(rep.a)},
                 {"checks", checks},
                 {"max_abs_error", rep.max_abs_error()},
                 {"passed", rep.passed()},
                 {"units", {{"all", "dimensionless"}}}};
  *passed = rep.passed();
  return j;
}

json greens_solve(const RunConfig& cfg) {
  const Surface s = make_surface(cfg.shape);
  const unsigned jobs = resolve_jobs(cfg.jobs);
  const BoundaryPoint x = s.project(cfg.window.center);
  RegularPartOptions opt;
  opt.mu = cfg.greens.mu;
  opt.h0 = cfg.greens.h0;
  opt.levels = cfg.greens.levels;
  std::vector<int> meshes = cfg.greens.refinement;
  if (meshes.empty()) meshes = {std::max(4, cfg.greens.mesh / 2), std::max(4, 2 * cfg.greens.mesh / 3), cfg.greens.mesh};

  const GreenSolver solver(s, cfg.greens.mesh, jobs);
  const GreenDecomposition d = solve_boundary_green(solver, x, opt);
  const FResult f = solve_F(solver, x);
  const auto table = regular_part_table(s, x.u, meshes, opt, jobs);

  json j = envelope("greens solve", cfg);
  json rows = json::array();
  for (const auto& t : table)
    rows.push_back({{"mesh", t.mesh_theta},
                    {"nodes", t.nodes},
                    {"spacing", t.spacing},
                    {"R_star", t.r_star},
                    {"R_star_spread", t.r_star_spread},
                    {"rcond", t.rcond}});
  json samples = json::array();
  for (const auto& smp : d.samples)
    samples.push_back({{"direction", smp.direction == 0 ? "E1" : "E2"}, {"offset", smp.offset}, {"R", smp.value}});
  j["result"] = {{"x_star", vec(x.x)},
                 {"R_star", d.r_star},
                 {"R_star_spread", d.r_star_spread},
                 {"extrapolation", {{"model", "c0 + c1 t^mu"}, {"mu", d.mu}, {"exponent_is_numerical_choice", true}}},
                 {"mesh_size", solver.mesh().size()},
                 {"rcond", solver.rcond()},
                 {"F_star", f.f_star},
                 {"integral_F", f.integral},
                 {"volume", solver.volume()},
                 {"area", solver.mesh().area()},
                 {"samples", samples},
                 {"convergence_table", rows},
                 {"units",
                  {{"R_star", "1/length"},
                   {"F_star", "length^2"},
                   {"integral_F", "length^5"},
                   {"offset", "length"},
                   {"volume", "length^3"},
                   {"area", "length^2"}}}};
  if (!cfg.output.csv.empty()) {
    std::ostringstream csv;
    csv << "direction,offset,R\n";
    for (const auto& smp : d.samples)
      csv << (smp.direction == 0 ? "E1" : "E2") << "," << csv_number(smp.offset) << "," << csv_number(smp.value) << "\n";
    write_text(cfg.output.csv, csv.str());
  }
  return j;
}

std::vector<Vector3d> default_field_points(const ExpansionContext& ctx) {
  // along the diameter through the window centre, away from the window
  const Vector3d c = ctx.solver().surface().model().center();
  const Vector3d d = ctx.center().x - c;
  std::vector<Vector3d> pts;
  for (double t : {0.5, 0.0, -0.5, -0.9}) pts.push_back(c + t * d);
  return pts;
}

json mfpt_asymptotic(const RunConfig& cfg) {
  const Surface s = make_surface(cfg.shape);
  const WindowSpec spec = make_window(s, cfg.window);
  const ExpansionContext ctx(s, spec.center_u, spec.a, expansion_options(cfg));
  const double eps = cfg.window.epsilon;
  const ExpansionInput in = ctx.input(eps);
  const MfptBreakdown b = ctx.breakdown(eps);
  const AverageMfpt avg = ctx.average(eps);
  const FluxDensity flux = flux_prediction(in);

  json j = envelope("mfpt asymptotic", cfg);
  json r;
  r["input"] = {{"volume", in.volume},
                {"area", in.area},
                {"mean_curvature", in.mean_curvature},
                {"lambda1", in.lambda1},
                {"lambda2", in.lambda2},
                {"epsilon", in.epsilon},
                {"a", in.a},
                {"R_star", in.r_star},
                {"F_star", in.f_star},
                {"integral_F", ctx.f().integral},
                {"K_a", K_a(in.a)},
                {"pairing_log", {{"value", ctx.log_pairing().value}, {"error", ctx.log_pairing().error}}},
                {"pairing_inf", {{"value", ctx.inf_pairing().value}, {"error", ctx.inf_pairing().error}}},
                {"units",
                 {{"volume", "length^3"},
                  {"area", "length^2"},
                  {"mean_curvature", "1/length"},
                  {"lambda1", "1/length"},
                  {"lambda2", "1/length"},
                  {"epsilon", "length"},
                  {"a", "dimensionless"},
                  {"R_star", "1/length"},
                  {"F_star", "time"},
                  {"integral_F", "time*length^3"},
                  {"K_a", "dimensionless"},
                  {"pairing_log", "dimensionless"},
                  {"pairing_inf", "dimensionless"}}}};
  r["C_eps_a"] = breakdown_json(b);
  r["average_mfpt"] = {{"value", avg.value}, {"error_order", avg.error_order}, {"units", {{"value", "time"}}}};
  r["flux"] = {{"chart_integral", flux.chart_integral()},
               {"total_flux", flux.total_flux()},
               {"center_value", flux(Vector2d::Zero())},
               {"units", {{"chart_integral", "length"}, {"total_flux", "length^3"}, {"center_value", "length"}}}};

  std::vector<Vector3d> pts = cfg.asymptotic.field_points;
  if (pts.empty()) pts = default_field_points(ctx);
  json field = json::array();
  std::ostringstream csv;
  for (const auto& p : pts) {
    const FieldValue v = ctx.field(eps, p);
    field.push_back({{"x", vec(p)}, {"value", v.value}, {"guard_warning", v.guard_warning}});
  }
  r["field"] = {{"samples", field}, {"error_order", kConstantOrder}, {"units", {{"value", "time"}, {"x", "length"}}}};

  if (cfg.asymptotic.sweep) {
    const SweepConfig& sw = *cfg.asymptotic.sweep;
    json sweep = json::array();
    csv << "epsilon,leading,log_term,regular_term,f_term,log_pairing_term,curvature_diff_term,C_eps_a,average_mfpt\n";
    for (int i = 0; i < sw.n; ++i) {
      const double e = sw.n == 1 ? sw.lo : sw.lo + (sw.hi - sw.lo) * i / (sw.n - 1);
      const MfptBreakdown bi = ctx.breakdown(e);
      const double ai = ctx.average(e).value;
      sweep.push_back({{"epsilon", e}, {"C_eps_a", bi.total}, {"average_mfpt", ai}});
      csv << csv_number(e) << "," << csv_number(bi.leading) << "," << csv_number(bi.log_term) << ","
          << csv_number(bi.regular_term) << "," << csv_number(bi.f_term) << "," << csv_number(bi.log_pairing_term)
          << "," << csv_number(bi.curvature_diff_term) << "," << csv_number(bi.total) << "," << csv_number(ai)
          << "\n";
    }
    r["sweep"] = {{"rows", sweep}, {"units", {{"epsilon", "length"}, {"C_eps_a", "time"}, {"average_mfpt", "time"}}}};
  } else {
    csv << "x,y,z,mfpt,guard_warning\n";
    for (const auto& f : field)
      csv << csv_number(f["x"][0].get<double>()) << "," << csv_number(f["x"][1].get<double>()) << ","
          << csv_number(f["x"][2].get<double>()) << "," << csv_number(f["value"].get<double>()) << ","
          << (f["guard_warning"].get<bool>() ? 1 : 0) << "\n";
  }
  if (!cfg.output.csv.empty()) write_text(cfg.output.csv, csv.str());
  j["result"] = r;
  return j;
}

SimConfig sim_config(const RunConfig& cfg, double epsilon, double predicted) {
  SimConfig sc;
  sc.dt = cfg.simulate.dt > 0.0 ? cfg.simulate.dt : default_dt(epsilon);
  sc.n_paths = cfg.simulate.paths;
  sc.seed = cfg.seed;
  sc.max_steps = cfg.simulate.max_steps > 0 ? cfg.simulate.max_steps
                                            : static_cast<std::int64_t>(std::ceil(50.0 * predicted / sc.dt));
  sc.start = cfg.simulate.start == "fixed" ? StartMode::FixedPoint : StartMode::UniformInDomain;
  sc.start_point = cfg.simulate.start_point;
  sc.reflection = cfg.simulate.reflection;
  sc.jobs = resolve_jobs(cfg.jobs);
  return sc;
}

json simulate_json(const Surface& s, const RunConfig& cfg, double epsilon, std::vector<double>* times,
                   double* value, double* std_error) {
  WindowConfig wc = cfg.window;
  wc.epsilon = epsilon;
  const WindowChart chart(s, make_window(s, wc));
  const double predicted = leading_mfpt(measures(s).volume, wc);
  const SimConfig sc = sim_config(cfg, epsilon, predicted);
  const Target target = Target::window(chart);
  json r;
  r["epsilon"] = epsilon;
  r["start"] = cfg.simulate.start;
  if (cfg.simulate.extrapolate) {
    const ExtrapolatedEstimate e = estimate_mfpt_extrapolated(s, target, sc, predicted);
    r["fine"] = estimate_json(e.fine);
    r["coarse"] = estimate_json(e.coarse);
    r["extrapolated"] = {{"value", e.value},
                         {"std_error", e.std_error},
                         {"ci95", {e.ci_low, e.ci_high}},
                         {"scheme", "2 tau(dt) - tau(4 dt)"},
                         {"units", {{"value", "time"}, {"std_error", "time"}, {"ci95", "time"}}}};
    *value = e.value;
    *std_error = e.std_error;
  } else {
    const MfptEstimate e = estimate_mfpt(s, target, sc, times != nullptr, predicted);
    r["estimate"] = estimate_json(e);
    if (times) *times = e.times;
    *value = e.mean;
    *std_error = e.std_error;
  }
  return r;
}

json mfpt_simulate(const RunConfig& cfg) {
  const Surface s = make_surface(cfg.shape);
  std::vector<double> times;
  double value = 0.0, se = 0.0;
  const bool want_times = !cfg.output.csv.empty() && !cfg.simulate.extrapolate;
  json j = envelope("mfpt simulate", cfg);
  j["result"] = simulate_json(s, cfg, cfg.window.epsilon, want_times ? &times : nullptr, &value, &se);
  if (!cfg.output.csv.empty()) {
    std::ostringstream csv;
    csv << "path,time,absorbed\n";
    for (std::size_t p = 0; p < times.size(); ++p)
      csv << p << "," << (std::isnan(times[p]) ? std::string("") : csv_number(times[p])) << ","
          << (std::isnan(times[p]) ? 0 : 1) << "\n";
    write_text(cfg.output.csv, csv.str());
  }
  return j;
}

json mfpt_compare(const RunConfig& cfg) {
  const Surface s = make_surface(cfg.shape);
  const WindowSpec spec = make_window(s, cfg.window);
  const ExpansionContext ctx(s, spec.center_u, spec.a, expansion_options(cfg));
  std::vector<double> eps = cfg.compare.epsilons;
  if (eps.empty()) eps.push_back(cfg.window.epsilon);
  json rows = json::array();
  std::ostringstream csv;
  csv << "epsilon,asymptotic,simulated,simulated_std_error,rel_diff\n";
  for (double e : eps) {
    double sim = 0.0, se = 0.0;
    json detail = simulate_json(s, cfg, e, nullptr, &sim, &se);
    const bool point_start = cfg.simulate.start == "fixed";
    const double asym = point_start ? ctx.field(e, cfg.simulate.start_point).value : ctx.average(e).value;
    const double rel = (sim - asym) / asym;
    rows.push_back({{"epsilon", e},
                    {"asymptotic", asym},
                    {"simulated", sim},
                    {"simulated_std_error", se},
                    {"rel_diff", rel},
                    {"quantity", point_start ? "field at start point" : "domain average"},
                    {"simulation", detail}});
    csv << csv_number(e) << "," << csv_number(asym) << "," << csv_number(sim) << "," << csv_number(se) << ","
        << csv_number(rel) << "\n";
  }
  if (!cfg.output.csv.empty()) write_text(cfg.output.csv, csv.str());
  json j = envelope("mfpt compare", cfg);
  j["result"] = {{"table", rows},
                 {"asymptotic_error_order", kAverageOrder},
                 {"units", {{"epsilon", "length"}, {"asymptotic", "time"}, {"simulated", "time"}, {"rel_diff", "dimensionless"}}}};
  return j;
}

int run_method(const RunConfig& cfg) {
  cfg.validate();
  json j;
  bool passed = true;
  if (cfg.method == "asymptotic") j = mfpt_asymptotic(cfg);
  else if (cfg.method == "simulate") j = mfpt_simulate(cfg);
  else if (cfg.method == "greens") j = greens_solve(cfg);
  else if (cfg.method == "xray") j = xray_verify(cfg, &passed);
  else if (cfg.method == "compare") j = mfpt_compare(cfg);
  emit(j, cfg);
  return passed ? kExitOk : kExitAcceptance;
}

void print_error(const std::string& kind, const std::string& message, int line = -1, int column = -1,
                 const std::string& module = "") {
  json e = {{"kind", kind}, {"message", message}};
  if (line > 0) {
    e["line"] = line;
    e["column"] = column;
  }
  if (!module.empty()) e["module"] = module;
  std::cerr << json{{"error", e}}.dump() << "\n";
}

Vector3d parse_point(const std::string& text) {
  std::istringstream in(text);
  Vector3d p;
  char c1 = 0, c2 = 0;
  if (!(in >> p[0] >> c1 >> p[1] >> c2 >> p[2]) || c1 != ',' || c2 != ',')
    throw ConfigError("point must look like x,y,z, got '" + text + "'");
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Narrow-escape MFPT engine: small-window asymptotics, boundary Green functions and Monte Carlo"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_file, shape_file, window_file, emit_config, output, csv, at, sweep;
  std::optional<unsigned> jobs;
  std::optional<std::uint64_t> seed;

  auto common = [&](CLI::App* sub, bool geometry_inputs) {
    sub->add_option("--config", config_file, "YAML run configuration");
    if (geometry_inputs) {
      sub->add_option("--shape", shape_file, "YAML shape configuration");
      sub->add_option("--window", window_file, "YAML window configuration");
    }
    sub->add_option("--output,-o", output, "JSON output path (default stdout)");
    sub->add_option("--csv", csv, "CSV output path");
    sub->add_option("--emit-config", emit_config, "write the resolved configuration as YAML");
    sub->add_option("--jobs,-j", jobs, "worker threads (default NESC_JOBS or all cores)");
  };

  CLI::App* geometry = app.add_subcommand("geometry", "surface geometry");
  geometry->require_subcommand(1);
  CLI::App* inspect = geometry->add_subcommand("inspect", "measures, curvature and window chart");
  common(inspect, true);

  CLI::App* xray = app.add_subcommand("xray", "disk operators");
  xray->require_subcommand(1);
  CLI::App* verify = xray->add_subcommand("verify", "run the disk identity suite");
  common(verify, false);
  std::optional<double> xa;
  std::optional<int> resolution;
  verify->add_option("--a", xa, "window aspect ratio in (0, 1]");
  verify->add_option("--resolution", resolution, "radial nodes (polar angles: twice as many)");

  CLI::App* greens = app.add_subcommand("greens", "boundary Green function");
  greens->require_subcommand(1);
  CLI::App* gsolve = greens->add_subcommand("solve", "regular part R(x*, x*) and F");
  common(gsolve, true);
  std::optional<int> mesh;
  gsolve->add_option("--at", at, "boundary point x,y,z (projected onto the surface)");
  gsolve->add_option("--mesh", mesh, "latitude nodes of the Nystrom grid");

  CLI::App* mfpt = app.add_subcommand("mfpt", "mean first passage time");
  mfpt->require_subcommand(1);
  CLI::App* masym = mfpt->add_subcommand("asymptotic", "small-window expansion");
  common(masym, true);
  masym->add_option("--sweep-eps", sweep, "epsilon sweep lo:hi:n");
  masym->add_option("--mesh", mesh, "latitude nodes of the Nystrom grid");
  CLI::App* msim = mfpt->add_subcommand("simulate", "Monte Carlo estimate");
  common(msim, true);
  std::optional<std::int64_t> paths;
  std::optional<double> dt;
  bool extrapolate = false;
  std::string start, start_point;
  msim->add_option("--paths", paths, "number of paths");
  msim->add_option("--dt", dt, "time step (default (eps/10)^2)");
  msim->add_option("--seed", seed, "64-bit seed");
  msim->add_flag("--extrapolate", extrapolate, "combine dt and 4 dt to remove the sqrt(dt) bias");
  msim->add_option("--start", start, "uniform | fixed");
  msim->add_option("--start-point", start_point, "x,y,z for fixed starts");
  CLI::App* mcmp = mfpt->add_subcommand("compare", "expansion against Monte Carlo");
  common(mcmp, true);
  std::vector<double> eps_list;
  mcmp->add_option("--paths", paths, "number of paths");
  mcmp->add_option("--dt", dt, "time step (default (eps/10)^2)");
  mcmp->add_option("--seed", seed, "64-bit seed");
  mcmp->add_option("--eps", eps_list, "window radii");
  mcmp->add_flag("--extrapolate", extrapolate, "dt extrapolation of the simulated values");
  mcmp->add_option("--start", start, "uniform | fixed");
  mcmp->add_option("--start-point", start_point, "x,y,z for fixed starts");
  mcmp->add_option("--mesh", mesh, "latitude nodes of the Nystrom grid");

  CLI::App* run = app.add_subcommand("run", "run the method named in --config");
  common(run, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitConfig;
  }

  try {
    if (!config_file.empty()) apply_config_file(cfg, config_file);
    if (!shape_file.empty()) apply_shape_file(cfg, shape_file);
    if (!window_file.empty()) apply_window_file(cfg, window_file);
    if (jobs) cfg.jobs = *jobs;
    if (seed) cfg.seed = *seed;
    if (!output.empty()) cfg.output.json = output;
    if (!csv.empty()) cfg.output.csv = csv;
    if (mesh) cfg.greens.mesh = *mesh;

    if (inspect->parsed()) {
      cfg.validate();
      if (!emit_config.empty()) write_text(emit_config, to_yaml(cfg));
      emit(geometry_inspect(cfg), cfg);
      return kExitOk;
    }
    if (verify->parsed()) {
      cfg.method = "xray";
      if (xa) cfg.xray.a = *xa;
      if (resolution) {
        cfg.xray.n_r = *resolution;
        cfg.xray.n_theta = 2 * *resolution;
      }
    } else if (gsolve->parsed()) {
      cfg.method = "greens";
      if (!at.empty()) cfg.window.center = parse_point(at);
    } else if (masym->parsed()) {
      cfg.method = "asymptotic";
      if (!sweep.empty()) cfg.asymptotic.sweep = parse_sweep(sweep);
    } else if (msim->parsed() || mcmp->parsed()) {
      cfg.method = msim->parsed() ? "simulate" : "compare";
      if (paths) cfg.simulate.paths = *paths;
      if (dt) cfg.simulate.dt = *dt;
      if (extrapolate) cfg.simulate.extrapolate = true;
      if (!start.empty()) cfg.simulate.start = start;
      if (!start_point.empty()) cfg.simulate.start_point = parse_point(start_point);
      if (!eps_list.empty()) cfg.compare.epsilons = eps_list;
    }
    cfg.validate();
    if (!emit_config.empty()) write_text(emit_config, to_yaml(cfg));
    return run_method(cfg);
  } catch (const ConfigError& e) {
    print_error("config", e.what(), e.line(), e.column());
    return kExitConfig;
  } catch (const NumericalError& e) {
    print_error("numerical", e.what(), -1, -1, e.module());
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    print_error("config", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    print_error("numerical", e.what());
    return kExitNumerical;
  }
}
