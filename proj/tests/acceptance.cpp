// Acceptance runner: one PASS/FAIL line per criterion, exit status 4 when any
// criterion fails. Arguments select a subset of criteria by number.

#include "checks.hpp"
#include "oracles.hpp"

#include "nesc/asymptotics.hpp"
#include "nesc/brownian.hpp"
#include "nesc/greens.hpp"
#include "nesc/xray.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace nesc;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
  std::vector<std::string> notes;  // printed indented under the verdict
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned jobs() { return default_jobs(); }

Outcome k_one() {
  const double k = K_a(1.0), err = std::abs(k - kPi * kPi);
  return {err <= 1e-12, fmt("K_1 = %.15f, |K_1 - pi^2| = %.1e (tol 1e-12)", k, err), {}};
}

Outcome l_inverse() {
  const WeightedDiskDensity u0 = u0_a(1.0);
  const DiskResolution coarse{}, fine = coarse.doubled();
  double worst = 0.0, worst_fine = 0.0;
  for (int i = 0; i < 12; ++i) {
    for (int k = 0; k < 8; ++k) {
      const double r = 0.95 * i / 11.0, th = 2.0 * kPi * (k + 0.25) / 8.0;
      const Vector2d t(r * std::cos(th), r * std::sin(th));
      worst = std::max(worst, std::abs(apply_L_a(u0, 1.0, t, coarse) - 1.0));
      worst_fine = std::max(worst_fine, std::abs(apply_L_a(u0, 1.0, t, fine) - 1.0));
    }
  }
  // "improving" allows for both errors already sitting at round-off
  const bool improving = worst_fine <= std::max(worst, 1e-12);
  return {worst <= 1e-3 && improving,
          fmt("sup |L_1 u0 - 1| = %.2e at %dx%d, %.2e at %dx%d (tol 1e-3, non-increasing)", worst, coarse.n_r,
              coarse.n_theta, worst_fine, fine.n_r, fine.n_theta), {}};
}

Outcome log_pairing() {
  const QuadratureValue p = pairing_log(1.0);
  const double exact = kPi * kPi * (8.0 * std::log(2.0) - 6.0), rel = std::abs(p.value / exact - 1.0);
  return {rel <= 1e-3, fmt("pairing_log(1) = %.8f vs %.8f, relative error %.2e (tol 1e-3)", p.value, exact, rel), {}};
}

Outcome inf_pairing() {
  const QuadratureValue p = pairing_inf(1.0);
  return {std::abs(p.value) <= 1e-6, fmt("|pairing_inf(1)| = %.2e (tol 1e-6)", std::abs(p.value)), {}};
}

Outcome log_profile() {
  const WeightedDiskDensity u0 = u0_a(1.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double r = i / 19.0;
    // R_log u0 is radial; the edge value is taken just inside the disk
    const double rr = std::min(r, 1.0 - 1e-9);
    worst = std::max(worst, std::abs(apply_R_log_a(u0, 1.0, Vector2d(rr, 0.0)) - f_log_closed(rr)));
  }
  return {worst <= 1e-3, fmt("sup |R_log u0 - f_log| over 20 radii = %.2e (tol 1e-3)", worst), {}};
}

Outcome xray_constancy() {
  const WeightedDiskDensity u0 = u0_a(1.0);
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi), spread(-0.4995, 0.4995);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double b = ang(gen);
    const double d = b + kPi + spread(gen) * kPi;
    const double v = xray_transform(u0, Vector2d(std::cos(b), std::sin(b)), Vector2d(std::cos(d), std::sin(d)));
    worst = std::max(worst, std::abs(v - 1.0 / kPi));
  }
  return {worst <= 1e-6, fmt("max |I u0 - 1/pi| over 100 random chords = %.2e (tol 1e-6)", worst), {}};
}

Outcome distance_law() {
  const Surface sphere = Surface::sphere();
  const Surface ell = Surface::ellipsoid(Vector3d(1.0, 0.8, 0.6));
  double lowest = 1e300;
  for (const Surface* s : {&sphere, &ell}) {
    for (double angle : {0.0, 0.7, 2.0}) {
      const auto orders = check::observed_orders(
          [&](double h) { return check::distance_law_defect(*s, Vector3d(0.3, 0.2, 0.9), h, angle); }, 0.04, 5);
      for (double p : orders) lowest = std::min(lowest, p);
    }
  }
  return {lowest >= 1.9, fmt("lowest observed order on sphere and ellipsoid = %.3f (need >= 1.9)", lowest), {}};
}

Outcome sphere_regular_part() {
  const double oracle = oracle::ball_r_star();
  const auto table = regular_part_table(Surface::sphere(), Vector3d::UnitZ(), {12, 24, 36}, {}, jobs());
  Outcome out;
  bool monotone = true;
  double prev = 1e300;
  for (const RefinementRow& r : table) {
    const double err = std::abs(r.r_star - oracle);
    // non-increasing distance to the oracle up to round-off
    monotone = monotone && err <= prev + 1e-9;
    prev = err;
    out.notes.push_back(fmt("mesh %3d  R* = %.12f  |R* - oracle| = %.3e", r.mesh_theta, r.r_star, err));
  }
  const double rel = std::abs(table.back().r_star / oracle - 1.0);
  out.passed = rel <= 0.02 && monotone;
  out.detail = fmt("R*(sphere) = %.7f vs series oracle %.7f, relative %.2e (tol 2e-2); table %s", table.back().r_star,
                   oracle, rel, monotone ? "monotone" : "NOT monotone");
  return out;
}

Outcome end_to_end() {
  const double eps = 0.1;
  const Surface ball = Surface::sphere();
  ExpansionOptions opt;
  opt.jobs = jobs();
  const ExpansionContext ctx(ball, Vector3d::UnitZ(), 1.0, opt);
  const double predicted = ctx.average(eps).value;
  const double leading = ctx.breakdown(eps).leading;

  const WindowChart chart(ball, WindowSpec{Vector3d::UnitZ(), eps, 1.0});
  SimConfig cfg;
  cfg.dt = 1e-4;
  cfg.n_paths = 100000;
  cfg.seed = 20240611;
  cfg.start = StartMode::UniformInDomain;
  cfg.max_steps = static_cast<std::int64_t>(50.0 * predicted / cfg.dt);
  cfg.jobs = jobs();
  const ExtrapolatedEstimate sim = estimate_mfpt_extrapolated(ball, Target::window(chart), cfg, predicted);

  const double rel = std::abs(sim.value - predicted) / predicted;
  const double ratio = (sim.value - leading) / leading;
  const double correction = -(eps / kPi) * 1.0 * std::log(eps);
  const double ratio_rel = std::abs(ratio - correction) / std::abs(correction);
  const bool agree = rel <= 0.05;
  const bool sign = (ratio > 0.0) == (correction > 0.0);
  const bool magnitude = ratio_rel <= 0.30;

  Outcome out;
  out.passed = agree && sign && magnitude && sim.fine.valid && sim.coarse.valid;
  out.detail = fmt("average MFPT: expansion %.4f, Monte Carlo %.4f +- %.4f, relative %.2e (tol 5e-2) [%s]; "
                   "(sim - leading)/leading = %.4f vs -(eps/pi) H log eps = %.4f, relative %.2f (tol 0.30) [%s]",
                   predicted, sim.value, sim.std_error, rel, agree ? "ok" : "fails", ratio, correction, ratio_rel,
                   sign && magnitude ? "ok" : "fails");
  out.notes.push_back(fmt("dt = %.0e: %.4f +- %.4f, %lld censored; dt = %.0e: %.4f +- %.4f, %lld censored", cfg.dt,
                          sim.fine.mean, sim.fine.std_error, static_cast<long long>(sim.fine.n_censored), 4 * cfg.dt,
                          sim.coarse.mean, sim.coarse.std_error, static_cast<long long>(sim.coarse.n_censored)));
  out.notes.push_back(fmt("expansion: leading %.4f, C = %.4f, (C + int F/|M| - leading)/leading = %.4f", leading,
                          ctx.breakdown(eps).total, (predicted - leading) / leading));
  for (const std::string& w : sim.fine.warnings) out.notes.push_back("warning (dt): " + w);
  for (const std::string& w : sim.coarse.warnings) out.notes.push_back("warning (4 dt): " + w);
  return out;
}

Outcome disk_continuity() {
  ExpansionOptions opt;
  opt.jobs = jobs();
  const double eps = 0.05;
  const ExpansionContext ctx(Surface::ellipsoid(Vector3d(1.0, 0.8, 0.6)), Vector3d(0.3, 0.2, 0.9), 1.0, opt);
  const ExpansionInput disk = ctx.input(eps);
  const double c_disk = c_eps_disk(disk);
  const double log_coef = disk.volume * disk.mean_curvature / (16.0 * kPi * kPi * kPi);
  const double inf_coef = disk.volume * std::abs(disk.lambda1 - disk.lambda2) / (64.0 * kPi * kPi * kPi);
  const QuadratureValue log1 = ctx.log_pairing(), inf1 = ctx.inf_pairing();

  Outcome out;
  std::vector<double> gaps, values;
  const std::vector<double> offsets{1e-2, 1e-3, 1e-4, 1e-5};
  double tol = 0.0;
  for (double gap : offsets) {
    const double a = 1.0 - gap;
    const QuadratureValue pl = pairing_log(a, opt.pairing_resolution), pi = pairing_inf(a, opt.pairing_resolution);
    ExpansionInput in = disk;
    in.a = a;
    const double c = c_eps_a(in, pl.value, pi.value).total;
    values.push_back(c);
    gaps.push_back(std::abs(c - c_disk));
    // quadrature error estimates of both pairings at a and at 1
    tol = log_coef * (pl.error + log1.error) + inf_coef * (pi.error + inf1.error);
    out.notes.push_back(fmt("a = 1 - %.0e: C = %.10f, |C - C_disk| = %.3e, quadrature tolerance %.3e", gap, c,
                            gaps.back(), tol));
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < gaps.size(); ++k) decreasing = decreasing && gaps[k] <= gaps[k - 1];
  // C is smooth in a, so the last two values extrapolate linearly to a = 1
  const std::size_t n = values.size();
  const double h1 = offsets[n - 2], h2 = offsets[n - 1];
  const double limit = values[n - 1] - (values[n - 2] - values[n - 1]) * h2 / (h1 - h2);
  const double miss = std::abs(limit - c_disk);
  out.passed = decreasing && miss <= tol;
  out.detail = fmt("C_disk = %.10f; limit of C_eps,a as a -> 1 = %.10f, difference %.2e (quadrature tolerance %.2e), "
                   "gaps %s",
                   c_disk, limit, miss, tol, decreasing ? "decreasing" : "NOT decreasing");
  return out;
}

Outcome invariants() {
  Outcome out;
  auto record = [&](const std::string& name, bool ok, const std::string& value) {
    out.notes.push_back(fmt("%s %s: %s", ok ? "ok  " : "FAIL", name.c_str(), value.c_str()));
    return ok;
  };
  bool all = true;

  // xray: identity suite and discrete self-adjointness of L_a
  {
    const IdentityReport rep = verify_identities(1.0);
    all &= record("disk identity suite (a = 1)", rep.passed(), fmt("max abs error %.2e", rep.max_abs_error()));
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    VectorXd cf(zernike_count(4)), cg(zernike_count(4));
    for (Eigen::Index i = 0; i < cf.size(); ++i) {
      cf[i] = nd(gen);
      cg[i] = nd(gen);
    }
    const WeightedDiskDensity f = WeightedDiskDensity::zernike(4, cf), g = WeightedDiskDensity::zernike(4, cg);
    const DiskResolution res{};
    auto pair = [&](const WeightedDiskDensity& p, const WeightedDiskDensity& q) {
      return disk_integral(
          WeightedDiskDensity([&](const Vector2d& t) { return p.factor(t) * apply_L_a(q, 0.6, t, res); }), res);
    };
    const double d = std::abs(pair(g, f) - pair(f, g)) / (cf.norm() * cg.norm());
    all &= record("L_a self-adjoint (a = 0.6)", d <= 1e-8, fmt("%.2e (tol 1e-8)", d));
  }
  // geometry: bitwise frame determinism and umbilic fallback
  {
    const Surface s = Surface::ellipsoid(Vector3d(1.0, 0.8, 0.6));
    bool same = true;
    for (const Vector3d& u : {Vector3d(0.3, 0.5, 0.8), Vector3d(0, 0, 1), Vector3d(-0.2, 0.9, 0.1)}) {
      const CurvatureData a = curvature_at(s, u), b = curvature_at(s, u);
      same = same && std::memcmp(a.e1.data(), b.e1.data(), 3 * sizeof(double)) == 0 &&
             std::memcmp(a.e2.data(), b.e2.data(), 3 * sizeof(double)) == 0 &&
             std::memcmp(&a.lambda1, &b.lambda1, sizeof(double)) == 0;
      same = same && std::abs(a.e1.cross(a.e2).dot(a.outward) - 1.0) < 1e-12;
    }
    all &= record("principal frame bitwise deterministic and oriented", same, same ? "identical" : "differs");
  }
  // greens: W S symmetry, zero-mean Green matrix rows, symmetry of G
  {
    const GreenSolver gs(Surface::ellipsoid(Vector3d(1.0, 0.8, 0.6)), 36, jobs());
    const MatrixXd ws = gs.mesh().weights.asDiagonal() * gs.layers().S.matrix;
    const double sym = (ws - ws.transpose()).norm() / ws.norm();
    all &= record("area-weighted single layer symmetric", sym <= 1e-8, fmt("%.2e (tol 1e-8)", sym));

    const GreenSolver coarse(Surface::ellipsoid(Vector3d(1.0, 0.8, 0.6)), 12, jobs());
    const MatrixXd G = boundary_green_matrix(coarse);
    const double mean = (G * coarse.mesh().weights).cwiseAbs().maxCoeff();
    all &= record("Green matrix rows have zero boundary mean", mean <= 1e-10, fmt("%.2e (tol 1e-10)", mean));

    const Surface& s = gs.surface();
    const BoundaryPoint p = s.point(Vector3d(0.3, 0.2, 0.9)), q = s.point(Vector3d(-0.4, 0.5, 0.3));
    const double asym = std::abs(BoundaryGreen(gs, p).value(q) - BoundaryGreen(gs, q).value(p));
    all &= record("G(x, y) = G(y, x) on the boundary", asym <= 1e-3, fmt("%.2e (tol 1e-3)", asym));
    const Vector3d x(0.1, 0.05, 0.15), y(-0.2, 0.1, -0.1);
    const double iasym =
        std::abs(InteriorGreen(gs, x).at_interior(y).value - InteriorGreen(gs, y).at_interior(x).value);
    all &= record("G(x, y) = G(y, x) inside", iasym <= 1e-3, fmt("%.2e (tol 1e-3)", iasym));
  }
  // asymptotics: additivity and disk collapse
  {
    ExpansionInput in;
    in.volume = 2.3;
    in.area = 8.1;
    in.lambda1 = 1.7;
    in.lambda2 = 0.6;
    in.mean_curvature = 1.15;
    in.epsilon = 0.04;
    in.r_star = -0.31;
    in.f_star = 0.12;
    const MfptBreakdown b = c_eps_a(in, kPi * kPi * (8.0 * std::log(2.0) - 6.0), 0.0);
    const bool additive =
        b.total == b.leading + b.log_term + b.regular_term + b.f_term + b.log_pairing_term + b.curvature_diff_term;
    all &= record("breakdown additive bit for bit", additive, additive ? "exact" : "differs");
    const double collapse = std::abs(b.total - c_eps_disk(in)) / std::abs(b.total);
    all &= record("a = 1 collapse to the disk constant", collapse <= 1e-14, fmt("%.2e (tol 1e-14)", collapse));
  }
  // brownian: determinism across thread counts
  {
    const Surface s = Surface::ellipsoid(Vector3d(1.0, 0.8, 0.6));
    const WindowChart chart(s, WindowSpec{Vector3d::UnitX(), 0.3, 0.7});
    SimConfig c;
    c.dt = 1e-3;
    c.n_paths = 400;
    c.seed = 77;
    c.jobs = 1;
    const MfptEstimate a = estimate_mfpt(s, Target::window(chart), c, true);
    c.jobs = 4;
    const MfptEstimate b = estimate_mfpt(s, Target::window(chart), c, true);
    bool same = a.times.size() == b.times.size();
    for (std::size_t i = 0; same && i < a.times.size(); ++i)
      same = (std::isnan(a.times[i]) && std::isnan(b.times[i])) || a.times[i] == b.times[i];
    all &= record("Monte Carlo identical for 1 and 4 threads", same, same ? "identical" : "differs");
  }
  out.passed = all;
  out.detail = fmt("%zu invariants checked", out.notes.size());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "K_1 = pi^2", 1.0, k_one},
      {2, "L_1 u0 = 1 on |t| <= 0.95", 10.0, l_inverse},
      {3, "pairing_log(1) = pi^2 (8 log 2 - 6)", 30.0, log_pairing},
      {4, "pairing_inf(1) = 0", 30.0, inf_pairing},
      {5, "closed log profile against quadrature", 30.0, log_profile},
      {6, "X-ray of u0 is constant", 5.0, xray_constancy},
      {7, "normal derivative of distance: order >= 1.9", 10.0, distance_law},
      {8, "regular part on the unit sphere", 300.0, sphere_regular_part},
      {9, "unit ball end to end: expansion against Monte Carlo", 900.0, end_to_end},
      {10, "ellipse window constant tends to the disk constant", 120.0, disk_continuity},
      {11, "invariant suites", 600.0, invariants},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), {}};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = sec <= c.budget_s;
    const bool ok = o.passed && in_time;
    if (!ok) ++failed;
    std::printf("%s criterion %d: %s | %s | %.1f s (budget %.0f s%s)\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(),
                o.detail.c_str(), sec, c.budget_s, in_time ? "" : ", exceeded");
    for (const std::string& n : o.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed ? 4 : 0;
}
