#include "nesc/brownian.hpp"

#include <cmath>
#include <limits>

namespace nesc {

std::string to_string(StartMode m) { return m == StartMode::FixedPoint ? "fixed" : "uniform"; }

std::string to_string(AbsorbingSet a) {
  switch (a) {
    case AbsorbingSet::Window: return "window";
    case AbsorbingSet::WholeBoundary: return "whole-boundary";
    case AbsorbingSet::None: return "none";
  }
  return "none";
}

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
  if (reflection != "specular") throw std::invalid_argument("unknown reflection scheme: " + reflection);
}

double default_dt(double epsilon) { return (epsilon / 10.0) * (epsilon / 10.0); }

Target Target::window(const WindowChart& chart) {
  Target t;
  t.kind_ = AbsorbingSet::Window;
  t.chart_.emplace(chart);
  if (!chart.surface().model().sphere_radius()) t.outline_.emplace(chart);
  return t;
}

Target Target::whole_boundary() {
  Target t;
  t.kind_ = AbsorbingSet::WholeBoundary;
  return t;
}

Target Target::none() { return Target(); }

bool Target::absorbs(const BoundaryPoint& y) const {
  switch (kind_) {
    case AbsorbingSet::WholeBoundary: return true;
    case AbsorbingSet::None: return false;
    case AbsorbingSet::Window: return outline_ ? outline_->contains(y.x) : chart_->contains(y);
  }
  return false;
}

PathRandom::PathRandom(std::uint64_t seed, std::uint64_t path)
    : steps_(seed, path),
      start_(seed, path | (std::uint64_t{1} << 62)),
      fallback_(seed, path | (std::uint64_t{1} << 63)),
      zig_(Ziggurat::instance()) {
  if (path >> 62) throw std::invalid_argument("path index out of range");
}

Vector3d PathRandom::normal3(std::int64_t step) {
  const Philox4x32::Block b = steps_.block(static_cast<std::uint64_t>(step));
  return {zig_(b[0], fallback_), zig_(b[1], fallback_), zig_(b[2], fallback_)};
}

namespace {

struct Box {
  Vector3d lo, hi;
};

Box bounding_box(const Surface& s) {
  const SphereGrid g = sphere_grid(32);
  Vector3d lo = Vector3d::Constant(std::numeric_limits<double>::infinity());
  Vector3d hi = -lo;
  for (const auto& u : g.u) {
    const Vector3d x = s.model().position(u);
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const Vector3d pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

Vector3d sample_start(const Surface& s, const SimConfig& cfg, const Box& box, PathRandom& rng) {
  if (cfg.start == StartMode::FixedPoint) return cfg.start_point;
  Philox4x32& u = rng.start_stream();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vector3d x;
    for (int k = 0; k < 3; ++k) x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * u.uniform();
    if (s.inside(x)) return x;
  }
  throw NumericalError("brownian_sim", "rejection sampling found no interior point");
}

Vector3d normal_at(const Surface& s, const Vector3d& c, Vector3d* u) {
  const SurfaceModel& m = s.model();
  *u = m.parameter_of(c);
  if (m.sphere_radius()) return (c - m.center()).normalized();
  return s.outward_normal(*u);
}

}  // namespace

Vector3d start_point(const Surface& s, const SimConfig& cfg, PathRandom& rng) {
  return sample_start(s, cfg, bounding_box(s), rng);
}

PathOutcome simulate_path(const Surface& s, const Target& target, const SimConfig& cfg, const Vector3d& start,
                          PathRandom& rng) {
  const SurfaceModel& m = s.model();
  PathOutcome out;
  if (m.level(start) >= 0.0) {
    // a start on the closed window is absorbed at once; other boundary starts
    // are nudged inward along the normal
    if (m.level(start) > 1e-9 * m.length_scale())
      throw std::invalid_argument("start point lies outside the domain");
    Vector3d u;
    const Vector3d nu = normal_at(s, start, &u);
    if (target.absorbs(s.point(u))) {
      out.absorbed = true;
      return out;
    }
    return simulate_path(s, target, cfg, start - 1e-9 * m.length_scale() * nu, rng);
  }

  const double sd = std::sqrt(2.0 * cfg.dt);
  // spheres skip the virtual level call and its square root
  const std::optional<double> radius = m.sphere_radius();
  const double r2 = radius ? *radius * *radius : 0.0;
  const Vector3d centre = m.center();
  auto interior = [&](const Vector3d& p) { return radius ? (p - centre).squaredNorm() < r2 : m.level(p) < 0.0; };
  Vector3d x = start;
  for (std::int64_t k = 0; k < cfg.max_steps; ++k) {
    Vector3d y = x + sd * rng.normal3(k);
    out.steps = k + 1;
    if (interior(y)) {
      x = y;
      continue;
    }
    // first crossing and mirror image; repeated crossings of the mirrored
    // segment are counted
    Vector3d from = x;
    double frac = m.exit_fraction(from, y);
    bool settled = false;
    for (int bounce = 0; bounce < 8; ++bounce) {
      const Vector3d c = from + frac * (y - from);
      Vector3d u;
      const Vector3d nu = normal_at(s, c, &u);
      if (target.absorbs(s.point(u))) {
        out.absorbed = true;
        out.time = (static_cast<double>(k) + (bounce == 0 ? frac : 1.0)) * cfg.dt;
        return out;
      }
      ++out.reflections;
      if (bounce > 0) ++out.double_reflections;
      const Vector3d mirrored = y - 2.0 * (y - c).dot(nu) * nu;
      if (interior(mirrored)) {
        y = mirrored;
        settled = true;
        break;
      }
      from = c - 1e-12 * m.length_scale() * nu;
      y = mirrored;
      frac = m.exit_fraction(from, y);
    }
    if (!settled) y = from;
    x = y;
  }
  return out;
}

MfptEstimate estimate_mfpt(const Surface& s, const Target& target, const SimConfig& cfg, bool keep_times,
                           double predicted_mfpt) {
  cfg.validate();
  MfptEstimate est;
  est.dt = cfg.dt;
  est.n_paths = cfg.n_paths;
  if (predicted_mfpt > 0.0 && static_cast<double>(cfg.max_steps) * cfg.dt < 10.0 * predicted_mfpt)
    est.warnings.push_back("max_steps * dt is below ten times the predicted MFPT");
  const Box box = bounding_box(s);
  const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
  std::vector<PathOutcome> outcomes(n);
  parallel_for(n, cfg.jobs, [&](std::size_t p) {
    PathRandom rng(cfg.seed, p);
    const Vector3d x0 = sample_start(s, cfg, box, rng);
    outcomes[p] = simulate_path(s, target, cfg, x0, rng);
  });

  std::vector<double> t, t2;
  t.reserve(n);
  t2.reserve(n);
  if (keep_times) est.times.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const PathOutcome& o = outcomes[p];
    est.reflections += o.reflections;
    est.double_reflections += o.double_reflections;
    if (o.absorbed) {
      ++est.n_absorbed;
      t.push_back(o.time);
    } else {
      ++est.n_censored;
    }
    if (keep_times) est.times[p] = o.absorbed ? o.time : std::numeric_limits<double>::quiet_NaN();
  }
  est.valid = static_cast<double>(est.n_censored) < 1e-3 * static_cast<double>(est.n_paths);
  if (!est.valid) est.warnings.push_back("censored fraction exceeds 1e-3");
  if (est.reflections > 0 && est.double_reflections * 1000 > est.reflections)
    est.warnings.push_back("more than 0.1% of reflections needed a second bounce; reduce dt");
  if (t.empty()) {
    est.mean = est.std_error = std::numeric_limits<double>::quiet_NaN();
    est.ci_low = est.ci_high = est.mean;
    return est;
  }
  const double na = static_cast<double>(t.size());
  est.mean = pairwise_sum(t.data(), t.size()) / na;
  for (double v : t) t2.push_back((v - est.mean) * (v - est.mean));
  const double var = t.size() > 1 ? pairwise_sum(t2.data(), t2.size()) / (na - 1.0) : 0.0;
  est.std_error = std::sqrt(var / na);
  est.ci_low = est.mean - 1.96 * est.std_error;
  est.ci_high = est.mean + 1.96 * est.std_error;
  return est;
}

ExtrapolatedEstimate estimate_mfpt_extrapolated(const Surface& s, const Target& target, const SimConfig& cfg,
                                                double predicted_mfpt) {
  ExtrapolatedEstimate out;
  out.fine = estimate_mfpt(s, target, cfg, false, predicted_mfpt);
  SimConfig coarse = cfg;
  coarse.dt = 4.0 * cfg.dt;
  coarse.max_steps = std::max<std::int64_t>(1, cfg.max_steps / 4);
  out.coarse = estimate_mfpt(s, target, coarse, false, predicted_mfpt);
  out.value = 2.0 * out.fine.mean - out.coarse.mean;
  // streams are shared between the two runs; treating them as independent
  // overstates the error
  out.std_error = std::sqrt(4.0 * out.fine.std_error * out.fine.std_error + out.coarse.std_error * out.coarse.std_error);
  out.ci_low = out.value - 1.96 * out.std_error;
  out.ci_high = out.value + 1.96 * out.std_error;
  return out;
}

}  // namespace nesc
