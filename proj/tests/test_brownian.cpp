#include "oracles.hpp"

#include "nesc/asymptotics.hpp"
#include "nesc/brownian.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace nesc;

namespace {

// exit time of the ellipsoid sum x_k^2 / a_k^2 < 1 under generator Delta
double ellipsoid_exit_time(const Vector3d& axes, const Vector3d& x) {
  const Vector3d inv2 = axes.cwiseInverse().cwiseAbs2();
  return (1.0 - x.cwiseAbs2().dot(inv2)) / (2.0 * inv2.sum());
}

SimConfig fixed_start(const Vector3d& x, double dt, std::int64_t paths) {
  SimConfig c;
  c.dt = dt;
  c.n_paths = paths;
  c.start = StartMode::FixedPoint;
  c.start_point = x;
  c.jobs = default_jobs();
  return c;
}

}  // namespace

TEST_CASE("Philox4x32-10 known answers") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32::bijection({0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::bijection({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::bijection({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("Philox streams are counter addressed") {
  Philox4x32 g(42, 7);
  std::vector<std::uint32_t> seq;
  for (int i = 0; i < 12; ++i) seq.push_back(g());
  const Philox4x32 h(42, 7);
  for (int b = 0; b < 3; ++b)
    for (int k = 0; k < 4; ++k) CHECK(h.block(b)[k] == seq[4 * b + k]);
  CHECK(Philox4x32(42, 8).block(0) != h.block(0));
  CHECK(Philox4x32(43, 7).block(0) != h.block(0));
}

TEST_CASE("ziggurat normal moments") {
  const Ziggurat& z = Ziggurat::instance();
  Philox4x32 words(11, 0), fallback(11, 1);
  const int n = 2000000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0, tail2 = 0.0, tail_r = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = z(words(), fallback);
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
    if (std::abs(x) > 2.0) ++tail2;
    if (std::abs(x) > 3.442619855899) ++tail_r;
  }
  const double mean = s1 / n, var = s2 / n - mean * mean, kurt = s4 / n;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(n));
  CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(kurt - 3.0) < 5.0 * std::sqrt(96.0 / n));
  const double p2 = std::erfc(2.0 / std::sqrt(2.0)), pr = std::erfc(3.442619855899 / std::sqrt(2.0));
  CHECK(std::abs(tail2 / n - p2) < 5.0 * std::sqrt(p2 / n));
  CHECK(std::abs(tail_r / n - pr) < 5.0 * std::sqrt(pr / n));
}

TEST_CASE("configuration checks") {
  SimConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SimConfig{};
  c.n_paths = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SimConfig{};
  c.reflection = "diffuse";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(default_dt(0.1) == doctest::Approx(1e-4).epsilon(1e-14));
  CHECK_THROWS_AS(PathRandom(1, std::uint64_t{1} << 62), std::invalid_argument);

  const Surface ball = Surface::sphere();
  SimConfig out = fixed_start(Vector3d(0.0, 0.0, 1.5), 1e-3, 1);
  PathRandom rng(1, 0);
  CHECK_THROWS_AS(simulate_path(ball, Target::whole_boundary(), out, out.start_point, rng), std::invalid_argument);
}

TEST_CASE("exit time of the whole boundary") {
  SUBCASE("ball centre") {
    const Surface ball = Surface::sphere();
    const ExtrapolatedEstimate e =
        estimate_mfpt_extrapolated(ball, Target::whole_boundary(), fixed_start(Vector3d::Zero(), 1e-4, 20000));
    CAPTURE(e.fine.mean);
    CAPTURE(e.coarse.mean);
    CAPTURE(e.value);
    CHECK(std::abs(e.value - 1.0 / 6.0) < 4.0 * e.std_error);
    CHECK(e.fine.n_censored == 0);
    CHECK(e.fine.valid);
  }
  SUBCASE("uniform start in the ball") {
    const Surface ball = Surface::sphere();
    SimConfig c = fixed_start(Vector3d::Zero(), 1e-4, 20000);
    c.start = StartMode::UniformInDomain;
    const ExtrapolatedEstimate e = estimate_mfpt_extrapolated(ball, Target::whole_boundary(), c);
    CAPTURE(e.value);
    CHECK(std::abs(e.value - 1.0 / 15.0) < 4.0 * e.std_error);
  }
  SUBCASE("ellipsoid") {
    const Vector3d axes(1.0, 0.8, 0.6);
    const Surface s = Surface::ellipsoid(axes);
    const Vector3d x0(0.2, -0.1, 0.1);
    const ExtrapolatedEstimate e = estimate_mfpt_extrapolated(s, Target::whole_boundary(), fixed_start(x0, 1e-4, 20000));
    CAPTURE(e.value);
    CHECK(std::abs(e.value - ellipsoid_exit_time(axes, x0)) < 4.0 * e.std_error);
  }
}

TEST_CASE("time step refinement") {
  // the raw estimates approach the exact value from above like sqrt(dt)
  const Surface ball = Surface::sphere();
  std::vector<double> err;
  for (double dt : {1.6e-3, 4e-4, 1e-4}) {
    const MfptEstimate e = estimate_mfpt(ball, Target::whole_boundary(), fixed_start(Vector3d::Zero(), dt, 20000));
    err.push_back(e.mean - 1.0 / 6.0);
  }
  CAPTURE(err[0]);
  CAPTURE(err[1]);
  CAPTURE(err[2]);
  CHECK(err[0] > err[1]);
  CHECK(err[1] > err[2]);
  CHECK(err[0] / err[1] == doctest::Approx(2.0).epsilon(0.35));
}

TEST_CASE("absorption on the window") {
  const Surface ball = Surface::sphere();
  const WindowChart chart(ball, WindowSpec{Vector3d::UnitZ(), 0.2, 1.0});
  const Target target = Target::window(chart);
  CHECK(target.kind() == AbsorbingSet::Window);
  CHECK(target.chart() != nullptr);

  SUBCASE("start on the window") {
    SimConfig c = fixed_start(Vector3d::UnitZ(), 1e-4, 10);
    const MfptEstimate e = estimate_mfpt(ball, target, c);
    CHECK(e.n_absorbed == 10);
    CHECK(e.mean == 0.0);
  }
  SUBCASE("start on the reflecting boundary moves inward") {
    SimConfig c = fixed_start(-Vector3d::UnitZ(), 1e-3, 20);
    c.max_steps = 200000;
    const MfptEstimate e = estimate_mfpt(ball, target, c);
    CHECK(e.n_absorbed == 20);
    CHECK(e.mean > 0.0);
  }
  SUBCASE("antipodal start against the expansion") {
    const double eps = 0.2;
    const Vector3d x0(0.0, 0.0, -0.8);
    SimConfig c = fixed_start(x0, 4e-4, 15000);
    const ExtrapolatedEstimate e = estimate_mfpt_extrapolated(ball, target, c);
    ExpansionInput in;
    in.volume = 4.0 * kPi / 3.0;
    in.area = 4.0 * kPi;
    in.mean_curvature = in.lambda1 = in.lambda2 = 1.0;
    in.epsilon = eps;
    in.r_star = oracle::ball_r_star();
    const MfptBreakdown b = c_eps_a(in, kPi * kPi * (8.0 * std::log(2.0) - 6.0), 0.0);
    const double predicted =
        mfpt_field(in, b, Vector3d::UnitZ(), oracle::ball_exit_time,
                   [](const Vector3d& x) { return oracle::ball_green_closed(x, Vector3d::UnitZ()); }, x0)
            .value;
    CAPTURE(e.value);
    CAPTURE(predicted);
    CHECK(std::abs(e.value / predicted - 1.0) < 0.05);
  }
}

TEST_CASE("censoring and warnings") {
  const Surface ball = Surface::sphere();
  SimConfig c = fixed_start(Vector3d::Zero(), 1e-3, 50);
  c.max_steps = 100;
  const MfptEstimate none = estimate_mfpt(ball, Target::none(), c);
  CHECK(none.n_censored == 50);
  CHECK_FALSE(none.valid);
  CHECK(std::isnan(none.mean));
  CHECK_FALSE(none.warnings.empty());

  const MfptEstimate short_run = estimate_mfpt(ball, Target::whole_boundary(), c, false, 10.0);
  bool warned = false;
  for (const std::string& w : short_run.warnings) warned |= w.find("max_steps") != std::string::npos;
  CHECK(warned);
  c.max_steps = 1000000;
  for (const std::string& w : estimate_mfpt(ball, Target::whole_boundary(), c, false, 0.1).warnings)
    CHECK(w.find("max_steps") == std::string::npos);
}

TEST_CASE("determinism across thread counts") {
  const Surface s = Surface::ellipsoid(Vector3d(1.0, 0.8, 0.6));
  const WindowChart chart(s, WindowSpec{Vector3d::UnitX(), 0.3, 0.7});
  SimConfig c = fixed_start(Vector3d::Zero(), 1e-3, 300);
  c.start = StartMode::UniformInDomain;
  c.seed = 99;
  c.jobs = 1;
  const MfptEstimate a = estimate_mfpt(s, Target::window(chart), c, true);
  c.jobs = 3;
  const MfptEstimate b = estimate_mfpt(s, Target::window(chart), c, true);
  REQUIRE(a.times.size() == b.times.size());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    if (std::isnan(a.times[i])) CHECK(std::isnan(b.times[i]));
    else CHECK(a.times[i] == b.times[i]);
  }
  CHECK(a.mean == b.mean);
  CHECK(a.reflections == b.reflections);
  c.seed = 100;
  CHECK(estimate_mfpt(s, Target::window(chart), c).mean != a.mean);
}

TEST_CASE("confidence interval shrinks like one over root n") {
  const Surface ball = Surface::sphere();
  const MfptEstimate small = estimate_mfpt(ball, Target::whole_boundary(), fixed_start(Vector3d::Zero(), 1e-3, 4000));
  const MfptEstimate large = estimate_mfpt(ball, Target::whole_boundary(), fixed_start(Vector3d::Zero(), 1e-3, 16000));
  CHECK(large.std_error / small.std_error == doctest::Approx(0.5).epsilon(0.1));
  CHECK(small.ci_low < small.mean);
  CHECK(small.ci_high - small.mean == doctest::Approx(1.96 * small.std_error).epsilon(1e-12));
}
