#pragma once

#include "nesc/common.hpp"
#include "nesc/geometry.hpp"
#include "nesc/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nesc {

enum class StartMode { FixedPoint, UniformInDomain };
enum class AbsorbingSet { Window, WholeBoundary, None };

std::string to_string(StartMode m);
std::string to_string(AbsorbingSet a);

struct SimConfig {
  double dt = 1e-4;
  std::int64_t n_paths = 100000;
  std::uint64_t seed = 1;
  std::int64_t max_steps = 10000000;
  StartMode start = StartMode::UniformInDomain;
  Vector3d start_point = Vector3d::Zero();
  std::string reflection = "specular";
  unsigned jobs = 1;

  void validate() const;
};

// Default time step (eps / 10)^2.
double default_dt(double epsilon);

// Absorbing part of the boundary. A window target owns the chart used for
// membership tests.
class Target {
 public:
  static Target window(const WindowChart& chart);
  static Target whole_boundary();
  static Target none();

  AbsorbingSet kind() const { return kind_; }
  bool absorbs(const BoundaryPoint& y) const;
  const WindowChart* chart() const { return chart_ ? &*chart_ : nullptr; }

 private:
  AbsorbingSet kind_ = AbsorbingSet::None;
  std::optional<WindowChart> chart_;
  std::optional<WindowOutline> outline_;  // non-spherical surfaces only
};

struct PathOutcome {
  double time = 0.0;
  bool absorbed = false;
  std::int64_t steps = 0;
  std::int64_t reflections = 0;
  std::int64_t double_reflections = 0;
};

// Random streams of one path, all keyed by the run seed: step k uses Philox
// block k of stream `path`; start sampling and ziggurat rejections use two
// further streams tagged in the top bits.
class PathRandom {
 public:
  PathRandom(std::uint64_t seed, std::uint64_t path);
  Vector3d normal3(std::int64_t step);
  Philox4x32& start_stream() { return start_; }

 private:
  Philox4x32 steps_, start_, fallback_;
  const Ziggurat& zig_;
};

// One reflected Euler-Maruyama path with generator Delta: increments have
// standard deviation sqrt(2 dt) per coordinate.
PathOutcome simulate_path(const Surface& s, const Target& target, const SimConfig& cfg, const Vector3d& start,
                          PathRandom& rng);

// Start point of a path (rejection sampling for uniform starts).
Vector3d start_point(const Surface& s, const SimConfig& cfg, PathRandom& rng);

struct MfptEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::int64_t n_paths = 0;
  std::int64_t n_absorbed = 0;
  std::int64_t n_censored = 0;
  std::int64_t double_reflections = 0;
  std::int64_t reflections = 0;
  double dt = 0.0;
  bool valid = true;  // censored fraction below 1e-3
  std::vector<std::string> warnings;
  std::vector<double> times;  // per path, NaN when censored; filled on request
};

MfptEstimate estimate_mfpt(const Surface& s, const Target& target, const SimConfig& cfg, bool keep_times = false,
                           double predicted_mfpt = 0.0);

// Removes the O(sqrt dt) boundary bias: 2 tau(dt) - tau(4 dt).
struct ExtrapolatedEstimate {
  MfptEstimate fine;
  MfptEstimate coarse;
  double value = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

ExtrapolatedEstimate estimate_mfpt_extrapolated(const Surface& s, const Target& target, const SimConfig& cfg,
                                                double predicted_mfpt = 0.0);

}  // namespace nesc
