#pragma once

#include "nesc/common.hpp"
#include "nesc/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nesc {

struct ShapeConfig {
  std::string kind = "sphere";  // sphere | ellipsoid | revolution
  double radius = 1.0;
  Vector3d semi_axes = Vector3d::Ones();
  Vector3d center = Vector3d::Zero();
  std::vector<double> chebyshev;  // revolution profile r(cos theta)
};

struct WindowConfig {
  Vector3d center = Vector3d::UnitZ();  // any point; projected onto the surface
  double epsilon = 0.1;
  double a = 1.0;
};

struct GreensConfig {
  int mesh = 36;  // latitude nodes of the Nystrom grid
  double mu = 0.9;
  double h0 = 0.0;
  int levels = 6;
  std::vector<int> refinement;  // meshes of the convergence table; empty: mesh/2, 2mesh/3, mesh
};

struct XrayConfig {
  double a = 1.0;
  int n_r = 64;
  int n_theta = 128;
};

struct SweepConfig {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
};

struct AsymptoticConfig {
  std::optional<SweepConfig> sweep;
  std::vector<Vector3d> field_points;
  int pairing_n_r = 64;
  int pairing_n_theta = 128;
};

struct SimulateConfig {
  std::int64_t paths = 100000;
  double dt = 0.0;              // 0: (eps / 10)^2
  std::int64_t max_steps = 0;   // 0: 50 predicted MFPTs worth of steps
  std::string start = "uniform";  // uniform | fixed
  Vector3d start_point = Vector3d::Zero();
  bool extrapolate = false;
  std::string reflection = "specular";
};

struct CompareConfig {
  std::vector<double> epsilons;  // empty: window.epsilon only
};

struct OutputConfig {
  std::string json;
  std::string csv;
};

struct RunConfig {
  ShapeConfig shape;
  WindowConfig window;
  std::string method = "asymptotic";  // asymptotic | simulate | greens | xray | compare
  GreensConfig greens;
  XrayConfig xray;
  AsymptoticConfig asymptotic;
  SimulateConfig simulate;
  CompareConfig compare;
  OutputConfig output;
  std::uint64_t seed = 1;
  unsigned jobs = 0;  // 0: NESC_JOBS or the hardware concurrency

  void validate() const;
};

// Overlays the keys present in a YAML document onto cfg. Unknown keys and
// malformed values raise ConfigError with the 1-based line and column.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin = "<text>");
void apply_config_file(RunConfig& cfg, const std::string& path);

// Shape-only and window-only files: either the section mapping itself or a
// document holding that section.
void apply_shape_file(RunConfig& cfg, const std::string& path);
void apply_window_file(RunConfig& cfg, const std::string& path);

// Fully resolved configuration; feeding it back reproduces the run.
std::string to_yaml(const RunConfig& cfg);

SweepConfig parse_sweep(const std::string& spec);  // "lo:hi:n"

Surface make_surface(const ShapeConfig& shape);
WindowSpec make_window(const Surface& s, const WindowConfig& w);
unsigned resolve_jobs(unsigned jobs);

}  // namespace nesc
