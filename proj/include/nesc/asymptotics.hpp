#pragma once

#include "nesc/common.hpp"
#include "nesc/geometry.hpp"
#include "nesc/greens.hpp"
#include "nesc/xray.hpp"

#include <functional>
#include <memory>
#include <string>

namespace nesc {

// Geometric and analytic data entering the small-window expansion. Times
// follow the generator Delta (a Brownian motion with generator Delta/2 takes
// twice as long).
struct ExpansionInput {
  double volume = 0.0;          // |M|
  double area = 0.0;            // |dM|
  double mean_curvature = 0.0;  // H(x*)
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double epsilon = 0.0;
  double a = 1.0;
  double r_star = 0.0;  // R(x*, x*)
  double f_star = 0.0;  // F(x*)

  void validate() const;
};

inline constexpr const char* kConstantOrder = "O(eps log eps)";
inline constexpr const char* kAverageOrder = "O(eps)";

struct MfptBreakdown {
  double leading = 0.0;
  double log_term = 0.0;
  double regular_term = 0.0;
  double f_term = 0.0;
  double log_pairing_term = 0.0;
  double curvature_diff_term = 0.0;
  double total = 0.0;
  std::string error_order = kConstantOrder;
};

// C_{eps,a}; K_a is evaluated internally. The pairings are the a-free double
// integrals returned by pairing_log / pairing_inf.
MfptBreakdown c_eps_a(const ExpansionInput& in, double pairing_log_value, double pairing_inf_value);

// Closed form of the disk-window constant (a = 1).
double c_eps_disk(const ExpansionInput& in);

struct FieldValue {
  double value = 0.0;
  bool guard_warning = false;  // x within the guard distance of x*
};

inline constexpr double kGuardFactor = 5.0;

// u(x) = F(x) + C - |M| G(x, x*).
FieldValue mfpt_field(const ExpansionInput& in, const MfptBreakdown& c, const Vector3d& x_star,
                      const std::function<double(const Vector3d&)>& F,
                      const std::function<double(const Vector3d&)>& G_to_x_star, const Vector3d& x);

struct AverageMfpt {
  double value = 0.0;
  std::string error_order = kAverageOrder;
};

// (int_M F + C |M| - F(x*) |M|) / |M|.
AverageMfpt mfpt_average(const ExpansionInput& in, const MfptBreakdown& c, double integral_F);

// Leading-order flux density on the window chart.
class FluxDensity {
 public:
  FluxDensity(double volume, double epsilon, double a) : volume_(volume), epsilon_(epsilon), a_(a) {}
  double operator()(const Vector2d& t) const;  // t in the open unit disk
  double chart_integral() const;               // -|M| / (a eps^2)
  double total_flux() const;                   // chart integral times a eps^2

 private:
  double volume_, epsilon_, a_;
};

FluxDensity flux_prediction(const ExpansionInput& in);

// Everything the expansion needs that does not depend on eps: measures,
// curvature at the window centre, R(x*, x*), F and the pairings. Built once,
// then evaluated for any eps.
struct ExpansionOptions {
  int mesh_theta = 36;
  DiskResolution pairing_resolution{};
  RegularPartOptions regular{};
  unsigned jobs = 1;
};

class ExpansionContext {
 public:
  ExpansionContext(const Surface& surface, const Vector3d& center_u, double a, const ExpansionOptions& opt = {});

  ExpansionInput input(double epsilon) const;
  MfptBreakdown breakdown(double epsilon) const;
  AverageMfpt average(double epsilon) const;
  FieldValue field(double epsilon, const Vector3d& x) const;

  const GreenSolver& solver() const { return *solver_; }
  const GreenDecomposition& green() const { return green_; }
  const FResult& f() const { return f_; }
  const CurvatureData& frame() const { return frame_; }
  const BoundaryPoint& center() const { return center_; }
  const QuadratureValue& log_pairing() const { return log_pairing_; }
  const QuadratureValue& inf_pairing() const { return inf_pairing_; }
  double a() const { return a_; }

 private:
  std::shared_ptr<GreenSolver> solver_;
  BoundaryPoint center_;
  CurvatureData frame_;
  double a_;
  GreenDecomposition green_;
  FResult f_;
  QuadratureValue log_pairing_, inf_pairing_;
};

}  // namespace nesc
