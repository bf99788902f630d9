#pragma once

#include "nesc/common.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nesc {

// Quadrature resolution for disk integrals: n_r nodes along each polar ray and
// n_theta equispaced polar angles.
struct DiskResolution {
  int n_r = 64;
  int n_theta = 128;
  DiskResolution doubled() const { return {2 * n_r, 2 * n_theta}; }
};

// f(t) = v(t) / sqrt(1 - |t|^2), stored through its smooth factor v.
class WeightedDiskDensity {
 public:
  using Factor = std::function<double(const Vector2d&)>;

  WeightedDiskDensity();
  explicit WeightedDiskDensity(Factor v);

  static WeightedDiskDensity constant(double c);
  // Smooth factor sum_l c_l Z_l with the real Zernike ordering of zernike_all.
  static WeightedDiskDensity zernike(int degree, VectorXd coefficients);
  // Wraps an unweighted smooth function g, i.e. v = g sqrt(1 - |t|^2).
  static WeightedDiskDensity from_plain(std::function<double(const Vector2d&)> g);

  double factor(const Vector2d& t) const { return v_(t); }
  double operator()(const Vector2d& t) const;

 private:
  Factor v_;
};

// Plain-measure polar grid on the unit disk (Gauss-Legendre in r with the r
// Jacobian folded into the weights).
struct DiskGrid {
  int n_r = 0;
  int n_theta = 0;
  std::vector<Vector2d> nodes;
  VectorXd weights;
};
DiskGrid disk_grid(const DiskResolution& res = {});

// Real Zernike polynomials of total degree <= degree, ordered by n then m
// (m = -n, -n+2, ..., n; negative m uses sin). Unnormalised.
int zernike_count(int degree);
void zernike_all(const Vector2d& t, int degree, double* out);

double K_a(double a);
WeightedDiskDensity u0_a(double a);

double apply_L_a(const WeightedDiskDensity& f, double a, const Vector2d& t, const DiskResolution& res = {});
double apply_R_log_a(const WeightedDiskDensity& f, double a, const Vector2d& t, const DiskResolution& res = {});
double apply_R_inf_a(const WeightedDiskDensity& f, double a, const Vector2d& t, const DiskResolution& res = {});

// Closed-form radial profile of the log kernel applied to 1/(pi^2 sqrt(1-r^2)).
double f_log_closed(double r);

struct QuadratureValue {
  double value = 0.0;
  double error = 0.0;  // difference to the half-resolution value
};

// Double integrals int int w(s) k_a(s, t) w(t) ds dt with w = (1 - |.|^2)^(-1/2)
// and k_a the log / ratio kernel of the ellipse window, without the a
// prefactor of the operators above.
QuadratureValue pairing_log(double a, const DiskResolution& res = {});
QuadratureValue pairing_inf(double a, const DiskResolution& res = {});

// Inner ratio-kernel integral at t for the constant weight 1/sqrt(1-|s|^2);
// used by the antisymmetry checks.
double ratio_kernel_profile(double a, const Vector2d& t, const DiskResolution& res = {});

struct LSolveResult {
  WeightedDiskDensity density;
  int degree = 0;
  VectorXd coefficients;
  double residual = 0.0;   // sup |L_a f - rhs| on |t| <= 0.95 samples
  double condition = 0.0;  // eigenvalue ratio of the Galerkin matrix
};

LSolveResult solve_L_a(const std::function<double(const Vector2d&)>& rhs, double a, int degree = 10,
                       const DiskResolution& res = {32, 64});

// int f over the disk (f weighted).
double disk_integral(const WeightedDiskDensity& f, const DiskResolution& res = {});

// Line integral of f along the chord that enters the disk at the boundary
// point x with unit direction v. Tangent and outward chords give 0.
double xray_transform(const WeightedDiskDensity& f, const Vector2d& x, const Vector2d& v, int n = 64);

// Adjoint: integrates omega(entry point, direction) over all directions
// through the interior point x.
double xray_adjoint(const std::function<double(const Vector2d&, const Vector2d&)>& omega, const Vector2d& x,
                    int n_dirs = 256);

struct IdentityCheck {
  std::string identity;
  double computed = 0.0;
  double expected = 0.0;  // NaN when only a quadrature value is available
  double abs_error = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct IdentityReport {
  double a = 1.0;
  DiskResolution resolution;
  std::vector<IdentityCheck> checks;
  bool passed() const;
  double max_abs_error() const;
};

// Runs the disk identity suite; the resolution is doubled (at most twice)
// while any check misses its tolerance.
IdentityReport verify_identities(double a, DiskResolution res = {});

// General-dimension u0 for the unit ball in R^n and the matching constant
// value of its X-ray transform.
double u0_ball(int n, double radius);
double xray_constant_ball(int n);

}  // namespace nesc
