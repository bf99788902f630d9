#pragma once

#include "nesc/common.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nesc {

// Every surface is a map X(u) from the unit reference sphere. Local
// computations use the gnomonic chart at u0,
//   u(p) = normalize(u0 + p1 t1 + p2 t2),
// where (t1, t2, u0) is a fixed right-handed frame built from u0 alone.
struct BoundaryPoint {
  Vector3d u;  // reference-sphere parameter
  Vector3d x;  // position in space
};

struct SurfaceJet {
  Vector3d x;
  Eigen::Matrix<double, 3, 2> dx;
  Vector3d dxx[3];  // second derivatives: 11, 12, 22
};

struct FundamentalForms {
  Matrix2d first;
  Matrix2d second;  // with respect to the inward normal
};

struct CurvatureData {
  double lambda1 = 0.0;  // lambda1 >= lambda2
  double lambda2 = 0.0;
  Vector3d e1 = Vector3d::Zero();
  Vector3d e2 = Vector3d::Zero();  // e1 x e2 = outward normal
  double mean = 0.0;               // (lambda1 + lambda2) / 2
  Vector3d outward = Vector3d::Zero();
};

struct DomainMeasures {
  double volume = 0.0;
  double area = 0.0;
  double volume_error = 0.0;
  double area_error = 0.0;
};

void chart_frame(const Vector3d& u0, Vector3d& t1, Vector3d& t2);

// Product rule on the reference sphere: Gauss-Legendre in cos(theta) with
// n_theta nodes, 2 n_theta equispaced azimuths.
struct SphereGrid {
  std::vector<Vector3d> u;
  VectorXd weight;
};
SphereGrid sphere_grid(int n_theta);

class SurfaceModel {
 public:
  virtual ~SurfaceModel() = default;

  virtual std::string kind() const = 0;
  virtual Vector3d position(const Vector3d& u) const = 0;
  // Chart derivatives at p in the gnomonic chart centred at u0. order 1 leaves
  // dxx untouched.
  virtual SurfaceJet jet(const Vector3d& u0, const Vector2d& p, int order) const;
  // Signed implicit function: negative inside the domain.
  virtual double level(const Vector3d& x) const;
  virtual bool has_level() const { return false; }
  virtual Vector3d parameter_of(const Vector3d& x) const;
  // Fraction t in (0, 1] where p0 + t (p1 - p0) first meets the surface, for p0
  // inside and p1 outside.
  virtual double exit_fraction(const Vector3d& p0, const Vector3d& p1) const;
  virtual double length_scale() const { return 1.0; }
  virtual std::optional<double> sphere_radius() const { return std::nullopt; }
  virtual Vector3d center() const { return Vector3d::Zero(); }
  // +1 when the chart frame (x_1, x_2) is positively oriented w.r.t. the
  // outward normal.
  int orientation = 1;
};

// Value-semantic handle around an immutable surface model.
class Surface {
 public:
  Surface() = default;
  explicit Surface(std::shared_ptr<const SurfaceModel> model) : model_(std::move(model)) {}

  static Surface sphere(double radius = 1.0, const Vector3d& center = Vector3d::Zero());
  static Surface ellipsoid(const Vector3d& semi_axes, const Vector3d& center = Vector3d::Zero());
  // r(u) = sum_k c_k T_k(u_z) along the ray through u.
  static Surface revolution(std::vector<double> chebyshev, const Vector3d& center = Vector3d::Zero());
  static Surface parametric(std::function<Vector3d(const Vector3d&)> map,
                            std::function<double(const Vector3d&)> level = {},
                            double length_scale = 1.0);

  const SurfaceModel& model() const { return *model_; }
  std::string kind() const { return model_->kind(); }

  BoundaryPoint point(const Vector3d& u) const;
  BoundaryPoint project(const Vector3d& x) const;
  // Spherical angles of the reference parameter.
  BoundaryPoint at_angles(double theta, double phi) const;

  Vector3d outward_normal(const Vector3d& u) const;
  // dA / d(sigma) where sigma is the reference-sphere measure.
  double area_density(const Vector3d& u) const;

  bool inside(const Vector3d& x) const { return model_->level(x) < 0.0; }

 private:
  std::shared_ptr<const SurfaceModel> model_;
};

FundamentalForms fundamental_forms(const Surface& s, const Vector3d& u0, const Vector2d& p = Vector2d::Zero());
CurvatureData curvature_at(const Surface& s, const Vector3d& u);

struct GeodesicOptions {
  double step = 5e-4;
  bool monitor = true;    // Richardson estimate from a half-step rerun
  bool use_exact = true;  // closed forms when the surface provides them
  int max_steps = 200000;
};

struct GeodesicResult {
  BoundaryPoint end;
  Vector3d velocity;  // unit tangent at the end point
  double error_estimate = 0.0;
  int steps = 0;
};

// exp_{x0}(s V) for a unit tangent V.
GeodesicResult boundary_exponential(const Surface& s, const BoundaryPoint& x0, const Vector3d& v, double length,
                                    const GeodesicOptions& opt = {});

// Inverse of the exponential map: the tangent vector W at x0 with
// exp_{x0}(W) = y. |W| is the boundary distance.
Vector3d boundary_log(const Surface& s, const BoundaryPoint& x0, const BoundaryPoint& y,
                      const GeodesicOptions& opt = {});

double ambient_distance(const Vector3d& x, const Vector3d& y);
double boundary_distance(const Surface& s, const BoundaryPoint& x, const BoundaryPoint& y,
                         const GeodesicOptions& opt = {});

DomainMeasures measures(const Surface& s, int n_theta = 48);

struct WindowSpec {
  Vector3d center_u = Vector3d::UnitZ();
  double epsilon = 0.1;
  double a = 1.0;
};

class WindowChart {
 public:
  WindowChart(Surface surface, const WindowSpec& spec);

  const Surface& surface() const { return surface_; }
  const BoundaryPoint& center() const { return center_; }
  const CurvatureData& frame() const { return frame_; }
  double epsilon() const { return spec_.epsilon; }
  double a() const { return spec_.a; }
  const WindowSpec& spec() const { return spec_; }
  double admissible_radius() const { return admissible_; }

  BoundaryPoint map(const Vector2d& s) const;
  double area_element(const Vector2d& s) const;
  Vector2d pullback(const BoundaryPoint& y) const;
  bool contains(const BoundaryPoint& y) const;
  double area(int n_r = 24, int n_theta = 64) const;

 private:
  Surface surface_;
  WindowSpec spec_;
  BoundaryPoint center_;
  CurvatureData frame_;
  GeodesicOptions geo_;
  double admissible_ = 0.0;
};

// Window boundary sampled once and projected onto the tangent plane at the
// centre. Membership compares polar radii there, which avoids a geodesic
// shooting solve per query; the projected outline is star-shaped for windows
// below the admissible radius.
class WindowOutline {
 public:
  explicit WindowOutline(const WindowChart& chart, int samples = 256);
  bool contains(const Vector3d& x) const;  // x on the surface

 private:
  Vector3d c_, e1_, e2_;
  double reach_ = 0.0;
  std::vector<double> psi_, rho_;  // polar angle (unwrapped, increasing) and radius
};

}  // namespace nesc
