#pragma once

#include "nesc/common.hpp"
#include "nesc/geometry.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nesc {

// Nystrom nodes on the surface: the reference-sphere product rule mapped
// through the surface, weights carrying the area density.
struct BoundaryMesh {
  int n_theta = 0;
  std::vector<BoundaryPoint> nodes;
  std::vector<Vector3d> normals;  // outward
  VectorXd weights;
  VectorXd mean_curvature;
  double spacing = 0.0;  // sqrt(area / nodes)

  Eigen::Index size() const { return weights.size(); }
  double area() const { return weights.sum(); }
  static BoundaryMesh build(const Surface& s, int n_theta);
};

double kernel_E(const Vector3d& x, const Vector3d& y);

// 2 dE(x, y)/d nu_y and 2 dE(x, y)/d nu_x.
double kernel_N(const Vector3d& x, const Vector3d& y, const Vector3d& nu_y);
double kernel_N_adjoint(const Vector3d& x, const Vector3d& y, const Vector3d& nu_x);

// Rotated polar rule on the reference sphere around u0, graded toward u0. The
// visitor receives (y, outward normal at y, area weight).
struct PolarPatchRule {
  int levels = 7;
  int order = 8;
  int n_phi = 48;
};
void visit_polar_patch(const Surface& s, const Vector3d& u0, const PolarPatchRule& rule,
                       const std::function<void(const Vector3d&, const Vector3d&, double)>& visit);
// Same rule; the visitor also receives the reference parameter of y first.
void visit_polar_patch(const Surface& s, const Vector3d& u0, const PolarPatchRule& rule,
                       const std::function<void(const Vector3d&, const Vector3d&, const Vector3d&, double)>& visit);

struct SelfIntegrals {
  double single = 0.0;          // int E(x, y) dy
  double dbl = 0.0;             // int 2 dE/d nu_y dy (1 on a smooth surface)
  double dbl_adjoint = 0.0;     // int 2 dE/d nu_x dy
};
SelfIntegrals self_integrals(const Surface& s, const BoundaryPoint& x, const PolarPatchRule& rule = {});

enum class LayerKind { Single, Double, DoubleAdjoint, Projection };
std::string to_string(LayerKind k);

struct LayerOperator {
  LayerKind kind = LayerKind::Single;
  MatrixXd matrix;
};

// Nystrom matrices acting on nodal values. Diagonals carry the singularity
// subtraction: (K f)_i = sum_j K(x_i, x_j) w_j (f_j - f_i) + f_i int K(x_i, y) dy.
struct LayerOperators {
  LayerOperator S, N, NStar, P;
  VectorXd s_self, n_self, nstar_self;
};

LayerOperators assemble_layers(const Surface& s, const BoundaryMesh& mesh, unsigned jobs = 1);

// Singular part of the boundary Green function at (x, y) with curvature data
// of x.
double g_sing(const Surface& s, const BoundaryPoint& x, const CurvatureData& kx, const BoundaryPoint& y);

// Second-fundamental-form contribution II_x(e) - II_x(*e) for the unit tangent
// direction e at x.
double second_form_anisotropy(const CurvatureData& kx, const Vector3d& e);

class GreenSolver {
 public:
  GreenSolver(Surface surface, int n_theta = 36, unsigned jobs = 1);

  const Surface& surface() const { return surface_; }
  const BoundaryMesh& mesh() const { return mesh_; }
  const LayerOperators& layers() const { return layers_; }
  unsigned jobs() const { return jobs_; }
  double volume() const { return volume_; }
  double rcond() const { return rcond_; }

  // Solves (I - N) v + mu = rhs together with w^T v = mean.
  VectorXd solve(const VectorXd& rhs, double mean, double* mu = nullptr) const;

  // Single-layer potential of nodal data at an arbitrary boundary point (with
  // the value of the density there) or at an interior point (density value at
  // the foot point supplied by the caller).
  double single_layer_at(const BoundaryPoint& y, const VectorXd& h, double h_y, const SelfIntegrals& self) const;

  // Harmonic function with Neumann data h and nodal values v, evaluated at a
  // boundary point y off the nodes (Nystrom interpolation).
  double neumann_interpolate(const BoundaryPoint& y, const VectorXd& v, const VectorXd& h, double h_y, double mu,
                             const SelfIntegrals& self) const;

  // Same, with the integrals taken on the patch rule around y: v interpolated
  // from the nodes and h evaluated directly. Accurate where the nodal sums
  // see the weak singularity of the double layer off the nodes.
  double neumann_boundary(const BoundaryPoint& y, const VectorXd& v,
                          const std::function<double(const BoundaryPoint&)>& h, double mu) const;

  // Same harmonic function at an interior point. Sets near_boundary when x is
  // closer to the surface than one mesh spacing.
  // Within two spacings of the surface the integrals switch to the graded
  // patch rule around the foot point, with v interpolated from the nodes.
  double neumann_interior(const Vector3d& x, const VectorXd& v, const std::function<double(const BoundaryPoint&)>& h,
                          const VectorXd& h_nodes, bool* near_boundary = nullptr) const;

  // Local tensor Lagrange interpolation (6 x 6 nodes in polar angle and
  // azimuth, reflected across the poles) of nodal data at parameter u.
  double interpolate_nodal(const VectorXd& v, const Vector3d& u) const;

 private:
  Surface surface_;
  BoundaryMesh mesh_;
  LayerOperators layers_;
  unsigned jobs_;
  double volume_ = 0.0;
  double rcond_ = 0.0;
  std::shared_ptr<Eigen::PartialPivLU<MatrixXd>> lu_;
};

// Explicit singular model of G(x*, .) built from functions harmonic in a
// convex domain:
//   G_s(z) = 1/(2 pi r) - H/(4 pi) log(r + t3) + (l1 - l2)/(16 pi) (t1^2 - t2^2)/(r + t3)^2
// with t = z - x* in the principal frame (t3 along the inward normal). The
// remainder G - G_s is harmonic with bounded Neumann data.
class PeeledGreen {
 public:
  PeeledGreen(const Surface& s, const BoundaryPoint& x_star, const CurvatureData& k, double area);
  double value(const Vector3d& z) const;             // singular model G_s(z)
  Vector3d gradient(const Vector3d& z) const;
  double neumann_defect(const Vector3d& z, const Vector3d& nu) const;  // -1/|dM| - d_nu G_s

 private:
  Vector3d x_;
  Vector3d n_;  // inward normal at x*
  Vector3d e1_, e2_;
  double h_, dl_, area_;
};

// G(x*, .) for a boundary source x*: peeled singular model plus the harmonic
// remainder solved on the mesh.
class BoundaryGreen {
 public:
  BoundaryGreen(const GreenSolver& solver, const BoundaryPoint& x_star);
  double value(const BoundaryPoint& y) const;    // G(x*, y), y != x*
  double regular(const BoundaryPoint& y) const;  // G(x*, y) - g_sing(x*, y)
  const BoundaryPoint& source() const { return x_; }
  const CurvatureData& frame() const { return k_; }

 private:
  const GreenSolver* solver_;
  BoundaryPoint x_;
  CurvatureData k_;
  PeeledGreen model_;
  VectorXd v_, h_;
  double mu_ = 0.0;
};

struct RegularSample {
  int direction = 0;  // 0: along E1, 1: along E2
  double offset = 0.0;
  double value = 0.0;
};

struct RegularPartOptions {
  double mu = 0.9;        // Hoelder exponent of the extrapolation model
  double h0 = 0.0;        // first offset; 0 picks a tenth of the length scale
  int levels = 6;
  bool full_matrix = false;
};

struct GreenDecomposition {
  BoundaryPoint x_star;
  CurvatureData frame;
  MatrixXd boundary_green;  // G(x_i, x_j); empty unless requested
  std::vector<RegularSample> samples;
  double r_star = 0.0;
  double r_star_spread = 0.0;  // disagreement of the two directions
  double mu = 0.9;
  std::function<double(const BoundaryPoint&, const BoundaryPoint&)> g_sing;
};

GreenDecomposition solve_boundary_green(const GreenSolver& solver, const BoundaryPoint& x_star,
                                        const RegularPartOptions& opt = {});

struct RefinementRow {
  int mesh_theta = 0;
  Eigen::Index nodes = 0;
  double spacing = 0.0;
  double r_star = 0.0;
  double r_star_spread = 0.0;
  double rcond = 0.0;
};

// R(x*, x*) on a sequence of meshes (latitude node counts).
std::vector<RefinementRow> regular_part_table(const Surface& s, const Vector3d& center_u, const std::vector<int>& meshes,
                                              const RegularPartOptions& opt = {}, unsigned jobs = 1);

// G(x_i, x_j) for all node pairs with the discrete point source of node j
// (diagonal entries are cell averages, not point values).
MatrixXd boundary_green_matrix(const GreenSolver& solver);

struct GreenValue {
  double value = 0.0;
  bool near_boundary = false;
};

// G(x, .) for an interior source x. evaluate() accepts interior points and
// boundary points.
class InteriorGreen {
 public:
  InteriorGreen(const GreenSolver& solver, const Vector3d& x);
  GreenValue at_boundary(const BoundaryPoint& y) const;
  GreenValue at_interior(const Vector3d& y) const;
  const Vector3d& source() const { return x_; }

 private:
  const GreenSolver* solver_;
  Vector3d x_;
  VectorXd c_, h_;
  double mu_ = 0.0;
  bool near_ = false;
  double neumann_data(const BoundaryPoint& y) const;
};

GreenValue evaluate_G_interior(const GreenSolver& solver, const Vector3d& x, const BoundaryPoint& y);
GreenValue evaluate_G_interior(const GreenSolver& solver, const Vector3d& x, const Vector3d& y);

// F solves Delta F = -1, d_nu F = -|M|/|dM|, zero boundary mean. Written as
// -|x - c|^2 / 6 plus a harmonic correction.
class FSolution {
 public:
  FSolution(const GreenSolver& solver);
  double at_boundary(const BoundaryPoint& y) const;
  GreenValue at_interior(const Vector3d& x) const;
  double volume_integral() const { return integral_; }
  double boundary_mean() const { return boundary_mean_; }
  // d_nu F at a boundary point from the known Neumann data.
  double neumann_data(const BoundaryPoint& y) const;

 private:
  const GreenSolver* solver_;
  Vector3d c_;
  VectorXd w_, g_;
  double mu_ = 0.0;
  double integral_ = 0.0;
  double boundary_mean_ = 0.0;
  double harmonic_data(const BoundaryPoint& y) const;
};

struct FResult {
  std::shared_ptr<FSolution> field;
  double f_star = 0.0;
  double integral = 0.0;
};
FResult solve_F(const GreenSolver& solver, const BoundaryPoint& x_star);

}  // namespace nesc
