#include "nesc/greens.hpp"

#include <algorithm>
#include <cmath>

namespace nesc {

namespace {

constexpr double kFourPi = 4.0 * kPi;

struct LocalFrame {
  Vector3d x;
  Vector3d nu;
  double density;
};

LocalFrame local_frame(const Surface& s, const Vector3d& u) {
  const SurfaceJet j = s.model().jet(u, Vector2d::Zero(), 1);
  const Vector3d c = j.dx.col(0).cross(j.dx.col(1));
  return {j.x, s.model().orientation * c.normalized(), c.norm()};
}

// Least-squares fit of c0 + c1 t^mu; returns c0.
double holder_fit(const std::vector<double>& t, const std::vector<double>& r, double mu) {
  Eigen::MatrixXd A(t.size(), 2);
  Eigen::VectorXd b(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    A(k, 0) = 1.0;
    A(k, 1) = std::pow(t[k], mu);
    b(k) = r[k];
  }
  return A.colPivHouseholderQr().solve(b)(0);
}

}  // namespace

BoundaryMesh BoundaryMesh::build(const Surface& s, int n_theta) {
  if (n_theta < 4) throw std::invalid_argument("mesh needs at least 4 latitude nodes");
  const SphereGrid g = sphere_grid(n_theta);
  BoundaryMesh m;
  m.n_theta = n_theta;
  const Eigen::Index n = static_cast<Eigen::Index>(g.u.size());
  m.weights.resize(n);
  m.mean_curvature.resize(n);
  m.nodes.resize(n);
  m.normals.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const LocalFrame f = local_frame(s, g.u[i]);
    m.nodes[i] = {g.u[i], f.x};
    m.normals[i] = f.nu;
    m.weights[i] = g.weight[i] * f.density;
    m.mean_curvature[i] = curvature_at(s, g.u[i]).mean;
  }
  m.spacing = std::sqrt(m.area() / static_cast<double>(n));
  return m;
}

double kernel_E(const Vector3d& x, const Vector3d& y) {
  const double r = (x - y).norm();
  if (r == 0.0) throw NumericalError("greens_bem", "kernel_E at coincident points");
  return -1.0 / (kFourPi * r);
}

double kernel_N(const Vector3d& x, const Vector3d& y, const Vector3d& nu_y) {
  const Vector3d d = y - x;
  const double r = d.norm();
  return d.dot(nu_y) / (2.0 * kPi * r * r * r);
}

double kernel_N_adjoint(const Vector3d& x, const Vector3d& y, const Vector3d& nu_x) {
  const Vector3d d = x - y;
  const double r = d.norm();
  return d.dot(nu_x) / (2.0 * kPi * r * r * r);
}

void visit_polar_patch(const Surface& s, const Vector3d& u0, const PolarPatchRule& rule,
                       const std::function<void(const Vector3d&, const Vector3d&, double)>& visit) {
  visit_polar_patch(s, u0, rule, [&](const Vector3d&, const Vector3d& y, const Vector3d& nu, double w) { visit(y, nu, w); });
}

void visit_polar_patch(const Surface& s, const Vector3d& u0, const PolarPatchRule& rule,
                       const std::function<void(const Vector3d&, const Vector3d&, const Vector3d&, double)>& visit) {
  Vector3d t1, t2;
  chart_frame(u0, t1, t2);
  const QuadratureRule th = graded_rule(0.0, kPi, rule.levels, rule.order, 0.3);
  const double dphi = 2.0 * kPi / rule.n_phi;
  for (Eigen::Index i = 0; i < th.size(); ++i) {
    const double st = std::sin(th.nodes[i]), ct = std::cos(th.nodes[i]);
    for (int k = 0; k < rule.n_phi; ++k) {
      const double phi = dphi * (k + 0.5);
      const Vector3d u = ct * u0 + st * (std::cos(phi) * t1 + std::sin(phi) * t2);
      const LocalFrame f = local_frame(s, u);
      visit(u, f.x, f.nu, th.weights[i] * st * dphi * f.density);
    }
  }
}

SelfIntegrals self_integrals(const Surface& s, const BoundaryPoint& x, const PolarPatchRule& rule) {
  const Vector3d nu_x = s.outward_normal(x.u);
  SelfIntegrals out;
  visit_polar_patch(s, x.u, rule, [&](const Vector3d& y, const Vector3d& nu, double w) {
    const double r = (y - x.x).norm();
    if (r == 0.0) return;
    out.single += w * (-1.0 / (kFourPi * r));
    out.dbl += w * kernel_N(x.x, y, nu);
    out.dbl_adjoint += w * kernel_N_adjoint(x.x, y, nu_x);
  });
  return out;
}

std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Single: return "single-layer";
    case LayerKind::Double: return "double-layer";
    case LayerKind::DoubleAdjoint: return "double-layer-adjoint";
    case LayerKind::Projection: return "projection";
  }
  return "unknown";
}

LayerOperators assemble_layers(const Surface& s, const BoundaryMesh& mesh, unsigned jobs) {
  const Eigen::Index n = mesh.size();
  LayerOperators ops;
  ops.S = {LayerKind::Single, MatrixXd(n, n)};
  ops.N = {LayerKind::Double, MatrixXd(n, n)};
  ops.NStar = {LayerKind::DoubleAdjoint, MatrixXd(n, n)};
  ops.P = {LayerKind::Projection, MatrixXd(n, n)};
  ops.s_self.resize(n);
  ops.n_self.resize(n);
  ops.nstar_self.resize(n);
  const double area = mesh.area();
  // Column-major storage: fill columns of the transposes, one task per row.
  MatrixXd St(n, n), Nt(n, n), NSt(n, n);
  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t ii) {
    const Eigen::Index i = static_cast<Eigen::Index>(ii);
    const Vector3d& xi = mesh.nodes[i].x;
    const Vector3d& ni = mesh.normals[i];
    const SelfIntegrals si = self_integrals(s, mesh.nodes[i]);
    double ssum = 0.0, nsum = 0.0, nssum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vector3d& xj = mesh.nodes[j].x;
      const double wj = mesh.weights[j];
      const double e = -wj / (kFourPi * (xi - xj).norm());
      const double d = wj * kernel_N(xi, xj, mesh.normals[j]);
      const double da = wj * kernel_N_adjoint(xi, xj, ni);
      St(j, i) = e;
      Nt(j, i) = d;
      NSt(j, i) = da;
      ssum += e;
      nsum += d;
      nssum += da;
    }
    St(i, i) = si.single - ssum;
    Nt(i, i) = si.dbl - nsum;
    NSt(i, i) = si.dbl_adjoint - nssum;
    ops.s_self[i] = si.single;
    ops.n_self[i] = si.dbl;
    ops.nstar_self[i] = si.dbl_adjoint;
  });
  ops.S.matrix = St.transpose();
  ops.N.matrix = Nt.transpose();
  ops.NStar.matrix = NSt.transpose();
  ops.P.matrix = VectorXd::Ones(n) * (mesh.weights.transpose() / area);
  return ops;
}

double second_form_anisotropy(const CurvatureData& kx, const Vector3d& e) {
  const double spread = std::max({std::abs(kx.lambda1), std::abs(kx.lambda2), 1.0});
  if (std::abs(kx.lambda1 - kx.lambda2) < 1e-9 * spread) return 0.0;
  const double c = e.dot(kx.e1), s = e.dot(kx.e2);
  const double n2 = c * c + s * s;
  return (kx.lambda1 - kx.lambda2) * (c * c - s * s) / n2;
}

double g_sing(const Surface& s, const BoundaryPoint& x, const CurvatureData& kx, const BoundaryPoint& y) {
  const double dg = (x.x - y.x).norm();
  if (dg == 0.0) throw NumericalError("greens_bem", "singular part evaluated on the diagonal");
  const Vector3d w = boundary_log(s, x, y);
  const double dh = w.norm();
  return 1.0 / (2.0 * kPi * dg) - kx.mean / kFourPi * std::log(dh) + second_form_anisotropy(kx, w / dh) / (16.0 * kPi);
}

GreenSolver::GreenSolver(Surface surface, int n_theta, unsigned jobs)
    : surface_(std::move(surface)), jobs_(std::max(1u, jobs)) {
  mesh_ = BoundaryMesh::build(surface_, n_theta);
  layers_ = assemble_layers(surface_, mesh_, jobs_);
  const Eigen::Index n = mesh_.size();
  const Vector3d c = surface_.model().center();
  double vol = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) vol += (mesh_.nodes[i].x - c).dot(mesh_.normals[i]) * mesh_.weights[i];
  volume_ = vol / 3.0;
  MatrixXd A(n + 1, n + 1);
  A.topLeftCorner(n, n) = MatrixXd::Identity(n, n) - layers_.N.matrix;
  A.topRightCorner(n, 1).setOnes();
  A.bottomLeftCorner(1, n) = mesh_.weights.transpose();
  A(n, n) = 0.0;
  lu_ = std::make_shared<Eigen::PartialPivLU<MatrixXd>>(A);
  rcond_ = lu_->rcond();
  if (!(rcond_ > 1e-13)) throw NumericalError("greens_bem", "bordered Fredholm system is singular at this resolution");
}

VectorXd GreenSolver::solve(const VectorXd& rhs, double mean, double* mu) const {
  const Eigen::Index n = mesh_.size();
  VectorXd b(n + 1);
  b.head(n) = rhs;
  b(n) = mean;
  const VectorXd x = lu_->solve(b);
  if (mu) *mu = x(n);
  return x.head(n);
}

double GreenSolver::single_layer_at(const BoundaryPoint& y, const VectorXd& h, double h_y,
                                    const SelfIntegrals& self) const {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < mesh_.size(); ++j) {
    const double r = (y.x - mesh_.nodes[j].x).norm();
    if (r < 1e-14) continue;
    acc -= mesh_.weights[j] * (h[j] - h_y) / (kFourPi * r);
  }
  return acc + h_y * self.single;
}

double GreenSolver::neumann_interpolate(const BoundaryPoint& y, const VectorXd& v, const VectorXd& h, double h_y,
                                        double mu, const SelfIntegrals& self) const {
  double dsum = 0.0, dv = 0.0;
  for (Eigen::Index j = 0; j < mesh_.size(); ++j) {
    if ((y.x - mesh_.nodes[j].x).norm() < 1e-14) continue;
    const double d = mesh_.weights[j] * kernel_N(y.x, mesh_.nodes[j].x, mesh_.normals[j]);
    dsum += d;
    dv += d * v[j];
  }
  const double num = -2.0 * single_layer_at(y, h, h_y, self) + dv - mu;
  return num / (1.0 - self.dbl + dsum);
}

double GreenSolver::neumann_boundary(const BoundaryPoint& y, const VectorXd& v,
                                     const std::function<double(const BoundaryPoint&)>& h, double mu) const {
  double dl = 0.0, sl = 0.0;
  visit_polar_patch(surface_, y.u, PolarPatchRule{}, [&](const Vector3d& u, const Vector3d& z, const Vector3d& nu, double w) {
    const double r = (z - y.x).norm();
    if (r == 0.0) return;
    dl += w * kernel_N(y.x, z, nu) * interpolate_nodal(v, u);
    sl -= w * h(BoundaryPoint{u, z}) / (kFourPi * r);
  });
  return dl - 2.0 * sl - mu;
}

double GreenSolver::neumann_interior(const Vector3d& x, const VectorXd& v,
                                     const std::function<double(const BoundaryPoint&)>& h, const VectorXd& h_nodes,
                                     bool* near_boundary) const {
  const BoundaryPoint foot = surface_.project(x);
  const double depth = (x - foot.x).norm();
  if (near_boundary) *near_boundary = depth < mesh_.spacing;
  const double h_foot = h(foot);

  if (depth < 2.0 * mesh_.spacing) {
    // close evaluation: u = v_f + 1/2 int N (v - v_f) - int E h, all on the
    // patch rule graded toward the foot point
    const double v_foot = interpolate_nodal(v, foot.u);
    double dl = 0.0, sl = 0.0;
    visit_polar_patch(surface_, foot.u, PolarPatchRule{},
                      [&](const Vector3d& u, const Vector3d& y, const Vector3d& nu, double w) {
                        dl += w * kernel_N(x, y, nu) * (interpolate_nodal(v, u) - v_foot);
                        sl -= w * h(BoundaryPoint{u, y}) / (kFourPi * (y - x).norm());
                      });
    return v_foot + 0.5 * dl - sl;
  }

  // single layer with the foot-point value subtracted; int E(x, .) by a
  // patch rule graded toward the foot point
  double s_self = 0.0;
  visit_polar_patch(surface_, foot.u, PolarPatchRule{}, [&](const Vector3d& y, const Vector3d&, double w) {
    s_self -= w / (kFourPi * (y - x).norm());
  });
  double sl = h_foot * s_self, dsum = 0.0, dv = 0.0;
  for (Eigen::Index j = 0; j < mesh_.size(); ++j) {
    const Vector3d& z = mesh_.nodes[j].x;
    const double r = (z - x).norm();
    sl -= mesh_.weights[j] * (h_nodes[j] - h_foot) / (kFourPi * r);
    const double d = mesh_.weights[j] * kernel_N(x, z, mesh_.normals[j]);
    dsum += d;
    dv += d * v[j];
  }
  // int 2 dE/d nu_y = 2 inside; normalising by the discrete sum keeps the
  // near-singular error of the double layer from blowing up
  return (dv - 2.0 * sl) / dsum;
}

double GreenSolver::interpolate_nodal(const VectorXd& v, const Vector3d& u) const {
  constexpr int kStencil = 6;
  const int nt = mesh_.n_theta, np = 2 * nt;
  const QuadratureRule& gl = gauss_legendre(nt);
  const Vector3d un = u.normalized();
  const double theta = std::acos(std::clamp(un.z(), -1.0, 1.0));
  const double phi = std::atan2(un.y(), un.x());

  // polar angles of the rows, extended across both poles; row r of the
  // extension maps to grid row idx[r] at azimuth shifted by pi when flipped
  std::vector<double> ext;
  std::vector<int> idx;
  std::vector<bool> flip;
  for (int i = kStencil - 1; i >= 0; --i) {  // reflected across theta = 0
    ext.push_back(-std::acos(gl.nodes[nt - 1 - i]));
    idx.push_back(nt - 1 - i);
    flip.push_back(true);
  }
  for (int i = nt - 1; i >= 0; --i) {  // GL nodes ascend in z, so theta descends
    ext.push_back(std::acos(gl.nodes[i]));
    idx.push_back(i);
    flip.push_back(false);
  }
  for (int i = 0; i < kStencil; ++i) {  // reflected across theta = pi
    ext.push_back(2.0 * kPi - std::acos(gl.nodes[i]));
    idx.push_back(i);
    flip.push_back(true);
  }
  const int m = static_cast<int>(ext.size());
  int lo = static_cast<int>(std::upper_bound(ext.begin(), ext.end(), theta) - ext.begin()) - kStencil / 2;
  lo = std::clamp(lo, 0, m - kStencil);

  const double dphi = 2.0 * kPi / np;
  auto row_value = [&](int row, double az) {
    // uniform periodic azimuths at (j + 1/2) dphi
    const double s = az / dphi - 0.5;
    const int j0 = static_cast<int>(std::floor(s)) - kStencil / 2 + 1;
    double acc = 0.0;
    for (int a = 0; a < kStencil; ++a) {
      double w = 1.0;
      for (int b = 0; b < kStencil; ++b)
        if (b != a) w *= (s - (j0 + b)) / static_cast<double>(a - b);
      const int j = ((j0 + a) % np + np) % np;
      acc += w * v[row * np + j];
    }
    return acc;
  };

  double out = 0.0;
  for (int a = 0; a < kStencil; ++a) {
    double w = 1.0;
    for (int b = 0; b < kStencil; ++b)
      if (b != a) w *= (theta - ext[lo + b]) / (ext[lo + a] - ext[lo + b]);
    const double az = flip[lo + a] ? phi + kPi : phi;
    out += w * row_value(idx[lo + a], az);
  }
  return out;
}

PeeledGreen::PeeledGreen(const Surface&, const BoundaryPoint& x_star, const CurvatureData& k, double area)
    : x_(x_star.x), n_(-k.outward), e1_(k.e1), e2_(k.e2), h_(k.mean), dl_(k.lambda1 - k.lambda2), area_(area) {}

double PeeledGreen::value(const Vector3d& z) const {
  const Vector3d t = z - x_;
  const double r = t.norm();
  const double t1 = t.dot(e1_), t2 = t.dot(e2_), t3 = t.dot(n_);
  const double rp = r + t3;
  if (!(rp > 0.0)) throw NumericalError("greens_bem", "singular model evaluated on its branch cut");
  return 1.0 / (2.0 * kPi * r) - h_ / kFourPi * std::log(rp) + dl_ / (16.0 * kPi) * (t1 * t1 - t2 * t2) / (rp * rp);
}

Vector3d PeeledGreen::gradient(const Vector3d& z) const {
  const Vector3d t = z - x_;
  const double r = t.norm();
  const double t1 = t.dot(e1_), t2 = t.dot(e2_), t3 = t.dot(n_);
  const double rp = r + t3;
  const Vector3d drp = t / r + n_;
  Vector3d g = -t / (2.0 * kPi * r * r * r);
  g -= h_ / kFourPi * drp / rp;
  const double q = t1 * t1 - t2 * t2;
  g += dl_ / (16.0 * kPi) * ((2.0 * t1 * e1_ - 2.0 * t2 * e2_) / (rp * rp) - 2.0 * q * drp / (rp * rp * rp));
  return g;
}

double PeeledGreen::neumann_defect(const Vector3d& z, const Vector3d& nu) const {
  return -1.0 / area_ - gradient(z).dot(nu);
}

BoundaryGreen::BoundaryGreen(const GreenSolver& solver, const BoundaryPoint& x_star)
    : solver_(&solver),
      x_(x_star),
      k_(curvature_at(solver.surface(), x_star.u)),
      model_(solver.surface(), x_star, k_, solver.mesh().area()) {
  const Surface& s = solver.surface();
  const BoundaryMesh& mesh = solver.mesh();
  h_.resize(mesh.size());
  for (Eigen::Index j = 0; j < mesh.size(); ++j) h_[j] = model_.neumann_defect(mesh.nodes[j].x, mesh.normals[j]);
  double gs_integral = 0.0;
  visit_polar_patch(s, x_star.u, PolarPatchRule{}, [&](const Vector3d& y, const Vector3d&, double w) {
    if ((y - x_star.x).norm() > 0.0) gs_integral += w * model_.value(y);
  });
  v_ = solver.solve(-2.0 * (solver.layers().S.matrix * h_), -gs_integral, &mu_);
}

double BoundaryGreen::value(const BoundaryPoint& y) const {
  const Surface& s = solver_->surface();
  const Vector3d nu = s.outward_normal(y.u);
  const double hy = model_.neumann_defect(y.x, nu);
  return solver_->neumann_interpolate(y, v_, h_, hy, mu_, self_integrals(s, y)) + model_.value(y.x);
}

double BoundaryGreen::regular(const BoundaryPoint& y) const {
  return value(y) - g_sing(solver_->surface(), x_, k_, y);
}

namespace {

void fit_samples(GreenDecomposition& d) {
  double c[2];
  for (int dir = 0; dir < 2; ++dir) {
    std::vector<double> t, r;
    for (const auto& s : d.samples) {
      if (s.direction != dir) continue;
      t.push_back(s.offset);
      r.push_back(s.value);
    }
    c[dir] = holder_fit(t, r, d.mu);
  }
  d.r_star = 0.5 * (c[0] + c[1]);
  d.r_star_spread = std::abs(c[0] - c[1]);
}

}  // namespace

GreenDecomposition solve_boundary_green(const GreenSolver& solver, const BoundaryPoint& x_star,
                                        const RegularPartOptions& opt) {
  const Surface& s = solver.surface();
  GreenDecomposition out;
  out.x_star = x_star;
  out.frame = curvature_at(s, x_star.u);
  out.mu = opt.mu;
  const CurvatureData k = out.frame;
  out.g_sing = [s, k, xs = x_star.x](const BoundaryPoint& x, const BoundaryPoint& y) {
    return g_sing(s, x, (x.x - xs).norm() == 0.0 ? k : curvature_at(s, x.u), y);
  };
  if (opt.full_matrix) out.boundary_green = boundary_green_matrix(solver);

  std::vector<BoundaryPoint> probes;
  std::vector<RegularSample> tags;
  const double h0 = opt.h0 > 0.0 ? opt.h0 : 0.1 * s.model().length_scale();
  const int levels = opt.levels;
  GeodesicOptions geo;
  geo.monitor = false;
  for (int dir = 0; dir < 2; ++dir) {
    const Vector3d e = dir == 0 ? k.e1 : k.e2;
    for (int lv = 0; lv < levels; ++lv) {
      const double t = h0 * std::pow(0.5, lv);
      probes.push_back(boundary_exponential(s, x_star, e, t, geo).end);
      tags.push_back({dir, t, 0.0});
    }
  }

  const BoundaryGreen green(solver, x_star);
  std::vector<double> values(probes.size());
  parallel_for(probes.size(), solver.jobs(), [&](std::size_t p) { values[p] = green.regular(probes[p]); });
  for (std::size_t p = 0; p < probes.size(); ++p) {
    tags[p].value = values[p];
    out.samples.push_back(tags[p]);
  }
  fit_samples(out);
  return out;
}

std::vector<RefinementRow> regular_part_table(const Surface& s, const Vector3d& center_u, const std::vector<int>& meshes,
                                              const RegularPartOptions& opt, unsigned jobs) {
  std::vector<RefinementRow> rows;
  const BoundaryPoint x = s.point(center_u.normalized());
  for (int m : meshes) {
    const GreenSolver solver(s, m, jobs);
    const GreenDecomposition d = solve_boundary_green(solver, x, opt);
    rows.push_back({m, solver.mesh().size(), solver.mesh().spacing, d.r_star, d.r_star_spread, solver.rcond()});
  }
  return rows;
}

MatrixXd boundary_green_matrix(const GreenSolver& solver) {
  const BoundaryMesh& mesh = solver.mesh();
  const Eigen::Index n = mesh.size();
  const double area = mesh.area();
  MatrixXd B(n, n);
  // column j: discrete point source at node j
  B = -2.0 * solver.layers().S.matrix * mesh.weights.cwiseInverse().asDiagonal();
  B.colwise() += 2.0 * solver.layers().s_self / area;
  MatrixXd Y(n, n);
  for (Eigen::Index j = 0; j < n; ++j) Y.col(j) = solver.solve(B.col(j), 0.0);
  return Y.transpose();
}

InteriorGreen::InteriorGreen(const GreenSolver& solver, const Vector3d& x) : solver_(&solver), x_(x) {
  const Surface& s = solver.surface();
  if (!s.inside(x)) throw std::invalid_argument("interior Green function needs a source inside the domain");
  const BoundaryMesh& mesh = solver.mesh();
  const Eigen::Index n = mesh.size();
  h_.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) h_[j] = neumann_data(mesh.nodes[j]);
  const BoundaryPoint foot = s.project(x);
  near_ = (foot.x - x).norm() < mesh.spacing;
  double phi_integral = 0.0;
  visit_polar_patch(s, foot.u, PolarPatchRule{}, [&](const Vector3d& y, const Vector3d&, double w) {
    phi_integral += w / (kFourPi * (y - x).norm());
  });
  c_ = solver.solve(-2.0 * (solver.layers().S.matrix * h_), -phi_integral, &mu_);
}

double InteriorGreen::neumann_data(const BoundaryPoint& y) const {
  const Vector3d nu = solver_->surface().outward_normal(y.u);
  const Vector3d d = y.x - x_;
  const double r = d.norm();
  return -1.0 / solver_->mesh().area() + d.dot(nu) / (kFourPi * r * r * r);
}

GreenValue InteriorGreen::at_boundary(const BoundaryPoint& y) const {
  const double phi = 1.0 / (kFourPi * (y.x - x_).norm());
  const double c = solver_->neumann_boundary(y, c_, [this](const BoundaryPoint& b) { return neumann_data(b); }, mu_);
  return {phi + c, near_};
}

GreenValue InteriorGreen::at_interior(const Vector3d& y) const {
  const double r = (y - x_).norm();
  if (r == 0.0) throw NumericalError("greens_bem", "interior Green function evaluated at its pole");
  bool near = false;
  const double c = solver_->neumann_interior(
      y, c_, [this](const BoundaryPoint& b) { return neumann_data(b); }, h_, &near);
  return {1.0 / (kFourPi * r) + c, near || near_};
}

GreenValue evaluate_G_interior(const GreenSolver& solver, const Vector3d& x, const BoundaryPoint& y) {
  return InteriorGreen(solver, x).at_boundary(y);
}

GreenValue evaluate_G_interior(const GreenSolver& solver, const Vector3d& x, const Vector3d& y) {
  return InteriorGreen(solver, x).at_interior(y);
}

FSolution::FSolution(const GreenSolver& solver) : solver_(&solver), c_(solver.surface().model().center()) {
  const BoundaryMesh& mesh = solver.mesh();
  const Eigen::Index n = mesh.size();
  g_.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) g_[j] = harmonic_data(mesh.nodes[j]);
  double sq_mean = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) sq_mean += mesh.weights[j] * (mesh.nodes[j].x - c_).squaredNorm() / 6.0;
  w_ = solver.solve(-2.0 * (solver.layers().S.matrix * g_), sq_mean, &mu_);

  // int_M F = -(1/6) int_M |x-c|^2 + int_dM (w du/dnu - u dw/dnu), u = |x-c|^2/6
  double r2 = 0.0, wint = 0.0, mean = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vector3d d = mesh.nodes[j].x - c_;
    const double dn = d.dot(mesh.normals[j]);
    const double u = d.squaredNorm() / 6.0;
    r2 += mesh.weights[j] * d.squaredNorm() * dn / 5.0;
    wint += mesh.weights[j] * (w_[j] * dn / 3.0 - u * g_[j]);
    mean += mesh.weights[j] * (w_[j] - u);
  }
  integral_ = -r2 / 6.0 + wint;
  boundary_mean_ = mean / mesh.area();
}

double FSolution::harmonic_data(const BoundaryPoint& y) const {
  const Vector3d nu = solver_->surface().outward_normal(y.u);
  return -solver_->volume() / solver_->mesh().area() + (y.x - c_).dot(nu) / 3.0;
}

double FSolution::neumann_data(const BoundaryPoint& y) const {
  const Vector3d nu = solver_->surface().outward_normal(y.u);
  return -(y.x - c_).dot(nu) / 3.0 + harmonic_data(y);
}

double FSolution::at_boundary(const BoundaryPoint& y) const {
  const double w = solver_->neumann_boundary(y, w_, [this](const BoundaryPoint& b) { return harmonic_data(b); }, mu_);
  return -(y.x - c_).squaredNorm() / 6.0 + w;
}

GreenValue FSolution::at_interior(const Vector3d& x) const {
  bool near = false;
  const double w = solver_->neumann_interior(
      x, w_, [this](const BoundaryPoint& b) { return harmonic_data(b); }, g_, &near);
  return {-(x - c_).squaredNorm() / 6.0 + w, near};
}

FResult solve_F(const GreenSolver& solver, const BoundaryPoint& x_star) {
  FResult r;
  r.field = std::make_shared<FSolution>(solver);
  r.f_star = r.field->at_boundary(x_star);
  r.integral = r.field->volume_integral();
  return r;
}

}  // namespace nesc
