#include "oracles.hpp"

#include "nesc/greens.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <memory>

using namespace nesc;

namespace {

const Vector3d kAxes(1.0, 0.8, 0.6);

const GreenSolver& solver(bool sphere, int mesh) {
  static std::map<std::pair<bool, int>, std::unique_ptr<GreenSolver>> cache;
  auto& slot = cache[{sphere, mesh}];
  if (!slot) slot = std::make_unique<GreenSolver>(sphere ? Surface::sphere() : Surface::ellipsoid(kAxes), mesh, default_jobs());
  return *slot;
}

double laplacian_fd(const std::function<double(const Vector3d&)>& f, const Vector3d& x, double h) {
  double acc = -6.0 * f(x);
  for (int k = 0; k < 3; ++k) {
    Vector3d e = Vector3d::Zero();
    e[k] = h;
    acc += f(x + e) + f(x - e);
  }
  return acc / (h * h);
}

// Flux of grad f through the sphere |y - c| = r by central differences.
double sphere_flux(const std::function<double(const Vector3d&)>& f, const Vector3d& c, double r, int n_theta = 12) {
  const SphereGrid g = sphere_grid(n_theta);
  const double h = 1e-3;
  double acc = 0.0;
  for (std::size_t i = 0; i < g.u.size(); ++i) {
    const Vector3d& u = g.u[i];
    acc += g.weight[i] * r * r * (f(c + (r + h) * u) - f(c + (r - h) * u)) / (2.0 * h);
  }
  return acc;
}

}  // namespace

TEST_CASE("fundamental solution") {
  const Vector3d x(0.1, 0.2, 0.3);
  CHECK(kernel_E(x, x + Vector3d(0.6, 0.0, 0.8)) == doctest::Approx(-1.0 / (4.0 * kPi)).epsilon(1e-15));
  const Vector3d y(-0.5, 0.4, 1.0);
  CHECK(kernel_E(2.0 * x, 2.0 * y) == doctest::Approx(0.5 * kernel_E(x, y)).epsilon(1e-15));
  CHECK(std::abs(laplacian_fd([&](const Vector3d& z) { return kernel_E(x, z); }, y, 1e-3)) < 1e-5);
  CHECK_THROWS_AS(kernel_E(x, x), NumericalError);
  // the double-layer kernel is weakly singular: 1/(4 pi d) on the unit sphere
  const Vector3d p = Vector3d(0.3, 0.4, 0.5).normalized(), q = Vector3d(0.35, 0.38, 0.5).normalized();
  CHECK(kernel_N(p, q, q) == doctest::Approx(1.0 / (4.0 * kPi * (p - q).norm())).epsilon(1e-12));
  CHECK(kernel_N_adjoint(p, q, p) == doctest::Approx(kernel_N(q, p, p)).epsilon(1e-14));
}

TEST_CASE("mesh weights reproduce the area") {
  const BoundaryMesh& ms = solver(true, 24).mesh();
  CHECK(std::abs(ms.area() / (4.0 * kPi) - 1.0) < 1e-8);
  CHECK(ms.weights.minCoeff() > 0.0);
  const BoundaryMesh& me = solver(false, 24).mesh();
  CHECK(std::abs(me.area() / measures(Surface::ellipsoid(kAxes), 96).area - 1.0) < 1e-8);
  for (std::size_t i = 0; i < me.normals.size(); i += 97) CHECK(std::abs(me.normals[i].norm() - 1.0) < 1e-12);
}

TEST_CASE("Gauss identity") {
  for (bool sphere : {true, false}) {
    const BoundaryMesh& m = solver(sphere, 24).mesh();
    auto flux = [&](const Vector3d& x) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < m.size(); ++j) acc += 0.5 * kernel_N(x, m.nodes[j].x, m.normals[j]) * m.weights[j];
      return acc;
    };
    CHECK(std::abs(flux(Vector3d::Zero()) - 1.0) < 1e-8);
    CHECK(std::abs(flux(Vector3d(0.2, -0.1, 0.15)) - 1.0) < 1e-8);
    CHECK(std::abs(flux(Vector3d(2.0, 0.5, 0.0))) < 1e-8);
  }
}

TEST_CASE("layer operators") {
  const GreenSolver& gs = solver(true, 24);
  const LayerOperators& L = gs.layers();
  const BoundaryMesh& m = gs.mesh();
  // jump constant: rows of the double layer integrate to one
  const VectorXd rows = L.N.matrix.rowwise().sum();
  CHECK((rows.array() - 1.0).abs().maxCoeff() < 1e-3);
  // P is the area average
  VectorXd f(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) f[i] = std::sin(3.0 * m.nodes[i].x.x()) + m.nodes[i].x.z();
  const VectorXd pf = L.P.matrix * f;
  const double avg = m.weights.dot(f) / m.area();
  CHECK((pf.array() - avg).abs().maxCoeff() < 1e-12);
  // S is symmetric with respect to the area-weighted inner product
  const MatrixXd ws = m.weights.asDiagonal() * L.S.matrix;
  CHECK((ws - ws.transpose()).norm() <= 1e-8 * ws.norm());
  CHECK(to_string(L.NStar.kind) == "double-layer-adjoint");
  CHECK(gs.rcond() > 1e-13);
}

TEST_CASE("regular part on the unit sphere") {
  const GreenSolver& gs = solver(true, 24);
  const GreenDecomposition d = solve_boundary_green(gs, gs.surface().at_angles(0.3, 0.2));
  const double exact = oracle::ball_r_star();
  CHECK(std::abs(d.r_star / exact - 1.0) < 0.02);
  CHECK(d.r_star_spread < 1e-6);
  CHECK(d.samples.size() == 12);
  const GreenDecomposition d2 = solve_boundary_green(gs, gs.surface().at_angles(2.1, -1.3));
  CHECK(std::abs(d.r_star - d2.r_star) < 1e-6);
}

TEST_CASE("spherical-harmonic oracle agrees with its summed form") {
  for (const Vector3d& x : {Vector3d(0.1, 0.2, 0.3), Vector3d(-0.4, 0.0, 0.2)})
    for (const Vector3d& y : {Vector3d(0.5, -0.2, 0.1), Vector3d(0.0, 0.6, 0.6)})
      CHECK(std::abs(oracle::ball_green_series(x, y) - oracle::ball_green_closed(x, y)) < 1e-12);
}

TEST_CASE("boundary Green function on the ball against the oracle") {
  const GreenSolver& gs = solver(true, 24);
  const BoundaryPoint xs = gs.surface().at_angles(0.4, 0.9);
  const BoundaryGreen g(gs, xs);
  for (const auto& [th, ph] : {std::pair{0.5, 1.0}, std::pair{1.5, 0.0}, std::pair{2.8, -2.0}}) {
    const BoundaryPoint y = gs.surface().at_angles(th, ph);
    CHECK(std::abs(g.value(y) - oracle::ball_green_closed(xs.x, y.x)) < 1e-3);
  }
}

TEST_CASE("interior Green function") {
  SUBCASE("ball oracle") {
    const GreenSolver& gs = solver(true, 24);
    for (const Vector3d& x : {Vector3d(0, 0, 0), Vector3d(0.2, -0.3, 0.1), Vector3d(0.0, 0.5, 0.5)}) {
      const InteriorGreen g(gs, x);
      for (const Vector3d& y : {Vector3d(0.3, 0.3, -0.3), Vector3d(-0.6, 0.1, 0.2)})
        CHECK(std::abs(g.at_interior(y).value - oracle::ball_green_closed(x, y)) < 1e-3);
      const BoundaryPoint b = gs.surface().at_angles(1.1, 0.4);
      CHECK(std::abs(g.at_boundary(b).value - oracle::ball_green_closed(x, b.x)) < 1e-3);
    }
  }
  SUBCASE("harmonic, unit flux and symmetric on an ellipsoid") {
    const GreenSolver& gs = solver(false, 24);
    const Vector3d x(0.1, 0.05, 0.15), y(-0.2, 0.1, -0.1);
    const InteriorGreen gx(gs, x), gy(gs, y);
    auto f = [&](const Vector3d& z) { return gx.at_interior(z).value; };
    CHECK(std::abs(laplacian_fd(f, y, 1e-3)) < 1e-4);
    CHECK(std::abs(sphere_flux(f, x, 0.3) + 1.0) < 1e-3);
    CHECK(std::abs(gx.at_interior(y).value - gy.at_interior(x).value) < 1e-3);
    CHECK(std::abs(evaluate_G_interior(gs, x, y).value - gx.at_interior(y).value) < 1e-12);
    // Neumann data -1/|dM| on the boundary, by one-sided differences
    const BoundaryPoint b = gs.surface().point(Vector3d(0.3, -0.5, 0.6));
    const Vector3d nu = gs.surface().outward_normal(b.u);
    const double h = 0.02;
    const double dn = (3.0 * gx.at_boundary(b).value - 4.0 * f(b.x - h * nu) + f(b.x - 2.0 * h * nu)) / (2.0 * h);
    CHECK(std::abs(dn + 1.0 / gs.mesh().area()) < 1e-3);
  }
}

TEST_CASE("boundary Green function on an ellipsoid") {
  const GreenSolver& gs = solver(false, 24);
  const Surface& s = gs.surface();
  const BoundaryPoint p = s.point(Vector3d(0.3, 0.2, 0.9));
  const BoundaryPoint q = s.point(Vector3d(-0.4, 0.5, 0.3));
  const BoundaryPoint r = s.point(Vector3d(0.1, -0.8, -0.4));
  const BoundaryGreen gp(gs, p), gq(gs, q), gr(gs, r);
  CHECK(std::abs(gp.value(q) - gq.value(p)) < 1e-3);
  CHECK(std::abs(gp.value(r) - gr.value(p)) < 1e-3);
  CHECK(std::abs(gq.value(r) - gr.value(q)) < 1e-3);

  SUBCASE("zero mean rows of the Green matrix") {
    const GreenSolver& coarse = solver(false, 12);
    const MatrixXd G = boundary_green_matrix(coarse);
    const VectorXd means = G * coarse.mesh().weights;
    CHECK(means.cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("second-form term vanishes on spheres") {
    const CurvatureData k = curvature_at(Surface::sphere(2.0), Vector3d(0.2, 0.3, 0.9));
    for (double t : {0.0, 0.4, 1.3, 2.7})
      CHECK(std::abs(second_form_anisotropy(k, std::cos(t) * k.e1 + std::sin(t) * k.e2)) < 1e-14);
    const CurvatureData ke = curvature_at(s, p.u);
    CHECK(std::abs(second_form_anisotropy(ke, ke.e1) - (ke.lambda1 - ke.lambda2)) < 1e-12);
  }
  SUBCASE("singular part dominance: logarithmic growth with slope -H/(4 pi)") {
    const CurvatureData k = curvature_at(s, p.u);
    std::vector<double> dev, logd;
    for (int lv = 0; lv < 5; ++lv) {
      const double t = 0.08 * std::pow(0.5, lv);
      const BoundaryPoint y = boundary_exponential(s, p, k.e1, t).end;
      const double d = (y.x - p.x).norm();
      dev.push_back(gp.value(y) - 1.0 / (2.0 * kPi * d));
      logd.push_back(std::log(d));
    }
    for (int lv = 2; lv < 5; ++lv) {
      const double slope = (dev[lv] - dev[lv - 1]) / (logd[lv] - logd[lv - 1]);
      CHECK(std::abs(slope + k.mean / (4.0 * kPi)) < 0.05 * k.mean / (4.0 * kPi));
    }
  }
}

TEST_CASE("regular part is symmetric near the diagonal") {
  // R(x, y) - R(y, x) vanishes as y approaches x
  const GreenSolver& gs = solver(false, 36);
  const Surface& s = gs.surface();
  const BoundaryPoint x = s.point(Vector3d(0.3, 0.2, 0.9));
  const CurvatureData k = curvature_at(s, x.u);
  const BoundaryGreen gx(gs, x);
  std::vector<double> a;
  for (double t : {0.2, 0.1, 0.05, 0.025}) {
    const BoundaryPoint y = boundary_exponential(s, x, (k.e1 + k.e2).normalized(), t).end;
    const BoundaryGreen gy(gs, y);
    a.push_back(std::abs(gx.regular(y) - gy.regular(x)));
  }
  CAPTURE(a[0]);
  CAPTURE(a[1]);
  CAPTURE(a[2]);
  CAPTURE(a[3]);
  CHECK(a[1] < a[0]);
  CHECK(a[2] < a[1]);
  CHECK(a[2] < 1e-3);
  CHECK(a[3] < 2e-4);
}

TEST_CASE("regular part converges under refinement") {
  // sphere: the discretisation error is at round-off; the distance to the
  // oracle is the extrapolation bias and does not depend on the mesh
  const auto sphere = regular_part_table(Surface::sphere(), Vector3d::UnitZ(), {12, 24, 36}, {}, default_jobs());
  for (const RefinementRow& r : sphere) {
    CHECK(std::abs(r.r_star / oracle::ball_r_star() - 1.0) < 0.02);
    CHECK(std::abs(r.r_star - sphere.back().r_star) < 1e-9);
  }
  // ellipsoid: successive differences shrink at least linearly
  const auto ell = regular_part_table(Surface::ellipsoid(kAxes), Vector3d(0.3, 0.2, 0.9), {12, 24, 48}, {}, default_jobs());
  const double d1 = std::abs(ell[1].r_star - ell[0].r_star), d2 = std::abs(ell[2].r_star - ell[1].r_star);
  CAPTURE(ell[0].r_star);
  CAPTURE(ell[1].r_star);
  CAPTURE(ell[2].r_star);
  CHECK(std::log2(d1 / d2) >= 1.0);
}

TEST_CASE("auxiliary problem F") {
  SUBCASE("unit ball") {
    const GreenSolver& gs = solver(true, 24);
    const FResult f = solve_F(gs, gs.surface().at_angles(0.0, 0.0));
    CHECK(std::abs(f.f_star) < 1e-8);
    CHECK(std::abs(f.integral - oracle::ball_F_integral()) < 1e-8);
    for (const Vector3d& x : {Vector3d(0, 0, 0), Vector3d(0.3, 0.1, -0.4), Vector3d(0.0, 0.0, 0.9)})
      CHECK(std::abs(f.field->at_interior(x).value - oracle::ball_exit_time(x)) < 1e-8);
  }
  SUBCASE("ellipsoid") {
    const GreenSolver& gs = solver(false, 24);
    const FResult f = solve_F(gs, gs.surface().point(Vector3d::UnitZ()));
    const double vol = gs.volume();
    CHECK(std::abs(vol - 4.0 * kPi / 3.0 * 0.48) < 1e-10);
    CHECK(std::abs(f.field->boundary_mean()) <= 1e-6 * gs.mesh().area());
    // Delta F = -1 through an inner sphere
    auto F = [&](const Vector3d& x) { return f.field->at_interior(x).value; };
    const double r = 0.4;
    CHECK(std::abs(sphere_flux(F, Vector3d::Zero(), r) + 4.0 * kPi / 3.0 * r * r * r) < 1e-3);
    // boundary flux by one-sided differences, averaged over the surface
    const SphereGrid g = sphere_grid(12);
    const double h = 0.02;
    double flux = 0.0;
    for (std::size_t i = 0; i < g.u.size(); ++i) {
      const BoundaryPoint b = gs.surface().point(g.u[i]);
      const Vector3d nu = gs.surface().outward_normal(b.u);
      const double dn = (3.0 * f.field->at_boundary(b) - 4.0 * F(b.x - h * nu) + F(b.x - 2.0 * h * nu)) / (2.0 * h);
      flux += g.weight[i] * gs.surface().area_density(b.u) * dn;
    }
    CHECK(std::abs(flux / gs.mesh().area() + vol / gs.mesh().area()) < 1e-3);
    CHECK(std::abs(f.field->neumann_data(gs.surface().point(Vector3d(0.2, 0.5, 0.3))) + vol / gs.mesh().area()) < 1e-12);
  }
}
