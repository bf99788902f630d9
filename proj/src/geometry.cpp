#include "nesc/geometry.hpp"

#include <unsupported/Eigen/AutoDiff>

#include <algorithm>
#include <array>
#include <cmath>

namespace nesc {

namespace {

using Ad1 = Eigen::AutoDiffScalar<Eigen::Vector2d>;
using Ad2 = Eigen::AutoDiffScalar<Eigen::Matrix<Ad1, 2, 1>>;

template <typename T>
Vector3<T> gnomonic(const Vector3d& u0, const Vector3d& t1, const Vector3d& t2, const T& p1, const T& p2) {
  using std::sqrt;
  Vector3<T> w;
  for (int k = 0; k < 3; ++k) w(k) = T(u0(k)) + p1 * T(t1(k)) + p2 * T(t2(k));
  const T n = sqrt(w(0) * w(0) + w(1) * w(1) + w(2) * w(2));
  for (int k = 0; k < 3; ++k) w(k) = w(k) / n;
  return w;
}

// Direction of d; the centre itself maps to the north pole.
Vector3d radial_direction(const Vector3d& d) {
  const double n = d.norm();
  return n > 0.0 ? Vector3d(d / n) : Vector3d(Vector3d::UnitZ());
}

Vector3d gnomonic_point(const Vector3d& u0, const Vector2d& p) {
  Vector3d t1, t2;
  chart_frame(u0, t1, t2);
  return (u0 + p(0) * t1 + p(1) * t2).normalized();
}

// Surfaces with a templated map get exact chart derivatives by forward
// automatic differentiation (nested for second order).
template <typename Derived>
class AnalyticModel : public SurfaceModel {
 public:
  Vector3d position(const Vector3d& u) const override { return self().template map<double>(u); }

  SurfaceJet jet(const Vector3d& u0, const Vector2d& p, int order) const override {
    Vector3d t1, t2;
    chart_frame(u0, t1, t2);
    SurfaceJet j;
    if (order <= 1) {
      const Ad1 p1(p(0), Eigen::Vector2d::UnitX());
      const Ad1 p2(p(1), Eigen::Vector2d::UnitY());
      const Vector3<Ad1> x = self().template map<Ad1>(gnomonic<Ad1>(u0, t1, t2, p1, p2));
      for (int k = 0; k < 3; ++k) {
        j.x(k) = x(k).value();
        j.dx(k, 0) = x(k).derivatives()(0);
        j.dx(k, 1) = x(k).derivatives()(1);
      }
      return j;
    }
    Ad2 p1, p2;
    p1.value() = Ad1(p(0), Eigen::Vector2d::UnitX());
    p2.value() = Ad1(p(1), Eigen::Vector2d::UnitY());
    p1.derivatives()(0) = Ad1(1.0, Eigen::Vector2d::Zero());
    p1.derivatives()(1) = Ad1(0.0, Eigen::Vector2d::Zero());
    p2.derivatives()(0) = Ad1(0.0, Eigen::Vector2d::Zero());
    p2.derivatives()(1) = Ad1(1.0, Eigen::Vector2d::Zero());
    const Vector3<Ad2> x = self().template map<Ad2>(gnomonic<Ad2>(u0, t1, t2, p1, p2));
    for (int k = 0; k < 3; ++k) {
      j.x(k) = x(k).value().value();
      j.dx(k, 0) = x(k).value().derivatives()(0);
      j.dx(k, 1) = x(k).value().derivatives()(1);
      j.dxx[0](k) = x(k).derivatives()(0).derivatives()(0);
      j.dxx[1](k) = x(k).derivatives()(0).derivatives()(1);
      j.dxx[2](k) = x(k).derivatives()(1).derivatives()(1);
    }
    return j;
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

// Positive root t of |q + t d|^2 = 1 for |q| < 1.
double unit_sphere_exit(const Vector3d& q, const Vector3d& d) {
  const double a = d.squaredNorm();
  const double b = q.dot(d);
  const double c = q.squaredNorm() - 1.0;
  const double disc = std::max(b * b - a * c, 0.0);
  // c <= 0 so the positive root is stable in this form
  const double root = std::sqrt(disc);
  if (b >= 0.0) return -c / (b + root);
  return (root - b) / a;
}

class SphereModel final : public AnalyticModel<SphereModel> {
 public:
  SphereModel(double r, const Vector3d& c) : radius_(r), center_(c) {}
  template <typename T>
  Vector3<T> map(const Vector3<T>& u) const {
    Vector3<T> x;
    for (int k = 0; k < 3; ++k) x(k) = T(center_(k)) + T(radius_) * u(k);
    return x;
  }
  std::string kind() const override { return "sphere"; }
  double level(const Vector3d& x) const override { return (x - center_).norm() - radius_; }
  bool has_level() const override { return true; }
  Vector3d parameter_of(const Vector3d& x) const override { return radial_direction(x - center_); }
  double exit_fraction(const Vector3d& p0, const Vector3d& p1) const override {
    return unit_sphere_exit((p0 - center_) / radius_, (p1 - p0) / radius_);
  }
  double length_scale() const override { return radius_; }
  std::optional<double> sphere_radius() const override { return radius_; }
  Vector3d center() const override { return center_; }

 private:
  double radius_;
  Vector3d center_;
};

class EllipsoidModel final : public AnalyticModel<EllipsoidModel> {
 public:
  EllipsoidModel(const Vector3d& axes, const Vector3d& c) : axes_(axes), center_(c) {}
  template <typename T>
  Vector3<T> map(const Vector3<T>& u) const {
    Vector3<T> x;
    for (int k = 0; k < 3; ++k) x(k) = T(center_(k)) + T(axes_(k)) * u(k);
    return x;
  }
  std::string kind() const override { return "ellipsoid"; }
  double level(const Vector3d& x) const override {
    return (x - center_).cwiseQuotient(axes_).norm() - 1.0;
  }
  bool has_level() const override { return true; }
  Vector3d parameter_of(const Vector3d& x) const override {
    return radial_direction((x - center_).cwiseQuotient(axes_));
  }
  double exit_fraction(const Vector3d& p0, const Vector3d& p1) const override {
    return unit_sphere_exit((p0 - center_).cwiseQuotient(axes_), (p1 - p0).cwiseQuotient(axes_));
  }
  double length_scale() const override { return axes_.minCoeff(); }
  Vector3d center() const override { return center_; }

 private:
  Vector3d axes_;
  Vector3d center_;
};

class RevolutionModel final : public AnalyticModel<RevolutionModel> {
 public:
  RevolutionModel(std::vector<double> c, const Vector3d& center) : coeffs_(std::move(c)), center_(center) {
    if (coeffs_.empty()) throw std::invalid_argument("revolution profile needs at least one coefficient");
    for (int i = 0; i <= 400; ++i) {
      if (radius(-1.0 + i / 200.0) <= 0.0)
        throw std::invalid_argument("revolution profile must stay positive on [-1, 1]");
    }
  }
  template <typename T>
  T radius(const T& z) const {
    // Clenshaw recurrence for sum c_k T_k(z)
    T b1(0.0), b2(0.0);
    for (std::size_t k = coeffs_.size(); k-- > 1;) {
      const T b0 = T(2.0) * z * b1 - b2 + T(coeffs_[k]);
      b2 = b1;
      b1 = b0;
    }
    return z * b1 - b2 + T(coeffs_[0]);
  }
  template <typename T>
  Vector3<T> map(const Vector3<T>& u) const {
    const T r = radius<T>(u(2));
    Vector3<T> x;
    for (int k = 0; k < 3; ++k) x(k) = T(center_(k)) + r * u(k);
    return x;
  }
  std::string kind() const override { return "revolution"; }
  double level(const Vector3d& x) const override {
    const Vector3d d = x - center_;
    const double n = d.norm();
    if (n == 0.0) return -radius(0.0);
    return n - radius(d(2) / n);
  }
  bool has_level() const override { return true; }
  Vector3d parameter_of(const Vector3d& x) const override { return radial_direction(x - center_); }
  double length_scale() const override {
    double m = radius(1.0);
    for (int i = 0; i <= 200; ++i) m = std::min(m, radius(-1.0 + i / 100.0));
    return m;
  }
  Vector3d center() const override { return center_; }

 private:
  std::vector<double> coeffs_;
  Vector3d center_;
};

class ParametricModel final : public SurfaceModel {
 public:
  ParametricModel(std::function<Vector3d(const Vector3d&)> m, std::function<double(const Vector3d&)> lv,
                  double scale)
      : map_(std::move(m)), level_(std::move(lv)), scale_(scale) {
    const SphereGrid g = sphere_grid(16);
    Vector3d acc = Vector3d::Zero();
    double vol = 0.0;
    for (std::size_t i = 0; i < g.u.size(); ++i) acc += map_(g.u[i]) * g.weight[i];
    centroid_ = acc / (4.0 * kPi);
    for (std::size_t i = 0; i < g.u.size(); ++i) {
      const SurfaceJet j = jet(g.u[i], Vector2d::Zero(), 1);
      vol += j.x.dot(j.dx.col(0).cross(j.dx.col(1))) * g.weight[i];
    }
    orientation = vol >= 0.0 ? 1 : -1;
  }
  std::string kind() const override { return "parametric"; }
  Vector3d position(const Vector3d& u) const override { return map_(u.normalized()); }
  double level(const Vector3d& x) const override {
    if (level_) return level_(x);
    const Vector3d u = parameter_of(x);
    const SurfaceJet j = jet(u, Vector2d::Zero(), 1);
    const Vector3d nu = orientation * j.dx.col(0).cross(j.dx.col(1)).normalized();
    return (x - j.x).dot(nu);
  }
  bool has_level() const override { return true; }
  double length_scale() const override { return scale_; }
  Vector3d center() const override { return centroid_; }

 private:
  std::function<Vector3d(const Vector3d&)> map_;
  std::function<double(const Vector3d&)> level_;
  double scale_;
  Vector3d centroid_ = Vector3d::Zero();
};

}  // namespace

void chart_frame(const Vector3d& u0, Vector3d& t1, Vector3d& t2) {
  const Vector3d axis = std::abs(u0.z()) < 0.9 ? Vector3d::UnitZ() : Vector3d::UnitX();
  t1 = (axis - axis.dot(u0) * u0).normalized();
  t2 = u0.cross(t1);
}

SphereGrid sphere_grid(int n_theta) {
  const QuadratureRule& gl = gauss_legendre(n_theta);
  const int n_phi = 2 * n_theta;
  SphereGrid g;
  g.u.reserve(n_theta * n_phi);
  g.weight.resize(n_theta * n_phi);
  int k = 0;
  for (int i = 0; i < n_theta; ++i) {
    const double z = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * kPi * (j + 0.5) / n_phi;
      g.u.emplace_back(s * std::cos(phi), s * std::sin(phi), z);
      g.weight[k++] = gl.weights[i] * 2.0 * kPi / n_phi;
    }
  }
  return g;
}

SurfaceJet SurfaceModel::jet(const Vector3d& u0, const Vector2d& p, int order) const {
  // Central differences; chart coordinates are dimensionless so one step fits
  // all surfaces of moderate curvature.
  const double h1 = 2e-5, h2 = 2e-4;
  auto X = [&](double a, double b) { return position(gnomonic_point(u0, p + Vector2d(a, b))); };
  SurfaceJet j;
  j.x = X(0.0, 0.0);
  const Vector3d d1 = X(h1, 0.0) - X(-h1, 0.0);
  const Vector3d d2 = X(0.0, h1) - X(0.0, -h1);
  j.dx.col(0) = d1 / (2 * h1);
  j.dx.col(1) = d2 / (2 * h1);
  if (order >= 2) {
    const Vector3d c = X(0.0, 0.0);
    j.dxx[0] = (X(h2, 0.0) - 2.0 * c + X(-h2, 0.0)) / (h2 * h2);
    j.dxx[2] = (X(0.0, h2) - 2.0 * c + X(0.0, -h2)) / (h2 * h2);
    j.dxx[1] = (X(h2, h2) - X(h2, -h2) - X(-h2, h2) + X(-h2, -h2)) / (4 * h2 * h2);
  }
  return j;
}

double SurfaceModel::level(const Vector3d&) const {
  throw NumericalError("geometry", "surface has no implicit description");
}

Vector3d SurfaceModel::parameter_of(const Vector3d& x) const {
  // Gauss-Newton closest point, recentring the chart every step.
  Vector3d u = radial_direction(x - center());
  for (int it = 0; it < 50; ++it) {
    const SurfaceJet j = jet(u, Vector2d::Zero(), 1);
    const Vector2d step = (j.dx.transpose() * j.dx).ldlt().solve(j.dx.transpose() * (x - j.x));
    u = gnomonic_point(u, step);
    if (step.norm() < 1e-14) break;
  }
  return u;
}

double SurfaceModel::exit_fraction(const Vector3d& p0, const Vector3d& p1) const {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (level(p0 + mid * (p1 - p0)) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

Surface Surface::sphere(double radius, const Vector3d& center) {
  if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  return Surface(std::make_shared<SphereModel>(radius, center));
}

Surface Surface::ellipsoid(const Vector3d& semi_axes, const Vector3d& center) {
  if (!(semi_axes.minCoeff() > 0.0)) throw std::invalid_argument("ellipsoid semi-axes must be positive");
  return Surface(std::make_shared<EllipsoidModel>(semi_axes, center));
}

Surface Surface::revolution(std::vector<double> chebyshev, const Vector3d& center) {
  return Surface(std::make_shared<RevolutionModel>(std::move(chebyshev), center));
}

Surface Surface::parametric(std::function<Vector3d(const Vector3d&)> map, std::function<double(const Vector3d&)> level,
                            double length_scale) {
  return Surface(std::make_shared<ParametricModel>(std::move(map), std::move(level), length_scale));
}

BoundaryPoint Surface::point(const Vector3d& u) const {
  const Vector3d un = u.normalized();
  return {un, model_->position(un)};
}

BoundaryPoint Surface::project(const Vector3d& x) const { return point(model_->parameter_of(x)); }

BoundaryPoint Surface::at_angles(double theta, double phi) const {
  return point(Vector3d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)));
}

Vector3d Surface::outward_normal(const Vector3d& u) const {
  const SurfaceJet j = model_->jet(u.normalized(), Vector2d::Zero(), 1);
  return model_->orientation * j.dx.col(0).cross(j.dx.col(1)).normalized();
}

double Surface::area_density(const Vector3d& u) const {
  const SurfaceJet j = model_->jet(u.normalized(), Vector2d::Zero(), 1);
  return j.dx.col(0).cross(j.dx.col(1)).norm();
}

FundamentalForms fundamental_forms(const Surface& s, const Vector3d& u0, const Vector2d& p) {
  const SurfaceJet j = s.model().jet(u0.normalized(), p, 2);
  const Vector3d c = j.dx.col(0).cross(j.dx.col(1));
  const double scale = j.dx.col(0).norm() * j.dx.col(1).norm();
  if (!(c.norm() > 1e-10 * scale) || scale == 0.0)
    throw NumericalError("geometry", "chart Jacobian is rank deficient");
  const Vector3d inward = -s.model().orientation * c.normalized();
  FundamentalForms f;
  f.first = j.dx.transpose() * j.dx;
  f.second << j.dxx[0].dot(inward), j.dxx[1].dot(inward), j.dxx[1].dot(inward), j.dxx[2].dot(inward);
  return f;
}

CurvatureData curvature_at(const Surface& s, const Vector3d& u) {
  const Vector3d un = u.normalized();
  const SurfaceJet j = s.model().jet(un, Vector2d::Zero(), 2);
  const Vector3d c = j.dx.col(0).cross(j.dx.col(1));
  if (!(c.norm() > 1e-10 * j.dx.col(0).norm() * j.dx.col(1).norm()))
    throw NumericalError("geometry", "chart Jacobian is rank deficient");
  const Vector3d nu = s.model().orientation * c.normalized();
  const Vector3d inward = -nu;
  Matrix2d second;
  second << j.dxx[0].dot(inward), j.dxx[1].dot(inward), j.dxx[1].dot(inward), j.dxx[2].dot(inward);

  // Orthonormal tangent basis (b1, b2) with b1 x b2 = nu.
  const Vector3d b1 = j.dx.col(0).normalized();
  const Vector3d b2 = nu.cross(b1);
  Matrix2d m;
  m << b1.dot(j.dx.col(0)), b1.dot(j.dx.col(1)), b2.dot(j.dx.col(0)), b2.dot(j.dx.col(1));
  const Matrix2d minv = m.inverse();
  Matrix2d shape = minv.transpose() * second * minv;
  shape = 0.5 * (shape + shape.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix2d> es(shape);

  CurvatureData k;
  k.lambda1 = es.eigenvalues()(1);
  k.lambda2 = es.eigenvalues()(0);
  k.mean = 0.5 * (k.lambda1 + k.lambda2);
  k.outward = nu;
  const double spread = std::max({std::abs(k.lambda1), std::abs(k.lambda2), 1.0});
  if (std::abs(k.lambda1 - k.lambda2) < 1e-9 * spread) {
    Vector3d axis = Vector3d::UnitZ();
    Vector3d proj = axis - axis.dot(nu) * nu;
    if (proj.norm() < 1e-3) {
      axis = Vector3d::UnitX();
      proj = axis - axis.dot(nu) * nu;
    }
    k.e1 = proj.normalized();
  } else {
    const Vector2d v = es.eigenvectors().col(1);
    k.e1 = (v(0) * b1 + v(1) * b2).normalized();
    // fix the sign against the first reference axis with a clear projection
    const std::array<Vector3d, 3> axes{Vector3d::UnitZ(), Vector3d::UnitX(), Vector3d::UnitY()};
    for (const Vector3d& axis : axes) {
      const double d = k.e1.dot(axis);
      if (std::abs(d) > 1e-8) {
        if (d < 0.0) k.e1 = -k.e1;
        break;
      }
    }
  }
  k.e2 = nu.cross(k.e1);
  return k;
}

namespace {

struct GeoState {
  Vector3d uc;  // chart centre
  Vector2d p;
  Vector2d q;
};

Eigen::Vector4d geodesic_rhs(const SurfaceModel& m, const Vector3d& uc, const Eigen::Vector4d& y) {
  const SurfaceJet j = m.jet(uc, y.head<2>(), 2);
  const Vector2d q = y.tail<2>();
  const Matrix2d g = j.dx.transpose() * j.dx;
  const Vector3d xqq = q(0) * q(0) * j.dxx[0] + 2.0 * q(0) * q(1) * j.dxx[1] + q(1) * q(1) * j.dxx[2];
  Eigen::Vector4d out;
  out.head<2>() = q;
  out.tail<2>() = -g.inverse() * (j.dx.transpose() * xqq);
  return out;
}

GeodesicResult integrate_geodesic(const SurfaceModel& m, const BoundaryPoint& x0, const Vector3d& v, double length,
                                  int n) {
  GeoState st{x0.u, Vector2d::Zero(), Vector2d::Zero()};
  {
    const SurfaceJet j = m.jet(st.uc, st.p, 1);
    st.q = (j.dx.transpose() * j.dx).ldlt().solve(j.dx.transpose() * v);
  }
  const double h = length / n;
  for (int i = 0; i < n; ++i) {
    if (st.p.norm() > 0.3) {
      const SurfaceJet jo = m.jet(st.uc, st.p, 1);
      const Vector3d w = jo.dx * st.q;
      st.uc = gnomonic_point(st.uc, st.p);
      st.p.setZero();
      const SurfaceJet jn = m.jet(st.uc, st.p, 1);
      st.q = (jn.dx.transpose() * jn.dx).ldlt().solve(jn.dx.transpose() * w);
    }
    Eigen::Vector4d y;
    y << st.p, st.q;
    const Eigen::Vector4d k1 = geodesic_rhs(m, st.uc, y);
    const Eigen::Vector4d k2 = geodesic_rhs(m, st.uc, y + 0.5 * h * k1);
    const Eigen::Vector4d k3 = geodesic_rhs(m, st.uc, y + 0.5 * h * k2);
    const Eigen::Vector4d k4 = geodesic_rhs(m, st.uc, y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    st.p = y.head<2>();
    st.q = y.tail<2>();
  }
  GeodesicResult r;
  const SurfaceJet j = m.jet(st.uc, st.p, 1);
  r.end.u = gnomonic_point(st.uc, st.p);
  r.end.x = j.x;
  r.velocity = j.dx * st.q;
  r.steps = n;
  return r;
}

}  // namespace

GeodesicResult boundary_exponential(const Surface& s, const BoundaryPoint& x0, const Vector3d& v, double length,
                                    const GeodesicOptions& opt) {
  const double vn = v.norm();
  if (std::abs(vn - 1.0) > 1e-8) throw std::invalid_argument("boundary_exponential expects a unit tangent vector");
  if (length < 0.0) throw std::invalid_argument("boundary_exponential expects a non-negative length");
  if (length == 0.0) return {x0, v, 0.0, 0};
  const SurfaceModel& m = s.model();
  if (opt.use_exact && m.sphere_radius()) {
    const double r = *m.sphere_radius();
    const Vector3d n = x0.u;
    const Vector3d t = (v - v.dot(n) * n).normalized();
    const double ang = length / r;
    GeodesicResult out;
    out.end.u = (std::cos(ang) * n + std::sin(ang) * t).normalized();
    out.end.x = m.center() + r * out.end.u;
    out.velocity = -std::sin(ang) * n + std::cos(ang) * t;
    return out;
  }
  const int n = std::max(1, static_cast<int>(std::ceil(length / opt.step)));
  if (n > opt.max_steps) throw NumericalError("geometry", "geodesic step budget exceeded");
  GeodesicResult fine = integrate_geodesic(m, x0, v, length, opt.monitor ? 2 * n : n);
  if (opt.monitor) {
    const GeodesicResult coarse = integrate_geodesic(m, x0, v, length, n);
    fine.error_estimate = (fine.end.x - coarse.end.x).norm() / 15.0;
  }
  return fine;
}

Vector3d boundary_log(const Surface& s, const BoundaryPoint& x0, const BoundaryPoint& y, const GeodesicOptions& opt) {
  const SurfaceModel& m = s.model();
  if ((y.x - x0.x).norm() == 0.0) return Vector3d::Zero();
  if (opt.use_exact && m.sphere_radius()) {
    const double r = *m.sphere_radius();
    const Vector3d n = x0.u, w = y.u;
    const Vector3d t = w - w.dot(n) * n;
    const double ang = std::atan2(t.norm(), w.dot(n));
    if (t.norm() == 0.0) throw NumericalError("geometry", "boundary_log at the cut point");
    return r * ang * t.normalized();
  }
  const SurfaceJet j0 = m.jet(x0.u, Vector2d::Zero(), 1);
  const Vector3d nu = j0.dx.col(0).cross(j0.dx.col(1)).normalized();
  const Vector3d b1 = j0.dx.col(0).normalized();
  const Vector3d b2 = nu.cross(b1);
  Eigen::Matrix<double, 3, 2> basis;
  basis << b1, b2;

  GeodesicOptions fast = opt;
  fast.monitor = false;
  auto shoot = [&](const Vector2d& w) -> Vector3d {
    const double len = w.norm();
    if (len == 0.0) return x0.x;
    return boundary_exponential(s, x0, (basis * w) / len, len, fast).end.x;
  };
  const double scale = m.length_scale();
  Vector2d w = basis.transpose() * (y.x - x0.x);
  for (int it = 0; it < 40; ++it) {
    const Vector3d f = shoot(w) - y.x;
    const double delta = 1e-6 * std::max(w.norm(), 1e-3 * scale);
    Eigen::Matrix<double, 3, 2> jac;
    for (int k = 0; k < 2; ++k) {
      Vector2d e = Vector2d::Zero();
      e(k) = delta;
      jac.col(k) = (shoot(w + e) - shoot(w - e)) / (2 * delta);
    }
    const Vector2d step = (jac.transpose() * jac).ldlt().solve(jac.transpose() * f);
    w -= step;
    if (step.norm() < 1e-13 * scale) return basis * w;
  }
  throw NumericalError("geometry", "geodesic shooting did not converge");
}

double ambient_distance(const Vector3d& x, const Vector3d& y) { return (x - y).norm(); }

double boundary_distance(const Surface& s, const BoundaryPoint& x, const BoundaryPoint& y, const GeodesicOptions& opt) {
  return boundary_log(s, x, y, opt).norm();
}

namespace {

std::pair<double, double> measure_sums(const Surface& s, int n_theta) {
  const SphereGrid g = sphere_grid(n_theta);
  std::vector<double> area(g.u.size()), vol(g.u.size());
  for (std::size_t i = 0; i < g.u.size(); ++i) {
    const SurfaceJet j = s.model().jet(g.u[i], Vector2d::Zero(), 1);
    const Vector3d c = s.model().orientation * j.dx.col(0).cross(j.dx.col(1));
    area[i] = c.norm() * g.weight[i];
    vol[i] = (j.x - s.model().center()).dot(c) / 3.0 * g.weight[i];
  }
  return {pairwise_sum(area.data(), area.size()), pairwise_sum(vol.data(), vol.size())};
}

}  // namespace

DomainMeasures measures(const Surface& s, int n_theta) {
  const auto [a1, v1] = measure_sums(s, n_theta);
  const auto [a0, v0] = measure_sums(s, std::max(4, n_theta / 2));
  DomainMeasures out{v1, a1, std::abs(v1 - v0), std::abs(a1 - a0)};
  if (!(out.volume > 0.0) || !(out.area > 0.0))
    throw NumericalError("geometry", "non-positive volume or area from quadrature");
  return out;
}

WindowChart::WindowChart(Surface surface, const WindowSpec& spec) : surface_(std::move(surface)), spec_(spec) {
  if (!(spec.epsilon > 0.0)) throw std::invalid_argument("window radius must be positive");
  if (!(spec.a > 0.0 && spec.a <= 1.0)) throw std::invalid_argument("window aspect ratio must lie in (0, 1]");
  center_ = surface_.point(spec.center_u);
  spec_.center_u = center_.u;
  frame_ = curvature_at(surface_, center_.u);
  const double kmax = std::max({std::abs(frame_.lambda1), std::abs(frame_.lambda2), 1e-12});
  admissible_ = 0.5 * kPi / kmax;
  if (spec.epsilon >= admissible_)
    throw NumericalError("geometry", "window radius exceeds the admissible bound " + std::to_string(admissible_));
  geo_.step = std::min(spec.epsilon, 0.01) / 20.0;
  geo_.monitor = false;
}

BoundaryPoint WindowChart::map(const Vector2d& s) const {
  const Vector3d w = spec_.epsilon * (s(0) * frame_.e1 + spec_.a * s(1) * frame_.e2);
  const double len = w.norm();
  if (len == 0.0) return center_;
  return boundary_exponential(surface_, center_, w / len, len, geo_).end;
}

double WindowChart::area_element(const Vector2d& s) const {
  const double h = 1e-4;
  const Vector3d d1 = map(s + Vector2d(h, 0)).x - map(s - Vector2d(h, 0)).x;
  const Vector3d d2 = map(s + Vector2d(0, h)).x - map(s - Vector2d(0, h)).x;
  return d1.cross(d2).norm() / (4 * h * h);
}

Vector2d WindowChart::pullback(const BoundaryPoint& y) const {
  const Vector3d w = boundary_log(surface_, center_, y, geo_);
  return {w.dot(frame_.e1) / spec_.epsilon, w.dot(frame_.e2) / (spec_.a * spec_.epsilon)};
}

bool WindowChart::contains(const BoundaryPoint& y) const {
  // the boundary distance dominates the chord, and the window lies inside the
  // geodesic disk of radius epsilon
  if ((y.x - center_.x).norm() > spec_.epsilon) return false;
  const Vector2d s = pullback(y);
  return s.squaredNorm() <= 1.0;
}

double WindowChart::area(int n_r, int n_theta) const {
  const QuadratureRule r = gauss_legendre(n_r, 0.0, 1.0);
  std::vector<double> terms;
  terms.reserve(n_r * n_theta);
  for (int i = 0; i < n_r; ++i) {
    for (int k = 0; k < n_theta; ++k) {
      const double th = 2.0 * kPi * k / n_theta;
      const Vector2d s = r.nodes[i] * Vector2d(std::cos(th), std::sin(th));
      terms.push_back(area_element(s) * r.nodes[i] * r.weights[i] * 2.0 * kPi / n_theta);
    }
  }
  return pairwise_sum(terms.data(), terms.size());
}

WindowOutline::WindowOutline(const WindowChart& chart, int samples)
    : c_(chart.center().x), e1_(chart.frame().e1), e2_(chart.frame().e2) {
  if (samples < 16) throw std::invalid_argument("window outline needs at least 16 samples");
  psi_.resize(samples);
  rho_.resize(samples);
  for (int k = 0; k < samples; ++k) {
    const double phi = 2.0 * kPi * k / samples;
    const Vector3d d = chart.map(Vector2d(std::cos(phi), std::sin(phi))).x - c_;
    reach_ = std::max(reach_, d.norm());
    psi_[k] = std::atan2(d.dot(e2_), d.dot(e1_));
    rho_[k] = std::hypot(d.dot(e1_), d.dot(e2_));
    if (k > 0) {
      while (psi_[k] <= psi_[k - 1]) psi_[k] += 2.0 * kPi;
      if (psi_[k] - psi_[k - 1] >= kPi) throw NumericalError("geometry", "projected window outline is not star-shaped");
    }
  }
  if (psi_.back() - psi_.front() >= 2.0 * kPi) throw NumericalError("geometry", "projected window outline is not star-shaped");
}

bool WindowOutline::contains(const Vector3d& x) const {
  const Vector3d d = x - c_;
  if (d.norm() > reach_) return false;
  const double p1 = d.dot(e1_), p2 = d.dot(e2_);
  const double rho = std::hypot(p1, p2);
  const int n = static_cast<int>(psi_.size());
  double psi = std::atan2(p2, p1);
  while (psi < psi_.front()) psi += 2.0 * kPi;
  while (psi >= psi_.front() + 2.0 * kPi) psi -= 2.0 * kPi;
  const int k = static_cast<int>(std::upper_bound(psi_.begin(), psi_.end(), psi) - psi_.begin()) - 1;
  // cubic Lagrange through samples k-1 .. k+2, periodic with unwrapped angles
  double bound = 0.0;
  for (int a = -1; a <= 2; ++a) {
    auto node = [&](int j) {
      const int w = (j % n + n) % n;
      return psi_[w] + 2.0 * kPi * static_cast<double>((j - w) / n);
    };
    double w = 1.0;
    for (int b = -1; b <= 2; ++b)
      if (b != a) w *= (psi - node(k + b)) / (node(k + a) - node(k + b));
    bound += w * rho_[((k + a) % n + n) % n];
  }
  return rho <= bound;
}

}  // namespace nesc
