#include "nesc/xray.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace nesc {

namespace {

constexpr int kZernikeMax = 30;

// Coefficients c_{n,m,k} of R_n^m(r) = r^m sum_j c_j (r^2)^j, highest power first.
const std::vector<std::vector<double>>& radial_table() {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> t;
    auto fact = [](int k) { return std::tgamma(k + 1.0); };
    for (int n = 0; n <= kZernikeMax; ++n) {
      for (int m = n % 2; m <= n; m += 2) {
        const int s = (n - m) / 2;
        std::vector<double> c(s + 1);
        for (int k = 0; k <= s; ++k) {
          const double sign = (k % 2 == 0) ? 1.0 : -1.0;
          c[k] = sign * fact(n - k) / (fact(k) * fact((n + m) / 2 - k) * fact((n - m) / 2 - k));
        }
        t.push_back(std::move(c));
      }
    }
    return t;
  }();
  return table;
}

int radial_index(int n, int m) {
  // entries for all n' < n come first; within n, m = n%2, n%2+2, ...
  int idx = 0;
  for (int k = 0; k < n; ++k) idx += k / 2 + 1;
  return idx + (m - n % 2) / 2;
}

// Polar rule around t. For each angle phi_k = 2 pi k / n_theta the ray
// s = t + rho e_k meets the circle at rho_+; substituting rho = c + d cos(th)
// turns rho drho / sqrt(1 - |s|^2) into rho dth. visit(s, rho, cos, sin, w)
// receives the full weight of the weighted measure (without kernel).
template <typename Visit>
void polar_sweep(const Vector2d& t, const DiskResolution& res, bool graded, Visit&& visit) {
  const double t2 = t.squaredNorm();
  if (t2 > 1.0 + 1e-12) throw NumericalError("xray_normal", "target point outside the unit disk");
  const double dphi = 2.0 * kPi / res.n_theta;
  const int order = std::max(6, res.n_r / 4);
  const QuadratureRule& gl = gauss_legendre(res.n_r);
  for (int k = 0; k < res.n_theta; ++k) {
    const double phi = dphi * k;
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double te = t(0) * cp + t(1) * sp;
    const double d = std::sqrt(std::max(te * te + 1.0 - t2, 0.0));
    const double c = -te;
    if (d <= 0.0) continue;
    const double th0 = std::acos(std::clamp(-c / d, -1.0, 1.0));
    if (th0 <= 0.0) continue;
    auto node = [&](double th, double w) {
      const double rho = std::max(c + d * std::cos(th), 0.0);
      const Vector2d s(t(0) + rho * cp, t(1) + rho * sp);
      visit(s, rho, cp, sp, w * dphi);
    };
    if (graded) {
      const QuadratureRule q = graded_rule_upper(0.0, th0, 5, order);
      for (Eigen::Index i = 0; i < q.size(); ++i) node(q.nodes[i], q.weights[i]);
    } else {
      const double half = 0.5 * th0;
      for (Eigen::Index i = 0; i < gl.size(); ++i) node(half * (gl.nodes[i] + 1.0), half * gl.weights[i]);
    }
  }
}

double aniso(double a, double cp, double sp) { return std::sqrt(cp * cp + a * a * sp * sp); }

double ratio_kernel(double a, double cp, double sp) {
  const double num = cp * cp - a * a * sp * sp;
  return num / (cp * cp + a * a * sp * sp);
}

// Outer weighted rule: t = sin(al) (cos be, sin be); w(t) dt = sin(al) dal dbe.
template <typename Visit>
void weighted_outer(const DiskResolution& res, Visit&& visit) {
  const QuadratureRule al = gauss_legendre(res.n_r, 0.0, 0.5 * kPi);
  const double dbe = 2.0 * kPi / res.n_theta;
  for (Eigen::Index i = 0; i < al.size(); ++i) {
    const double r = std::sin(al.nodes[i]);
    for (int j = 0; j < res.n_theta; ++j) {
      const double be = dbe * j;
      visit(Vector2d(r * std::cos(be), r * std::sin(be)), r * al.weights[i] * dbe);
    }
  }
}

void check_a(double a) {
  if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("ellipse parameter a must lie in (0, 1]");
}

}  // namespace

WeightedDiskDensity::WeightedDiskDensity() : v_([](const Vector2d&) { return 0.0; }) {}

WeightedDiskDensity::WeightedDiskDensity(Factor v) : v_(std::move(v)) {}

WeightedDiskDensity WeightedDiskDensity::constant(double c) {
  return WeightedDiskDensity([c](const Vector2d&) { return c; });
}

WeightedDiskDensity WeightedDiskDensity::zernike(int degree, VectorXd coefficients) {
  if (coefficients.size() != zernike_count(degree)) throw std::invalid_argument("zernike coefficient count mismatch");
  return WeightedDiskDensity([degree, c = std::move(coefficients)](const Vector2d& t) {
    std::vector<double> z(c.size());
    zernike_all(t, degree, z.data());
    return c.dot(Eigen::Map<const VectorXd>(z.data(), c.size()));
  });
}

WeightedDiskDensity WeightedDiskDensity::from_plain(std::function<double(const Vector2d&)> g) {
  return WeightedDiskDensity(
      [g = std::move(g)](const Vector2d& t) { return g(t) * std::sqrt(std::max(0.0, 1.0 - t.squaredNorm())); });
}

double WeightedDiskDensity::operator()(const Vector2d& t) const {
  const double q = 1.0 - t.squaredNorm();
  if (q <= 0.0) return std::numeric_limits<double>::infinity();
  return v_(t) / std::sqrt(q);
}

DiskGrid disk_grid(const DiskResolution& res) {
  DiskGrid g;
  g.n_r = res.n_r;
  g.n_theta = res.n_theta;
  const QuadratureRule r = gauss_legendre(res.n_r, 0.0, 1.0);
  const double dth = 2.0 * kPi / res.n_theta;
  g.weights.resize(res.n_r * res.n_theta);
  int k = 0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    for (int j = 0; j < res.n_theta; ++j) {
      const double th = dth * j;
      g.nodes.emplace_back(r.nodes[i] * std::cos(th), r.nodes[i] * std::sin(th));
      g.weights[k++] = r.nodes[i] * r.weights[i] * dth;
    }
  }
  return g;
}

int zernike_count(int degree) { return (degree + 1) * (degree + 2) / 2; }

void zernike_all(const Vector2d& t, int degree, double* out) {
  if (degree < 0 || degree > kZernikeMax) throw std::invalid_argument("zernike degree out of range");
  const auto& table = radial_table();
  const double r2 = t.squaredNorm();
  double re[kZernikeMax + 1], im[kZernikeMax + 1];
  re[0] = 1.0;
  im[0] = 0.0;
  for (int m = 1; m <= degree; ++m) {
    re[m] = re[m - 1] * t(0) - im[m - 1] * t(1);
    im[m] = re[m - 1] * t(1) + im[m - 1] * t(0);
  }
  int idx = 0;
  for (int n = 0; n <= degree; ++n) {
    for (int m = -n; m <= n; m += 2) {
      const int mm = std::abs(m);
      const std::vector<double>& c = table[radial_index(n, mm)];
      double p = 0.0;
      for (double ck : c) p = p * r2 + ck;
      out[idx++] = p * (m >= 0 ? re[mm] : im[mm]);
    }
  }
}

double K_a(double a) {
  check_a(a);
  if (a == 1.0) return kPi * kPi;
  auto f = [a](double th) {
    const double c = std::cos(th), s = std::sin(th);
    return 1.0 / std::sqrt(c * c + s * s / (a * a));
  };
  // four symmetric quarters
  const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 0.5 * kPi, 10, 1e-14);
  return 0.5 * kPi * 4.0 * q;
}

WeightedDiskDensity u0_a(double a) { return WeightedDiskDensity::constant(1.0 / K_a(a)); }

double apply_L_a(const WeightedDiskDensity& f, double a, const Vector2d& t, const DiskResolution& res) {
  check_a(a);
  double acc = 0.0;
  polar_sweep(t, res, false, [&](const Vector2d& s, double, double cp, double sp, double w) {
    acc += w * f.factor(s) / aniso(a, cp, sp);
  });
  return a * acc;
}

double apply_R_log_a(const WeightedDiskDensity& f, double a, const Vector2d& t, const DiskResolution& res) {
  check_a(a);
  double acc = 0.0;
  polar_sweep(t, res, true, [&](const Vector2d& s, double rho, double cp, double sp, double w) {
    if (rho > 0.0) acc += w * f.factor(s) * rho * std::log(rho * aniso(a, cp, sp));
  });
  return a * acc;
}

double apply_R_inf_a(const WeightedDiskDensity& f, double a, const Vector2d& t, const DiskResolution& res) {
  check_a(a);
  double acc = 0.0;
  polar_sweep(t, res, false, [&](const Vector2d& s, double rho, double cp, double sp, double w) {
    acc += w * f.factor(s) * rho * ratio_kernel(a, cp, sp);
  });
  return a * acc;
}

double f_log_closed(double r) {
  if (r < 0.0 || r > 1.0) throw std::invalid_argument("f_log_closed expects r in [0, 1]");
  // log r - (1/2) log((1 - s)/(1 + s)) = log(1 + s) with s = sqrt(1 - r^2);
  // the two logarithmic singularities at r = 0 cancel inside this form.
  const double s = std::sqrt((1.0 - r) * (1.0 + r));
  return 2.0 / kPi * (std::log1p(s) - s);
}

double ratio_kernel_profile(double a, const Vector2d& t, const DiskResolution& res) {
  double acc = 0.0;
  polar_sweep(t, res, false, [&](const Vector2d&, double rho, double cp, double sp, double w) {
    acc += w * rho * ratio_kernel(a, cp, sp);
  });
  return acc;
}

namespace {

double pairing_value(double a, const DiskResolution& res, bool log_kernel) {
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(res.n_r) * res.n_theta);
  weighted_outer(res, [&](const Vector2d& t, double wt) {
    double inner = 0.0;
    if (log_kernel) {
      polar_sweep(t, res, true, [&](const Vector2d&, double rho, double cp, double sp, double w) {
        if (rho > 0.0) inner += w * rho * std::log(rho * aniso(a, cp, sp));
      });
    } else {
      inner = ratio_kernel_profile(a, t, res);
    }
    terms.push_back(wt * inner);
  });
  return pairwise_sum(terms.data(), terms.size());
}

QuadratureValue pairing(double a, const DiskResolution& res, bool log_kernel) {
  check_a(a);
  const double fine = pairing_value(a, res, log_kernel);
  const DiskResolution half{std::max(4, res.n_r / 2), std::max(8, res.n_theta / 2)};
  const double coarse = pairing_value(a, half, log_kernel);
  return {fine, std::abs(fine - coarse)};
}

}  // namespace

QuadratureValue pairing_log(double a, const DiskResolution& res) { return pairing(a, res, true); }
QuadratureValue pairing_inf(double a, const DiskResolution& res) { return pairing(a, res, false); }

double disk_integral(const WeightedDiskDensity& f, const DiskResolution& res) {
  std::vector<double> terms;
  weighted_outer(res, [&](const Vector2d& t, double w) { terms.push_back(w * f.factor(t)); });
  return pairwise_sum(terms.data(), terms.size());
}

LSolveResult solve_L_a(const std::function<double(const Vector2d&)>& rhs, double a, int degree,
                       const DiskResolution& res) {
  check_a(a);
  const int nb = zernike_count(degree);
  MatrixXd A = MatrixXd::Zero(nb, nb);
  VectorXd b = VectorXd::Zero(nb);
  VectorXd zt(nb), zs(nb), lz(nb);
  weighted_outer(res, [&](const Vector2d& t, double wt) {
    zernike_all(t, degree, zt.data());
    lz.setZero();
    polar_sweep(t, res, false, [&](const Vector2d& s, double, double cp, double sp, double w) {
      zernike_all(s, degree, zs.data());
      lz += (w * a / aniso(a, cp, sp)) * zs;
    });
    A.noalias() += wt * zt * lz.transpose();
    b += (wt * rhs(t)) * zt;
  });
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  LSolveResult out;
  out.degree = degree;
  out.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(lo > 0.0) || out.condition > 1e13)
    throw NumericalError("xray_normal", "Galerkin matrix ill-conditioned (estimate " + std::to_string(out.condition) + ")");
  out.coefficients = A.ldlt().solve(b);
  out.density = WeightedDiskDensity::zernike(degree, out.coefficients);
  double worst = 0.0;
  for (int i = 0; i <= 4; ++i) {
    const double r = 0.95 * i / 4.0;
    const int na = i == 0 ? 1 : 6;
    for (int j = 0; j < na; ++j) {
      const double th = 2.0 * kPi * (j + 0.25) / na;
      const Vector2d t(r * std::cos(th), r * std::sin(th));
      worst = std::max(worst, std::abs(apply_L_a(out.density, a, t) - rhs(t)));
    }
  }
  out.residual = worst;
  return out;
}

double xray_transform(const WeightedDiskDensity& f, const Vector2d& x, const Vector2d& v, int n) {
  const double tau = -2.0 * x.dot(v);
  if (!(tau > 1e-15)) return 0.0;
  // t = tau (1 - cos th)/2 cancels the weight: dt / sqrt(1-|x+tv|^2) = dth
  const QuadratureRule q = gauss_legendre(n, 0.0, kPi);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double t = 0.5 * tau * (1.0 - std::cos(q.nodes[i]));
    acc += q.weights[i] * f.factor(x + t * v);
  }
  return acc;
}

double xray_adjoint(const std::function<double(const Vector2d&, const Vector2d&)>& omega, const Vector2d& x,
                    int n_dirs) {
  const double q = 1.0 - x.squaredNorm();
  if (q < 0.0) throw std::invalid_argument("xray_adjoint expects a point in the closed disk");
  double acc = 0.0;
  for (int k = 0; k < n_dirs; ++k) {
    const double th = 2.0 * kPi * k / n_dirs;
    const Vector2d v(std::cos(th), std::sin(th));
    const double xv = x.dot(v);
    const double back = xv + std::sqrt(xv * xv + q);
    acc += omega(x - back * v, v);
  }
  return acc * 2.0 * kPi / n_dirs;
}

double u0_ball(int n, double radius) {
  if (radius >= 1.0) return std::numeric_limits<double>::infinity();
  const double sphere = 2.0 * std::pow(kPi, 0.5 * n) / boost::math::tgamma(0.5 * n);
  return 2.0 / (kPi * sphere * std::sqrt(1.0 - radius * radius));
}

double xray_constant_ball(int n) {
  const double sphere = 2.0 * std::pow(kPi, 0.5 * n) / boost::math::tgamma(0.5 * n);
  return 2.0 / sphere;
}

bool IdentityReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed; });
}

double IdentityReport::max_abs_error() const {
  double m = 0.0;
  for (const auto& c : checks)
    if (std::isfinite(c.abs_error)) m = std::max(m, c.abs_error);
  return m;
}

namespace {

IdentityReport run_identities(double a, const DiskResolution& res) {
  IdentityReport rep;
  rep.a = a;
  rep.resolution = res;
  auto add = [&](std::string name, double computed, double expected, double tol) {
    IdentityCheck c{std::move(name), computed, expected, 0.0, tol, true};
    if (std::isnan(expected)) {
      c.abs_error = tol;  // quadrature error estimate carried in the tolerance slot
    } else {
      c.abs_error = std::abs(computed - expected);
      c.passed = c.abs_error <= tol;
    }
    rep.checks.push_back(c);
  };

  const double ka = K_a(a);
  add("K_a against 2 pi a K(sqrt(1-a^2))", ka, 2.0 * kPi * a * std::comp_ellint_1(std::sqrt(1.0 - a * a)),
      1e-12 * ka);

  const WeightedDiskDensity u0 = u0_a(a);
  double worst = 0.0, worst_pt = 0.0;
  for (int i = 0; i <= 5; ++i) {
    const double r = 0.95 * i / 5.0;
    for (int j = 0; j < 8; ++j) {
      const double th = 2.0 * kPi * (j + 0.5) / 8;
      const double v = apply_L_a(u0, a, Vector2d(r * std::cos(th), r * std::sin(th)), res);
      if (std::abs(v - 1.0) >= worst) {
        worst = std::abs(v - 1.0);
        worst_pt = v;
      }
    }
  }
  add("sup |L_a u0_a - 1| on |t| <= 0.95", worst_pt, 1.0, 1e-3);
  add("integral of u0_a = 2 pi / K_a", disk_integral(u0, res), 2.0 * kPi / ka, 1e-10);

  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unif(0.0, 2.0 * kPi);
  double worst_xv = 1.0 / kPi;
  const WeightedDiskDensity u01 = u0_a(1.0);
  for (int k = 0; k < 100; ++k) {
    const double th = unif(rng);
    const Vector2d x(std::cos(th), std::sin(th));
    const double dev = 0.999 * (unif(rng) / 2.0 - 0.5 * kPi);
    const Vector2d v = Eigen::Rotation2Dd(dev) * (-x);
    const double val = xray_transform(u01, x, v);
    if (std::abs(val - 1.0 / kPi) >= std::abs(worst_xv - 1.0 / kPi)) worst_xv = val;
  }
  add("X-ray of u0 on 100 chords = 1/pi", worst_xv, 1.0 / kPi, 1e-6);

  if (a == 1.0) {
    add("R_log u0 at the centre", apply_R_log_a(u0, 1.0, Vector2d::Zero(), res), 2.0 / kPi * (std::log(2.0) - 1.0),
        1e-6);
    double wf = 0.0, wv = 0.0, we = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double r = i / 19.0;
      const double q = apply_R_log_a(u0, 1.0, Vector2d(r, 0.0), res);
      const double e = f_log_closed(r);
      if (std::abs(q - e) >= wf) {
        wf = std::abs(q - e);
        wv = q;
        we = e;
      }
    }
    add("R_log u0 against the closed radial profile (20 radii)", wv, we, 1e-3);
    const QuadratureValue pl = pairing_log(1.0, res);
    const double pl_exact = kPi * kPi * (8.0 * std::log(2.0) - 6.0);
    add("pairing_log(1) = pi^2 (8 log 2 - 6)", pl.value, pl_exact, 1e-3 * std::abs(pl_exact));
    add("pairing_inf(1) = 0", pairing_inf(1.0, res).value, 0.0, 1e-6);
    const LSolveResult lr = solve_L_a([](const Vector2d& t) { return t(0) * t(0); }, 1.0, 4);
    add("<L^-1 t1^2, 1> = 2/(3 pi)", disk_integral(lr.density, res), 2.0 / (3.0 * kPi), 1e-4);
  } else {
    const QuadratureValue pl = pairing_log(a, res);
    add("pairing_log(a) quadrature", pl.value, std::numeric_limits<double>::quiet_NaN(), pl.error);
    const QuadratureValue pi = pairing_inf(a, res);
    add("pairing_inf(a) quadrature", pi.value, std::numeric_limits<double>::quiet_NaN(), pi.error);
  }
  const LSolveResult l1 = solve_L_a([](const Vector2d&) { return 1.0; }, a, 2);
  add("Galerkin L_a^-1 1 smooth factor = 1/K_a", l1.coefficients[0], 1.0 / ka, 1e-4 / ka);
  return rep;
}

}  // namespace

IdentityReport verify_identities(double a, DiskResolution res) {
  check_a(a);
  IdentityReport rep = run_identities(a, res);
  for (int attempt = 0; attempt < 2 && !rep.passed(); ++attempt) {
    res = res.doubled();
    rep = run_identities(a, res);
  }
  return rep;
}

}  // namespace nesc
