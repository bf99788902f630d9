#include "nesc/asymptotics.hpp"

#include <cmath>

namespace nesc {

void ExpansionInput::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("a must lie in (0, 1]");
  if (!(volume > 0.0) || !(area > 0.0)) throw std::invalid_argument("volume and area must be positive");
}

MfptBreakdown c_eps_a(const ExpansionInput& in, double pairing_log_value, double pairing_inf_value) {
  in.validate();
  const double pi3 = kPi * kPi * kPi;
  const double m = in.volume;
  MfptBreakdown b;
  b.leading = m * K_a(in.a) / (4.0 * in.a * in.epsilon * kPi * kPi);
  b.log_term = -in.mean_curvature * m * std::log(in.epsilon) / (4.0 * kPi);
  b.regular_term = in.r_star * m;
  b.f_term = -in.f_star;
  b.log_pairing_term = -m * in.mean_curvature / (16.0 * pi3) * pairing_log_value;
  b.curvature_diff_term = m * (in.lambda1 - in.lambda2) / (64.0 * pi3) * pairing_inf_value;
  // fixed summation order; tests compare against the same expression
  b.total = b.leading + b.log_term + b.regular_term + b.f_term + b.log_pairing_term + b.curvature_diff_term;
  return b;
}

double c_eps_disk(const ExpansionInput& in) {
  in.validate();
  const double m = in.volume, h = in.mean_curvature;
  return m / (4.0 * in.epsilon) - h * m / (4.0 * kPi) * std::log(in.epsilon) + in.r_star * m - in.f_star -
         h * m / (4.0 * kPi) * (2.0 * std::log(2.0) - 1.5);
}

FieldValue mfpt_field(const ExpansionInput& in, const MfptBreakdown& c, const Vector3d& x_star,
                      const std::function<double(const Vector3d&)>& F,
                      const std::function<double(const Vector3d&)>& G_to_x_star, const Vector3d& x) {
  FieldValue v;
  v.guard_warning = (x - x_star).norm() < kGuardFactor * in.epsilon;
  v.value = F(x) + c.total - in.volume * G_to_x_star(x);
  return v;
}

AverageMfpt mfpt_average(const ExpansionInput& in, const MfptBreakdown& c, double integral_F) {
  AverageMfpt avg;
  avg.value = (integral_F + c.total * in.volume - in.f_star * in.volume) / in.volume;
  return avg;
}

double FluxDensity::operator()(const Vector2d& t) const {
  const double r2 = t.squaredNorm();
  if (r2 >= 1.0) throw std::domain_error("flux density evaluated outside the open window");
  return -volume_ / (2.0 * a_ * kPi * epsilon_ * epsilon_ * std::sqrt(1.0 - r2));
}

double FluxDensity::chart_integral() const { return -volume_ / (a_ * epsilon_ * epsilon_); }

double FluxDensity::total_flux() const { return chart_integral() * a_ * epsilon_ * epsilon_; }

FluxDensity flux_prediction(const ExpansionInput& in) {
  in.validate();
  return FluxDensity(in.volume, in.epsilon, in.a);
}

ExpansionContext::ExpansionContext(const Surface& surface, const Vector3d& center_u, double a,
                                   const ExpansionOptions& opt)
    : a_(a) {
  if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("a must lie in (0, 1]");
  solver_ = std::make_shared<GreenSolver>(surface, opt.mesh_theta, opt.jobs);
  center_ = surface.point(center_u.normalized());
  frame_ = curvature_at(surface, center_.u);
  green_ = solve_boundary_green(*solver_, center_, opt.regular);
  f_ = solve_F(*solver_, center_);
  log_pairing_ = pairing_log(a, opt.pairing_resolution);
  inf_pairing_ = pairing_inf(a, opt.pairing_resolution);
}

ExpansionInput ExpansionContext::input(double epsilon) const {
  ExpansionInput in;
  in.volume = solver_->volume();
  in.area = solver_->mesh().area();
  in.mean_curvature = frame_.mean;
  in.lambda1 = frame_.lambda1;
  in.lambda2 = frame_.lambda2;
  in.epsilon = epsilon;
  in.a = a_;
  in.r_star = green_.r_star;
  in.f_star = f_.f_star;
  in.validate();
  return in;
}

MfptBreakdown ExpansionContext::breakdown(double epsilon) const {
  return c_eps_a(input(epsilon), log_pairing_.value, inf_pairing_.value);
}

AverageMfpt ExpansionContext::average(double epsilon) const {
  return mfpt_average(input(epsilon), breakdown(epsilon), f_.integral);
}

FieldValue ExpansionContext::field(double epsilon, const Vector3d& x) const {
  const ExpansionInput in = input(epsilon);
  const MfptBreakdown c = breakdown(epsilon);
  const InteriorGreen g(*solver_, x);
  return mfpt_field(
      in, c, center_.x, [&](const Vector3d& p) { return f_.field->at_interior(p).value; },
      [&](const Vector3d&) { return g.at_boundary(center_).value; }, x);
}

}  // namespace nesc
