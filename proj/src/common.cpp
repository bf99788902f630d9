#include "nesc/common.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>

namespace nesc {

namespace {

QuadratureRule compute_gauss_legendre(int n) {
  QuadratureRule rule{VectorXd(n), VectorXd(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadratureRule>(compute_gauss_legendre(n));
  return *slot;
}

QuadratureRule gauss_legendre(int n, double lo, double hi) {
  const QuadratureRule& ref = gauss_legendre(n);
  const double half = 0.5 * (hi - lo);
  QuadratureRule rule;
  rule.nodes = (ref.nodes.array() * half + 0.5 * (hi + lo)).matrix();
  rule.weights = ref.weights * half;
  return rule;
}

QuadratureRule graded_rule(double lo, double hi, int levels, int order, double ratio) {
  const QuadratureRule& ref = gauss_legendre(order);
  const int panels = levels + 1;
  QuadratureRule rule{VectorXd(panels * order), VectorXd(panels * order)};
  double right = hi;
  for (int p = 0; p < panels; ++p) {
    const double left = (p == panels - 1) ? lo : lo + (right - lo) * ratio;
    const double half = 0.5 * (right - left);
    const double mid = 0.5 * (right + left);
    for (int k = 0; k < order; ++k) {
      rule.nodes[p * order + k] = mid + half * ref.nodes[k];
      rule.weights[p * order + k] = half * ref.weights[k];
    }
    right = left;
  }
  return rule;
}

QuadratureRule graded_rule_upper(double lo, double hi, int levels, int order, double ratio) {
  QuadratureRule rule = graded_rule(0.0, hi - lo, levels, order, ratio);
  rule.nodes = (hi - rule.nodes.array()).matrix();
  return rule;
}

unsigned default_jobs() {
  if (const char* env = std::getenv("NESC_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

}  // namespace nesc
