#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nesc {

using Eigen::Matrix2d;
using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

inline constexpr double kPi = std::numbers::pi;

// Raised when a numerical routine cannot deliver its contract. Carries the
// name of the module that failed so the CLI can report provenance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
  const std::string& module() const { return module_; }

 private:
  std::string module_;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = -1, int column = -1)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct QuadratureRule {
  VectorXd nodes;
  VectorXd weights;
  Eigen::Index size() const { return nodes.size(); }
};

// Gauss-Legendre rule on [-1, 1]. Rules are cached; the reference stays valid
// for the lifetime of the program.
const QuadratureRule& gauss_legendre(int n);
QuadratureRule gauss_legendre(int n, double lo, double hi);

// Composite Gauss-Legendre rule on [lo, hi] with panels shrinking
// geometrically toward `lo` (breakpoints lo + (hi-lo)*ratio^k).
QuadratureRule graded_rule(double lo, double hi, int levels, int order, double ratio = 0.25);

// Same grading but toward `hi`.
QuadratureRule graded_rule_upper(double lo, double hi, int levels, int order, double ratio = 0.25);

// Deterministic pairwise summation; the result depends only on the input
// order, never on how the values were produced.
double pairwise_sum(const double* x, std::size_t n);

// Worker count from NESC_JOBS, else the hardware concurrency.
unsigned default_jobs();

// Runs f(i) for i in [0, n) on `jobs` threads. Work items are independent, so
// results written by index are identical for every thread count. The first
// exception thrown by a worker is rethrown on the caller.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace nesc
