#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace pdopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// Error taxonomy; the CLI maps these onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct VerificationError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct GenerationError : Error {
  using Error::Error;
};
struct InsufficientDataError : Error {
  using Error::Error;
};
// Power-iteration style estimators report the best bound obtained so far.
struct EstimationError : Error {
  double best_bound;
  EstimationError(const std::string& msg, double bound)
      : Error(msg), best_bound(bound) {}
};

inline double sq(double x) { return x * x; }

// Extended real value: finite double or +infinity, kept as an explicit
// marker instead of a floating sentinel.
class ExtReal {
 public:
  ExtReal() : v_(0.0), finite_(true) {}
  ExtReal(double v) : v_(v), finite_(true) {}  // NOLINT(runtime/explicit)
  static ExtReal infinity() {
    ExtReal r;
    r.finite_ = false;
    r.v_ = kInf;
    return r;
  }
  bool is_finite() const { return finite_; }
  double value() const {
    if (!finite_) throw InputError("ExtReal: value() on infinite");
    return v_;
  }
  // Collapses to a double for arithmetic that tolerates inf.
  double as_double() const { return finite_ ? v_ : kInf; }

 private:
  double v_;
  bool finite_;
};

// Deterministic RNG. mt19937_64 output is pinned by the standard; the
// uniform/normal transforms below avoid the implementation-defined
// std:: distributions so streams are reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (cached pair)
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * M_PI * u2;
    cached_ = r * std::sin(th);
    have_cached_ = true;
    return r * std::cos(th);
  }

  // uniform integer in [0, n)
  std::uint64_t integer(std::uint64_t n) {
    return n == 0 ? 0 : gen_() % n;
  }

  Vec normal_vec(Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  Mat normal_mat(Index r, Index c) {
    Mat m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = normal();
    return m;
  }

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace pdopt
