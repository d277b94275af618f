#pragma once

#include <string>
#include <vector>

#include "pdopt/common.hpp"

namespace pdopt {

enum class Regime {
  constant_one,
  apgd_sublinear,
  apgd_capped,
  regS,
  regS_capped,
  regB,
  regB_capped,
  regC,
  regC_capped
};

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::constant_one: return "constant_one";
    case Regime::apgd_sublinear: return "apgd_sublinear";
    case Regime::apgd_capped: return "apgd_capped";
    case Regime::regS: return "regS";
    case Regime::regS_capped: return "regS_capped";
    case Regime::regB: return "regB";
    case Regime::regB_capped: return "regB_capped";
    case Regime::regC: return "regC";
    case Regime::regC_capped: return "regC_capped";
  }
  return "?";
}

struct ScheduleParams {
  double gamma = 0.0;
  double tau = 0.0;
  double mu_g = 0.0;
  double mu_hconj = 0.0;
  double L_f = 0.0;
  double lam = 0.0;        // lambda_min(KK*) (regB) or lambda^+_min (regC)
  double K_norm_sq = 0.0;  // ||K||^2
  double nu = 0.0;         // gamma tau ||K||^2; derived when 0
  bool linear_form = false;  // APGD: a_t = (t+1)/2 instead of the recursion
};

// Momentum parameter sequence a_0, a_1, a_2, ... Stateful single-consumer
// iterator; construction data immutable. All regime preconditions are
// checked here, so next() cannot fail.
class MomentumSchedule {
 public:
  MomentumSchedule(Regime regime, ScheduleParams p) : regime_(regime), p_(p) {
    validate_and_derive();
  }

  Regime regime() const { return regime_; }
  const ScheduleParams& params() const { return p_; }
  double a_sharp() const { return a_sharp_; }
  double a0() const { return a0_; }
  long index() const { return t_; }
  double current() const { return a_; }

  // Advances the sequence; the first two calls return a_0 then a_1.
  double next() {
    ++t_;
    if (t_ == 0) {
      a_ = a0_;
    } else if (t_ == 1) {
      a_ = a1_;
    } else {
      a_ = advance(a_, t_);
    }
    return a_;
  }

  // First n values, without disturbing this instance.
  std::vector<double> materialize(long n) const {
    MomentumSchedule copy = *this;
    copy.t_ = -1;
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) out.push_back(copy.next());
    return out;
  }

 private:
  static double fib_bound(double a) {
    return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * a * a));
  }

  double advance(double a, long t_next) const {
    switch (regime_) {
      case Regime::constant_one:
        return 1.0;
      case Regime::apgd_sublinear:
      case Regime::apgd_capped: {
        const double v = p_.linear_form ? 0.5 * (static_cast<double>(t_next) + 1.0)
                                        : fib_bound(a);
        return std::min(v, a_sharp_);
      }
      case Regime::regS:
      case Regime::regS_capped: {
        const double v = std::min(std::sqrt(a * a + a * p_.tau * p_.mu_hconj),
                                  fib_bound(a));
        return std::min(v, a_sharp_);
      }
      case Regime::regB:
      case Regime::regB_capped:
      case Regime::regC:
      case Regime::regC_capped: {
        const double r1 = a * std::sqrt(1.0 + nu_ * p_.lam / (4.0 * p_.K_norm_sq));
        const double r2 = std::sqrt(
            a * a + a * nu_ * p_.lam / (4.0 * p_.gamma * p_.L_f * p_.K_norm_sq));
        return std::min(std::min(std::min(r1, r2), fib_bound(a)), a_sharp_);
      }
    }
    return 1.0;
  }

  void validate_and_derive() {
    const double slack = 1.0 + 1e-12;
    auto fail = [](const std::string& m) { throw ConfigError("schedule: " + m); };

    a_sharp_ = kInf;
    a0_ = 0.0;
    a1_ = 1.0;

    switch (regime_) {
      case Regime::constant_one:
        a0_ = a1_ = 1.0;
        break;
      case Regime::apgd_sublinear:
        break;
      case Regime::apgd_capped:
        if (p_.L_f <= 0.0) fail("apgd_capped needs L_f > 0");
        if (p_.mu_g <= 0.0) fail("apgd_capped needs mu_g > 0");
        a_sharp_ = std::max(std::sqrt(p_.L_f / p_.mu_g), 1.0);
        break;
      case Regime::regS:
      case Regime::regS_capped: {
        if (p_.tau <= 0.0) fail("regS needs tau > 0");
        if (p_.mu_hconj <= 0.0) fail("regS needs mu_hconj > 0");
        if (p_.gamma > 0.0 && p_.L_f > 0.0 && p_.gamma > slack / p_.L_f)
          fail("regS needs gamma <= 1/L_f");
        const double tm = p_.tau * p_.mu_hconj;
        a0_ = 0.5 * (std::sqrt(tm * tm + 4.0) - tm);
        if (p_.gamma > 0.0 && p_.K_norm_sq > 0.0 &&
            p_.gamma * p_.tau * p_.K_norm_sq >
                (1.0 + a0_ * p_.gamma * p_.mu_g) * slack)
          fail("regS needs gamma*tau*||K||^2 <= 1 + a_0*gamma*mu_g");
        if (regime_ == Regime::regS_capped) {
          if (p_.L_f <= 0.0 || p_.mu_g <= 0.0)
            fail("regS_capped needs L_f > 0 and mu_g > 0");
          a_sharp_ = std::max(std::sqrt(p_.L_f / p_.mu_g), 1.0);
        }
        break;
      }
      case Regime::regB:
      case Regime::regB_capped:
      case Regime::regC:
      case Regime::regC_capped: {
        if (p_.gamma <= 0.0 || p_.tau <= 0.0) fail("regB/regC need gamma, tau > 0");
        if (p_.L_f <= 0.0) fail("regB/regC need L_f > 0");
        if (p_.lam <= 0.0) fail("regB/regC need a positive lambda");
        if (p_.K_norm_sq <= 0.0) fail("regB/regC need ||K||^2 > 0");
        if (p_.gamma > slack / (2.0 * p_.L_f))
          fail("regB/regC need gamma <= 1/(2 L_f)");
        if (p_.mu_g > slack * p_.L_f / 2.0)
          fail("regB/regC need mu_g <= L_f/2");
        a0_ = a1_ = 1.0;
        nu_ = p_.gamma * p_.tau * p_.K_norm_sq;
        if (p_.nu > 0.0 && std::abs(nu_ - p_.nu) > 1e-9 * std::max(1.0, p_.nu))
          fail("nu inconsistent with gamma*tau*||K||^2");
        if (nu_ > (1.0 + a0_ * p_.gamma * p_.mu_g) * slack)
          fail("regB/regC need gamma*tau*||K||^2 <= 1 + a_0*gamma*mu_g");
        if (regime_ == Regime::regB_capped || regime_ == Regime::regC_capped) {
          if (p_.mu_g <= 0.0) fail("capped regB/regC need mu_g > 0");
          a_sharp_ = std::max(
              std::sqrt(p_.lam / (2.0 * p_.mu_g * p_.L_f * p_.K_norm_sq)) /
                  p_.gamma,
              1.0);
        }
        break;
      }
    }
    p_.nu = nu_;
    a0_ = std::min(a0_, a_sharp_);
    a1_ = std::min(a1_, a_sharp_);
  }

  Regime regime_;
  ScheduleParams p_;
  double a_sharp_ = kInf;
  double a0_ = 0.0;
  double a1_ = 1.0;
  double nu_ = 0.0;
  double a_ = 0.0;
  long t_ = -1;
};

}  // namespace pdopt
