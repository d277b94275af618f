#pragma once

#include <utility>

#include "pdopt/common.hpp"
#include "pdopt/functions.hpp"
#include "pdopt/linops.hpp"
#include "pdopt/schedules.hpp"

namespace pdopt {

enum class Algorithm { pgd, apgd, fista, papc, cv, apapc };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::pgd: return "pgd";
    case Algorithm::apgd: return "apgd";
    case Algorithm::fista: return "fista";
    case Algorithm::papc: return "papc";
    case Algorithm::cv: return "cv";
    case Algorithm::apapc: return "apapc";
  }
  return "?";
}

// Full per-iteration state. x is the estimate of interest; z/v carry the
// history; y/z_hat/conj_subgrad are the auxiliary quantities the per-step
// certificates need.
struct SolverState {
  long t = 0;
  Vec x, z, y;
  Vec u, v, z_hat;
  Vec conj_subgrad;  // recovered subgradient of h* at v (APAPC)
  double a = 1.0;    // momentum value used to produce this state
  bool has_dual = false;
  bool has_aux = false;

  static SolverState primal(Vec x0) {
    SolverState s;
    s.x = x0;
    s.z = std::move(x0);
    s.y = s.x;
    return s;
  }
  static SolverState primal_dual(Vec x0, Vec u0) {
    SolverState s = primal(std::move(x0));
    s.u = u0;
    s.v = std::move(u0);
    s.has_dual = true;
    return s;
  }
};

// x' = prox_{gamma g}(x - gamma grad f(x))
inline void step_pgd(SolverState& s, const SmoothTerm& f, const CompositeG& g,
                     double gamma) {
  s.x = g.prox(gamma, s.x - gamma * f.grad(s.x));
  s.z = s.x;
  s.y = s.x;
  s.a = 1.0;
  ++s.t;
}

// y  = (1 - 1/a') x + (1/a') z
// z' = prox_{a' gamma g}(z - a' gamma grad f(y))
// x' = (1 - 1/a') x + (1/a') z'
inline void step_apgd(SolverState& s, const SmoothTerm& f, const CompositeG& g,
                      double gamma, double a_next) {
  const double inv = 1.0 / a_next;
  s.y = (1.0 - inv) * s.x + inv * s.z;
  s.z = g.prox(a_next * gamma, s.z - (a_next * gamma) * f.grad(s.y));
  s.x = (1.0 - inv) * s.x + inv * s.z;
  s.a = a_next;
  s.has_aux = true;
  ++s.t;
}

// y  = (1 - 1/a') x + (1/a') z
// x' = prox_{gamma g}(y - gamma grad f(y))
// z' = z + a' (x' - y)
inline void step_fista(SolverState& s, const SmoothTerm& f, const CompositeG& g,
                       double gamma, double /*a_t*/, double a_next) {
  const double inv = 1.0 / a_next;
  s.y = (1.0 - inv) * s.x + inv * s.z;
  s.x = g.prox(gamma, s.y - gamma * f.grad(s.y));
  s.z = s.z + a_next * (s.x - s.y);
  s.a = a_next;
  s.has_aux = true;
  ++s.t;
}

// xhat = x - gamma grad f(x) - gamma K* u
// u'   = prox_{tau h*}(u + tau K xhat)
// x'   = x - gamma grad f(x) - gamma K* u'
inline void step_papc(SolverState& s, const SmoothTerm& f, const ProxTerm& h,
                      const LinearMap& K, double gamma, double tau) {
  const Vec gx = f.grad(s.x);
  const Vec xhat = s.x - gamma * gx - gamma * K.adjoint_apply(s.u);
  s.u = conj_prox(h, tau, s.u + tau * K.apply(xhat));
  s.x = s.x - gamma * gx - gamma * K.adjoint_apply(s.u);
  s.z = s.x;
  s.y = s.x;
  s.v = s.u;
  s.a = 1.0;
  ++s.t;
}

// x' = prox_{gamma g}(x - gamma grad f(x) - gamma K* u)
// u' = prox_{tau h*}(u + tau K (2x' - x))
inline void step_cv(SolverState& s, const SmoothTerm& f, const CompositeG& g,
                    const ProxTerm& h, const LinearMap& K, double gamma,
                    double tau) {
  const Vec x_old = s.x;
  s.x = g.prox(gamma, s.x - gamma * f.grad(s.x) - gamma * K.adjoint_apply(s.u));
  s.u = conj_prox(h, tau, s.u + tau * K.apply(2.0 * s.x - x_old));
  s.z = s.x;
  s.y = s.x;
  s.v = s.u;
  s.a = 1.0;
  ++s.t;
}

// One predictor-corrector step:
//   y    = (1 - 1/a') x + (1/a') z
//   zhat = (z - a' gamma grad f(y) - a' gamma K* v) / (1 + a' gamma mu_g)
//   v'   = prox_{(tau/a') h*}(v + (tau/a') K zhat)
//   z'   = (z - a' gamma grad f(y) - a' gamma K* v') / (1 + a' gamma mu_g)
//   x'   = (1 - 1/a') x + (1/a') z'
//   u'   = (1 - 1/a') u + (1/a') v'
// For h = indicator of {b} the dual line reduces to
//   v'   = v + (tau/a')(K zhat - b),
// used when simplified_affine_dual is set.
inline void step_apapc(SolverState& s, const SmoothTerm& f, double mu_g,
                       const ProxTerm& h, const LinearMap& K, double gamma,
                       double tau, double a_next,
                       bool simplified_affine_dual = true) {
  const double inv = 1.0 / a_next;
  const double shrink = 1.0 + a_next * gamma * mu_g;
  const double toa = tau / a_next;
  s.y = (1.0 - inv) * s.x + inv * s.z;
  const Vec gy = f.grad(s.y);
  const Vec base = s.z - (a_next * gamma) * gy;
  s.z_hat = (base - (a_next * gamma) * K.adjoint_apply(s.v)) / shrink;
  const Vec K_zhat = K.apply(s.z_hat);
  Vec v_next;
  if (simplified_affine_dual && h.kind == ProxTerm::Kind::affine_indicator_b) {
    v_next = s.v + toa * (K_zhat - h.center);
  } else {
    v_next = conj_prox(h, toa, s.v + toa * K_zhat);
  }
  s.conj_subgrad = recover_conj_subgradient(v_next, s.v, K_zhat, toa);
  s.v = std::move(v_next);
  s.z = (base - (a_next * gamma) * K.adjoint_apply(s.v)) / shrink;
  s.x = (1.0 - inv) * s.x + inv * s.z;
  s.u = (1.0 - inv) * s.u + inv * s.v;
  s.a = a_next;
  s.has_aux = true;
  ++s.t;
}

}  // namespace pdopt
