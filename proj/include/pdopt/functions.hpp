#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <utility>

#include "pdopt/common.hpp"
#include "pdopt/linops.hpp"

namespace pdopt {

// ---------------------------------------------------------------------------
// Smooth term f. Built-in kinds carry their payload as plain members so the
// object is freely copyable; a custom kind takes user hooks (tests only).
// bregman(x, xs, gs) evaluates f(x) - f(xs) - <x - xs, gs> in centered form
// so that it scales with ||x - xs|| instead of |f|: the per-step
// certificates multiply it by a_t^2, so raw-difference rounding noise is
// not acceptable.
// ---------------------------------------------------------------------------
struct SmoothTerm {
  enum class Kind { quadratic, logistic, linear, custom };

  Kind kind = Kind::custom;
  Mat A;        // quadratic: A; logistic: data rows
  Vec b;        // quadratic: b; logistic: labels; linear: c
  double lipschitz_L = 1.0;
  double strong_mu = 0.0;
  double l_override = 1.0;
  Index dim = 0;

  std::function<double(const Vec&)> custom_eval;
  std::function<Vec(const Vec&)> custom_grad;

  double eval(const Vec& x) const {
    switch (kind) {
      case Kind::quadratic:
        return 0.5 * x.dot(A * x) - b.dot(x);
      case Kind::logistic: {
        const Vec m = b.cwiseProduct(A * x);
        double s = 0.0;
        for (Index i = 0; i < m.size(); ++i)
          s += m[i] > 0 ? std::log1p(std::exp(-m[i]))
                        : -m[i] + std::log1p(std::exp(m[i]));
        return s;
      }
      case Kind::linear:
        return b.dot(x);
      case Kind::custom:
        return custom_eval(x);
    }
    return 0.0;
  }

  Vec grad(const Vec& x) const {
    switch (kind) {
      case Kind::quadratic:
        return A * x - b;
      case Kind::logistic: {
        const Vec m = b.cwiseProduct(A * x);
        Vec w(m.size());
        for (Index i = 0; i < m.size(); ++i)
          w[i] = -b[i] / (1.0 + std::exp(m[i]));
        return A.transpose() * w;
      }
      case Kind::linear:
        return b;
      case Kind::custom:
        return custom_grad(x);
    }
    return Vec();
  }

  double bregman(const Vec& x, const Vec& xs, const Vec& gs) const {
    switch (kind) {
      case Kind::quadratic: {
        const Vec d = x - xs;
        return 0.5 * d.dot(A * d);
      }
      case Kind::linear:
        return 0.0;
      default:
        return eval(x) - eval(xs) - (x - xs).dot(gs);
    }
  }
};

// f(x) = 1/2 x^T A x - b^T x with A symmetric PSD; exact constants from the
// spectrum of A. A = 0 degrades to a linear f with surrogate L = 1.
inline SmoothTerm make_quadratic(Mat A, Vec b) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw InputError("make_quadratic: dimension mismatch");
  const double amax = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * amax)
    throw InputError("make_quadratic: A not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  const Vec ev = es.eigenvalues();
  if (ev[0] < -1e-10 * std::max(1.0, ev[ev.size() - 1]))
    throw InputError("make_quadratic: A not positive semidefinite");

  SmoothTerm f;
  f.kind = SmoothTerm::Kind::quadratic;
  f.A = std::move(A);
  f.b = std::move(b);
  f.dim = f.A.rows();
  f.lipschitz_L = std::max(ev[ev.size() - 1], 0.0);
  f.strong_mu = std::max(ev[0], 0.0);
  if (f.lipschitz_L == 0.0) f.lipschitz_L = 1.0;
  return f;
}

inline SmoothTerm make_least_squares(const Mat& D, const Vec& r) {
  if (D.rows() != r.size())
    throw InputError("make_least_squares: dimension mismatch");
  return make_quadratic(D.transpose() * D, D.transpose() * r);
}

// f(x) = sum_i log(1 + exp(-l_i d_i^T x)); L_f = ||D||^2 / 4, mu_f = 0.
inline SmoothTerm make_logistic(Mat D, Vec labels) {
  if (D.rows() != labels.size())
    throw InputError("make_logistic: dimension mismatch");
  SmoothTerm f;
  f.kind = SmoothTerm::Kind::logistic;
  f.dim = D.cols();
  Eigen::SelfAdjointEigenSolver<Mat> es(D.transpose() * D);
  f.lipschitz_L = 0.25 * std::max(es.eigenvalues().maxCoeff(), 0.0);
  if (f.lipschitz_L == 0.0) f.lipschitz_L = 1.0;
  f.strong_mu = 0.0;
  f.A = std::move(D);
  f.b = std::move(labels);
  return f;
}

// Purely linear f; the Lipschitz constant is a user-supplied surrogate
// (default 1) since the stepsize rules need L_f > 0.
inline SmoothTerm make_linear(Vec c, double L_override = 1.0) {
  if (L_override <= 0.0) throw InputError("make_linear: L override must be > 0");
  SmoothTerm f;
  f.kind = SmoothTerm::Kind::linear;
  f.dim = c.size();
  f.b = std::move(c);
  f.lipschitz_L = L_override;
  f.l_override = L_override;
  return f;
}

// ---------------------------------------------------------------------------
// Proximable term h (also usable in the g slot of the primal algorithms).
// conj_bregman(u, us, gstar) evaluates h*(u) - h*(us) - <u - us, gstar> in
// centered form (+inf when u leaves dom h*); eval_diff(x, xs) evaluates
// h(x) - h(xs) per component where h is separable.
// ---------------------------------------------------------------------------
struct ProxTerm {
  enum class Kind {
    zero,
    l1_norm,
    quadratic_around_c,
    huber,
    affine_indicator_b,
    box_indicator,
    custom
  };

  Kind kind = Kind::zero;
  double weight = 1.0;  // l1 weight / quadratic curvature
  double delta = 1.0;   // huber threshold
  Vec center;           // c (quadratic), b (affine indicator)
  Vec lo, hi;           // box bounds
  double strong_mu_conj = 0.0;  // mu_{h*}
  double smooth_L = kInf;       // L_h (= 1/mu_{h*} when smooth)

  std::function<ExtReal(const Vec&)> custom_eval;
  std::function<ExtReal(const Vec&)> custom_conj_eval;
  std::function<Vec(double, const Vec&)> custom_prox;

  ExtReal eval(const Vec& x) const {
    switch (kind) {
      case Kind::zero:
        return ExtReal(0.0);
      case Kind::l1_norm:
        return ExtReal(weight * x.cwiseAbs().sum());
      case Kind::quadratic_around_c:
        return ExtReal(0.5 * weight * (x - center).squaredNorm());
      case Kind::huber: {
        double s = 0.0;
        for (Index i = 0; i < x.size(); ++i) {
          const double a = std::abs(x[i]);
          s += a <= delta ? 0.5 * a * a / delta : a - 0.5 * delta;
        }
        return ExtReal(s);
      }
      case Kind::affine_indicator_b:
        return (x - center).cwiseAbs().maxCoeff() <=
                       1e-12 * (1.0 + center.cwiseAbs().maxCoeff())
                   ? ExtReal(0.0)
                   : ExtReal::infinity();
      case Kind::box_indicator:
        for (Index i = 0; i < x.size(); ++i)
          if (x[i] < lo[i] - 1e-12 || x[i] > hi[i] + 1e-12)
            return ExtReal::infinity();
        return ExtReal(0.0);
      case Kind::custom:
        return custom_eval(x);
    }
    return ExtReal(0.0);
  }

  ExtReal conj_eval(const Vec& p) const {
    switch (kind) {
      case Kind::zero:
        return p.cwiseAbs().maxCoeff() == 0.0 ? ExtReal(0.0)
                                              : ExtReal::infinity();
      case Kind::l1_norm:
        return p.cwiseAbs().maxCoeff() <= weight * (1.0 + 1e-12)
                   ? ExtReal(0.0)
                   : ExtReal::infinity();
      case Kind::quadratic_around_c:
        return ExtReal(0.5 / weight * p.squaredNorm() + p.dot(center));
      case Kind::huber:
        return p.cwiseAbs().maxCoeff() <= 1.0 + 1e-12
                   ? ExtReal(0.5 * delta * p.squaredNorm())
                   : ExtReal::infinity();
      case Kind::affine_indicator_b:
        return ExtReal(p.dot(center));
      case Kind::box_indicator: {
        double s = 0.0;
        for (Index i = 0; i < p.size(); ++i)
          s += p[i] > 0 ? p[i] * hi[i] : p[i] * lo[i];
        return std::isfinite(s) ? ExtReal(s) : ExtReal::infinity();
      }
      case Kind::custom:
        return custom_conj_eval(p);
    }
    return ExtReal(0.0);
  }

  // prox_{alpha h}(u)
  Vec prox(double alpha, const Vec& u) const {
    switch (kind) {
      case Kind::zero:
        return u;
      case Kind::l1_norm: {
        // soft threshold; ties at the kink resolve to exactly 0
        const double k = alpha * weight;
        Vec p(u.size());
        for (Index i = 0; i < u.size(); ++i) {
          const double a = std::abs(u[i]);
          p[i] = a <= k ? 0.0 : (u[i] > 0 ? u[i] - k : u[i] + k);
        }
        return p;
      }
      case Kind::quadratic_around_c:
        return (u + (alpha * weight) * center) / (1.0 + alpha * weight);
      case Kind::huber: {
        Vec p(u.size());
        for (Index i = 0; i < u.size(); ++i) {
          if (std::abs(u[i]) <= delta + alpha)
            p[i] = u[i] / (1.0 + alpha / delta);
          else
            p[i] = u[i] > 0 ? u[i] - alpha : u[i] + alpha;
        }
        return p;
      }
      case Kind::affine_indicator_b:
        return center;
      case Kind::box_indicator:
        return u.cwiseMax(lo).cwiseMin(hi);
      case Kind::custom:
        return custom_prox(alpha, u);
    }
    return u;
  }

  double conj_bregman(const Vec& u, const Vec& us, const Vec& gstar) const {
    const Vec du = u - us;
    switch (kind) {
      case Kind::zero:
        if (du.cwiseAbs().maxCoeff() != 0.0) return kInf;
        return 0.0;
      case Kind::l1_norm:
        if (u.cwiseAbs().maxCoeff() > weight * (1.0 + 1e-9)) return kInf;
        return -du.dot(gstar);
      case Kind::quadratic_around_c:
        // grad h*(us) = us / weight + c
        return 0.5 / weight * du.squaredNorm() +
               du.dot(us / weight + center - gstar);
      case Kind::huber:
        if (u.cwiseAbs().maxCoeff() > 1.0 + 1e-9) return kInf;
        return 0.5 * delta * du.squaredNorm() + du.dot(delta * us - gstar);
      case Kind::affine_indicator_b:
        return du.dot(center - gstar);
      default: {
        const ExtReal a = conj_eval(u);
        if (!a.is_finite()) return kInf;
        return a.value() - conj_eval(us).value() - du.dot(gstar);
      }
    }
  }

  ExtReal eval_diff(const Vec& x, const Vec& xs) const {
    switch (kind) {
      case Kind::zero:
        return ExtReal(0.0);
      case Kind::l1_norm: {
        double s = 0.0;
        for (Index i = 0; i < x.size(); ++i)
          s += std::abs(x[i]) - std::abs(xs[i]);
        return ExtReal(weight * s);
      }
      case Kind::quadratic_around_c: {
        const Vec d = x - xs;
        return ExtReal(0.5 * weight * d.squaredNorm() +
                       weight * d.dot(xs - center));
      }
      case Kind::huber: {
        double s = 0.0;
        for (Index i = 0; i < x.size(); ++i) {
          const double a = std::abs(x[i]), as = std::abs(xs[i]);
          const double va = a <= delta ? 0.5 * a * a / delta : a - 0.5 * delta;
          const double vs =
              as <= delta ? 0.5 * as * as / delta : as - 0.5 * delta;
          s += va - vs;
        }
        return ExtReal(s);
      }
      default: {
        const ExtReal a = eval(x);
        if (!a.is_finite()) return ExtReal::infinity();
        const ExtReal b2 = eval(xs);
        if (!b2.is_finite()) return ExtReal::infinity();
        return ExtReal(a.value() - b2.value());
      }
    }
  }
};

inline ProxTerm make_zero() {
  ProxTerm h;
  h.kind = ProxTerm::Kind::zero;
  return h;
}

inline ProxTerm make_l1(double weight = 1.0) {
  if (weight <= 0.0) throw InputError("make_l1: weight must be > 0");
  ProxTerm h;
  h.kind = ProxTerm::Kind::l1_norm;
  h.weight = weight;
  return h;
}

// h(u) = (w/2) ||u - c||^2; h*(p) = (1/2w) ||p||^2 + <p, c>.
inline ProxTerm make_quadratic_around(Vec c, double weight = 1.0) {
  if (weight <= 0.0)
    throw InputError("make_quadratic_around: weight must be > 0");
  ProxTerm h;
  h.kind = ProxTerm::Kind::quadratic_around_c;
  h.weight = weight;
  h.center = std::move(c);
  h.strong_mu_conj = 1.0 / weight;
  h.smooth_L = weight;
  return h;
}

// Componentwise Huber, quadratic s^2/(2 delta) inside [-delta, delta];
// L_h = 1/delta, mu_{h*} = delta.
inline ProxTerm make_huber(double delta) {
  if (delta <= 0.0) throw InputError("make_huber: delta must be > 0");
  ProxTerm h;
  h.kind = ProxTerm::Kind::huber;
  h.delta = delta;
  h.strong_mu_conj = delta;
  h.smooth_L = 1.0 / delta;
  return h;
}

// Indicator of {b}; conjugate is the linear form <., b>.
inline ProxTerm make_affine_indicator(Vec b) {
  ProxTerm h;
  h.kind = ProxTerm::Kind::affine_indicator_b;
  h.center = std::move(b);
  return h;
}

inline ProxTerm make_box_indicator(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || (hi - lo).minCoeff() < 0.0)
    throw InputError("make_box_indicator: invalid bounds");
  ProxTerm h;
  h.kind = ProxTerm::Kind::box_indicator;
  h.lo = std::move(lo);
  h.hi = std::move(hi);
  return h;
}

// ---------------------------------------------------------------------------
// Conjugate-side operations
// ---------------------------------------------------------------------------

// prox_{alpha h*}(u) via the Moreau identity; affine indicators short-cut to
// u - alpha b since h*(.) = <., b>.
inline Vec conj_prox(const ProxTerm& h, double alpha, const Vec& u) {
  if (alpha <= 0.0) throw InputError("conj_prox: alpha must be > 0");
  if (h.kind == ProxTerm::Kind::affine_indicator_b) return u - alpha * h.center;
  return u - alpha * h.prox(1.0 / alpha, u / alpha);
}

inline ExtReal eval_conjugate(const ProxTerm& h, const Vec& u) {
  return h.conj_eval(u);
}

// The dual step v' = prox_{(tau/a) h*}(v + (tau/a) K zhat) implicitly
// selects a subgradient of h* at v'; recover it from the prox residual.
inline Vec recover_conj_subgradient(const Vec& v_next, const Vec& v,
                                    const Vec& K_zhat, double tau_over_a) {
  if (tau_over_a <= 0.0)
    throw InputError("recover_conj_subgradient: tau_over_a must be > 0");
  return (v + tau_over_a * K_zhat - v_next) / tau_over_a;
}

// ---------------------------------------------------------------------------
// g slot of the primal algorithms: (mu/2)||.||^2 plus an optional proximable
// part. prox of the sum reduces exactly to a scaled prox of the part.
// ---------------------------------------------------------------------------
struct CompositeG {
  double mu = 0.0;
  const ProxTerm* part = nullptr;

  Vec prox(double alpha, const Vec& u) const {
    const double shrink = 1.0 + alpha * mu;
    if (!part) return u / shrink;
    return part->prox(alpha / shrink, u / shrink);
  }
  ExtReal eval(const Vec& x) const {
    const double q = 0.5 * mu * x.squaredNorm();
    if (!part) return ExtReal(q);
    const ExtReal p = part->eval(x);
    if (!p.is_finite()) return ExtReal::infinity();
    return ExtReal(q + p.value());
  }
  // Bregman distance of g at x around xs with the optimality-selected
  // subgradient -gs (callers pass gs = grad f(xs)):
  //   g(x) - g(xs) + <x - xs, gs>, expanded in centered form.
  double bregman(const Vec& x, const Vec& xs, const Vec& gs) const {
    const Vec d = x - xs;
    double r = 0.5 * mu * d.squaredNorm() + d.dot(gs + mu * xs);
    if (part) {
      const ExtReal pd = part->eval_diff(x, xs);
      if (!pd.is_finite()) return kInf;
      r += pd.value();
    }
    return r;
  }
};

}  // namespace pdopt
