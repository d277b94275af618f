#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "pdopt/common.hpp"
#include "pdopt/diagnostics.hpp"
#include "pdopt/functions.hpp"
#include "pdopt/linops.hpp"

namespace pdopt {

enum class RegimeTag { primal_only, regS, regB, regC };

inline const char* regime_tag_name(RegimeTag t) {
  switch (t) {
    case RegimeTag::primal_only: return "primal_only";
    case RegimeTag::regS: return "regS";
    case RegimeTag::regB: return "regB";
    case RegimeTag::regC: return "regC";
  }
  return "?";
}

// Affine solution set { x : C x = d } with a projection oracle; used for the
// point-convergence checks on instances with nonunique minimizers.
class AffineSet {
 public:
  AffineSet(Mat C, Vec d) : C_(std::move(C)), d_(std::move(d)) {
    cod_.compute(C_);
  }
  const Mat& C() const { return C_; }
  const Vec& d() const { return d_; }
  Vec project(const Vec& x) const { return x - cod_.solve(C_ * x - d_); }
  double distance(const Vec& x) const { return (x - project(x)).norm(); }

 private:
  Mat C_;
  Vec d_;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod_;
};

struct ProblemInstance {
  SmoothTerm f;
  double mu_g = 0.0;
  std::optional<ProxTerm> g;  // general nonsmooth g (primal algorithms only)
  std::optional<ProxTerm> h;
  std::optional<LinearMap> K;
  RegimeTag tag = RegimeTag::primal_only;
  std::uint64_t seed = 0;
  ReferencePair ref;
  SpectralBounds kb;  // exact constants when K is present
  std::shared_ptr<const AffineSet> solution_set;  // nonunique-minimizer cases

  CompositeG g_slot() const { return CompositeG{mu_g, g ? &*g : nullptr}; }

  double psi(const Vec& x) const {
    double v = f.eval(x) + 0.5 * mu_g * x.squaredNorm();
    if (g) {
      const ExtReal gv = g->eval(x);
      if (!gv.is_finite()) return kInf;
      v += gv.value();
    }
    if (h && K) {
      const ExtReal hv = h->eval(K->apply(x));
      if (!hv.is_finite()) return kInf;
      v += hv.value();
    }
    return v;
  }
};

// Exact spectral constants via dense eigendecomposition (no inflation);
// generators store these so symbolic stepsize rules resolve sharply.
inline SpectralBounds exact_spectral(const LinearMap& K) {
  Eigen::SelfAdjointEigenSolver<Mat> es(K.matrix() * K.matrix().transpose());
  const Vec ev = es.eigenvalues();
  SpectralBounds b;
  b.method = SpectralBounds::Method::exact_eig;
  b.op_norm_sq = std::max(ev[ev.size() - 1], 0.0);
  const double thr = 1e-10 * b.op_norm_sq;
  b.lam_min = ev[0] < thr ? 0.0 : ev[0];
  b.lam_min_plus = 0.0;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev[i] >= thr) {
      b.lam_min_plus = ev[i];
      break;
    }
  return b;
}

// First-order optimality residuals of the stored reference; throws
// GenerationError when they exceed tol.
inline void validate_reference(const ProblemInstance& P, double tol = 1e-8) {
  const ReferencePair& r = P.ref;
  if (P.K && P.h) {
    const Vec res1 =
        P.f.grad(r.x_star) + P.mu_g * r.x_star + P.K->adjoint_apply(r.u_star);
    if (res1.norm() > tol * (1.0 + r.grad_f_star.norm()))
      throw GenerationError("reference: primal optimality residual too large");
    // prox characterization of K x* in the subdifferential of h* at u*
    const Vec pu = conj_prox(*P.h, 1.0, r.u_star + P.K->apply(r.x_star));
    if ((pu - r.u_star).norm() > tol * (1.0 + r.u_star.norm()))
      throw GenerationError("reference: dual optimality residual too large");
  } else {
    const double gamma0 = 1.0 / P.f.lipschitz_L;
    const CompositeG g = P.g_slot();
    const Vec p = g.prox(gamma0, r.x_star - gamma0 * P.f.grad(r.x_star));
    if ((p - r.x_star).norm() > tol * (1.0 + r.x_star.norm()))
      throw GenerationError("reference: fixed-point residual too large");
  }
}

// Regime preconditions re-validated against the instance's actual spectral
// bounds and prox fields (also used at load time).
inline void validate_regime(const ProblemInstance& P) {
  switch (P.tag) {
    case RegimeTag::primal_only:
      if (P.K) throw ConfigError("primal_only instance carries an operator");
      return;
    case RegimeTag::regS:
      if (!P.h || !P.K || P.h->strong_mu_conj <= 0.0)
        throw ConfigError("regS requires smooth h (mu_h* > 0) and K");
      return;
    case RegimeTag::regB:
      if (!P.h || !P.K || P.kb.lam_min <= 0.0)
        throw ConfigError("regB requires lambda_min(KK*) > 0");
      return;
    case RegimeTag::regC: {
      if (!P.h || !P.K || P.h->kind != ProxTerm::Kind::affine_indicator_b)
        throw ConfigError("regC requires h = indicator of {b}");
      if (P.kb.lam_min_plus <= 0.0)
        throw ConfigError("regC requires lambda^+_min(KK*) > 0");
      // b must lie in range(K)
      const Vec& b = P.h->center;
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(P.K->matrix());
      const Vec x_ls = cod.solve(b);
      if ((P.K->apply(x_ls) - b).norm() > 1e-8 * (1.0 + b.norm()))
        throw ConfigError("regC requires b in range(K)");
      return;
    }
  }
}

namespace detail {

// Symmetric PSD with exact extreme eigenvalues {mu, L} and log-uniform
// interior spectrum.
inline Mat random_psd(Index n, double L, double mu, Rng& rng) {
  Eigen::HouseholderQR<Mat> qr(rng.normal_mat(n, n));
  Mat Q = qr.householderQ();
  Vec lam(n);
  if (n == 1) {
    lam[0] = L;
  } else {
    lam[0] = mu;
    lam[1] = L;
    const double lo = std::log(std::max(mu, 1e-6 * L));
    const double hi = std::log(L);
    for (Index i = 2; i < n; ++i) lam[i] = std::exp(rng.uniform(lo, hi));
  }
  return Q * lam.asDiagonal() * Q.transpose();
}

inline void finish_primal_dual(ProblemInstance& P) {
  P.kb = exact_spectral(*P.K);
  P.ref.grad_f_star = P.f.grad(P.ref.x_star);
  P.ref.conj_subgrad_star = P.K->apply(P.ref.x_star);
  P.ref.has_dual = true;
  P.ref.psi_star = P.psi(P.ref.x_star);
  validate_reference(P, 1e-10);
  validate_regime(P);
}

}  // namespace detail

// Quadratic f + quadratic h around c, dense K: the regime-S workhorse.
// The reference is drawn first (x*, c ~ N(0, I)) and the data derived so
// optimality holds by construction; the stated linear-system oracle
// (A + mu_g I + K^T K) x = b + K^T c is then solved independently and must
// agree, which certifies the pair.
inline ProblemInstance gen_quadratic_regS(Index n, Index m, double mu_g,
                                          double cond_f, std::uint64_t seed) {
  if (n < 1 || m < 1 || cond_f < 1.0)
    throw InputError("gen_quadratic_regS: need n, m >= 1 and cond_f >= 1");
  Rng rng(seed);
  const double L = 1.0;
  Mat A = detail::random_psd(n, L, L / cond_f, rng);
  Mat Km = rng.normal_mat(m, n) / std::sqrt(static_cast<double>(n));
  Vec xs = rng.normal_vec(n);
  Vec c = rng.normal_vec(m);
  Vec us = Km * xs - c;
  Vec b = A * xs + mu_g * xs + Km.transpose() * us;

  ProblemInstance P;
  P.seed = seed;
  P.mu_g = mu_g;
  P.tag = RegimeTag::regS;
  P.f = make_quadratic(A, b);
  P.h = make_quadratic_around(c, 1.0);
  P.K = LinearMap::dense(Km);
  P.ref.x_star = xs;
  P.ref.u_star = us;

  // independent oracle: direct solve of the optimality system
  Mat S = A + mu_g * Mat::Identity(n, n) + Km.transpose() * Km;
  Eigen::LDLT<Mat> ldlt(S);
  if (ldlt.info() != Eigen::Success)
    throw GenerationError("gen_quadratic_regS: singular optimality system");
  const Vec x_solve = ldlt.solve(b + Km.transpose() * c);
  if ((x_solve - xs).norm() > 1e-8 * (1.0 + xs.norm()))
    throw GenerationError("gen_quadratic_regS: oracle disagrees with reference");

  detail::finish_primal_dual(P);
  return P;
}

// Square K with prescribed singular-value range (lambda_min(KK*) > 0) and a
// weighted quadratic h; exercises the bounded-below-operator regime.
inline ProblemInstance gen_quadratic_regB(Index n, double mu_g, double cond_f,
                                          double h_weight, double sigma_lo,
                                          std::uint64_t seed) {
  if (n < 1 || cond_f < 1.0 || h_weight <= 0.0 || sigma_lo <= 0.0 ||
      sigma_lo > 1.0)
    throw InputError("gen_quadratic_regB: bad parameters");
  Rng rng(seed);
  Mat Q1 = Eigen::HouseholderQR<Mat>(rng.normal_mat(n, n)).householderQ();
  Mat Q2 = Eigen::HouseholderQR<Mat>(rng.normal_mat(n, n)).householderQ();
  Vec sig(n);
  for (Index i = 0; i < n; ++i) sig[i] = rng.uniform(sigma_lo, 1.0);
  Mat Km = Q1 * sig.asDiagonal() * Q2.transpose();
  Mat A = detail::random_psd(n, 1.0, 1.0 / cond_f, rng);
  Vec xs = rng.normal_vec(n);
  Vec c = rng.normal_vec(n);
  Vec us = h_weight * (Km * xs - c);
  Vec b = A * xs + mu_g * xs + Km.transpose() * us;

  ProblemInstance P;
  P.seed = seed;
  P.mu_g = mu_g;
  P.tag = RegimeTag::regB;
  P.f = make_quadratic(A, b);
  P.h = make_quadratic_around(c, h_weight);
  P.K = LinearMap::dense(Km);
  P.ref.x_star = std::move(xs);
  P.ref.u_star = std::move(us);
  detail::finish_primal_dual(P);
  return P;
}

// Strongly convex quadratic Psi = f + (mu_g/2)||.||^2 with lambda_min(f) = 0,
// condition number (L_f + mu_g)/mu_g ~ cond. Primal-only.
inline ProblemInstance gen_quadratic_primal(Index n, double cond,
                                            std::uint64_t seed) {
  if (n < 2 || cond <= 1.0) throw InputError("gen_quadratic_primal: bad params");
  Rng rng(seed);
  const double L = 1.0;
  Mat A = detail::random_psd(n, L, 0.0, rng);
  const double mu_g = L / cond;
  Vec xs = rng.normal_vec(n);
  Vec b = A * xs + mu_g * xs;

  ProblemInstance P;
  P.seed = seed;
  P.mu_g = mu_g;
  P.tag = RegimeTag::primal_only;
  P.f = make_quadratic(std::move(A), std::move(b));
  P.ref.x_star = std::move(xs);
  P.ref.grad_f_star = P.f.grad(P.ref.x_star);
  P.ref.psi_star = P.psi(P.ref.x_star);
  P.ref.has_dual = false;
  validate_reference(P, 1e-8);
  return P;
}

// Least squares + l1 instance; the reference is a long proximal-gradient
// run certified by its fixed-point residual (independent of any accelerated
// path under test). lam_l1 <= 0 selects 0.1 ||D^T r||_inf.
inline ProblemInstance gen_lasso_like(Index n, Index m, double lam_l1,
                                      std::uint64_t seed) {
  Rng rng(seed);
  Mat D = rng.normal_mat(m, n) / std::sqrt(static_cast<double>(m));
  Vec x_true = Vec::Zero(n);
  const Index k = std::max<Index>(1, n / 5);
  for (Index i = 0; i < k; ++i)
    x_true[static_cast<Index>(rng.integer(static_cast<std::uint64_t>(n)))] =
        rng.normal();
  Vec r = D * x_true + 0.01 * rng.normal_vec(m);
  if (lam_l1 <= 0.0)
    lam_l1 = 0.1 * (D.transpose() * r).cwiseAbs().maxCoeff();

  ProblemInstance P;
  P.seed = seed;
  P.mu_g = 0.0;
  P.tag = RegimeTag::primal_only;
  P.f = make_least_squares(D, r);
  P.g = make_l1(lam_l1);

  const double gamma = 1.0 / P.f.lipschitz_L;
  const CompositeG g = P.g_slot();
  Vec x = Vec::Zero(n);
  for (long it = 0; it < 1000000; ++it) {
    Vec xn = g.prox(gamma, x - gamma * P.f.grad(x));
    const double move = (xn - x).norm();
    x = std::move(xn);
    if (move < 1e-14) break;
  }
  const double res = (x - g.prox(gamma, x - gamma * P.f.grad(x))).norm();
  if (res > 1e-12)
    throw GenerationError("gen_lasso_like: oracle certification failed");

  P.ref.x_star = std::move(x);
  P.ref.grad_f_star = P.f.grad(P.ref.x_star);
  P.ref.psi_star = P.psi(P.ref.x_star);
  P.ref.has_dual = false;
  return P;
}

// Linearly constrained quadratic, K deliberately rank-deficient
// (duplicated rows) so lambda_min = 0 < lambda^+_min. With flat = true, f
// additionally has a zero-curvature direction inside ker(K), making the
// primal solution nonunique; the instance then carries the affine solution
// set for projection-based distance checks.
inline ProblemInstance gen_linconstrained(Index n, Index m_rank, double mu_g,
                                          std::uint64_t seed,
                                          bool flat = false) {
  if (m_rank < 1 || m_rank > n) throw InputError("gen_linconstrained: bad rank");
  Rng rng(seed);
  Mat Kr = rng.normal_mat(m_rank, n) / std::sqrt(static_cast<double>(n));
  const Index dup = std::min<Index>(2, m_rank);
  Mat Km(m_rank + dup, n);
  Km.topRows(m_rank) = Kr;
  Km.bottomRows(dup) = Kr.topRows(dup);

  Mat A;
  if (flat) {
    Eigen::JacobiSVD<Mat> svd(Km, Eigen::ComputeFullV);
    const Vec dir = svd.matrixV().col(n - 1);  // a kernel direction of K
    Mat C = rng.normal_mat(n, n);
    Mat B = C * (Mat::Identity(n, n) - dir * dir.transpose());
    A = B.transpose() * B;
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    A /= std::max(es.eigenvalues().maxCoeff(), 1e-300);
  } else {
    A = detail::random_psd(n, 1.0, 1e-4, rng);
  }

  Vec xs = rng.normal_vec(n);
  Vec b = Km * xs;
  // dual reference in range(K)
  Eigen::JacobiSVD<Mat> svd(Km, Eigen::ComputeThinU);
  const Vec sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++rank;
  const Mat Ur = svd.matrixU().leftCols(rank);
  Vec us = Ur * (Ur.transpose() * rng.normal_vec(Km.rows()));
  Vec bf = A * xs + mu_g * xs + Km.transpose() * us;

  ProblemInstance P;
  P.seed = seed;
  P.mu_g = mu_g;
  P.tag = RegimeTag::regC;
  P.f = make_quadratic(A, bf);
  P.h = make_affine_indicator(b);
  P.K = LinearMap::dense(Km);
  P.ref.x_star = xs;
  P.ref.u_star = us;

  // independent oracle: KKT system, least-squares + range projection
  const Index mm = Km.rows();
  Mat KKT = Mat::Zero(n + mm, n + mm);
  KKT.topLeftCorner(n, n) = A + mu_g * Mat::Identity(n, n);
  KKT.topRightCorner(n, mm) = Km.transpose();
  KKT.bottomLeftCorner(mm, n) = Km;
  Vec rhs(n + mm);
  rhs.head(n) = bf;
  rhs.tail(mm) = b;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(KKT);
  const Vec sol = cod.solve(rhs);
  const Vec u_kkt = Ur * (Ur.transpose() * sol.tail(mm));
  const Vec x_kkt = sol.head(n);
  const Vec res_p = A * x_kkt + mu_g * x_kkt + Km.transpose() * u_kkt - bf;
  if (res_p.norm() > 1e-8 * (1.0 + bf.norm()) ||
      (Km * x_kkt - b).norm() > 1e-8 * (1.0 + b.norm()))
    throw GenerationError("gen_linconstrained: KKT oracle residual too large");
  if (!flat && (x_kkt - xs).norm() > 1e-6 * (1.0 + xs.norm()))
    throw GenerationError("gen_linconstrained: oracle disagrees with reference");

  if (flat) {
    // solution set: K x = b and the ker(K)-projected gradient vanishes
    const Mat P_R = [&] {
      Eigen::JacobiSVD<Mat> s2(Km, Eigen::ComputeFullV);
      const Mat Vr = s2.matrixV().leftCols(rank);
      return Mat(Vr * Vr.transpose());
    }();
    const Mat Pker = Mat::Identity(n, n) - P_R;
    Mat C(mm + n, n);
    C.topRows(mm) = Km;
    C.bottomRows(n) = Pker * A;
    Vec d(mm + n);
    d.head(mm) = b;
    d.tail(n) = Pker * bf;
    P.solution_set = std::make_shared<AffineSet>(std::move(C), std::move(d));
  }

  detail::finish_primal_dual(P);
  return P;
}

// Consensus over a random connected graph: x stacks one dim-vector per
// agent, K is the edge-incidence operator (Kx = 0 iff consensus), f sums
// per-agent quadratics. Reference via the same KKT path as
// gen_linconstrained.
struct ConsensusSpec {
  std::vector<std::pair<Index, Index>> edges;
  Vec agent_weights;  // curvature per agent
  Vec centers;        // length n_agents * dim
  Index dim = 1;
  double mu_g = 0.0;
};

inline ProblemInstance make_consensus_instance(const ConsensusSpec& cs,
                                               std::uint64_t seed = 0) {
  const Index na = cs.agent_weights.size();
  const Index n = na * cs.dim;
  const Index ne = static_cast<Index>(cs.edges.size());
  if (ne == 0 || cs.centers.size() != n)
    throw InputError("make_consensus_instance: bad spec");
  Mat B = Mat::Zero(ne, na);
  for (Index e = 0; e < ne; ++e) {
    B(e, cs.edges[static_cast<size_t>(e)].first) = 1.0;
    B(e, cs.edges[static_cast<size_t>(e)].second) = -1.0;
  }
  Mat Km = Mat::Zero(ne * cs.dim, n);
  for (Index e = 0; e < ne; ++e)
    for (Index a = 0; a < na; ++a)
      if (B(e, a) != 0.0)
        Km.block(e * cs.dim, a * cs.dim, cs.dim, cs.dim) =
            B(e, a) * Mat::Identity(cs.dim, cs.dim);

  Vec diag(n);
  for (Index a = 0; a < na; ++a)
    diag.segment(a * cs.dim, cs.dim).setConstant(cs.agent_weights[a]);
  Mat A = diag.asDiagonal();
  Vec bf = diag.cwiseProduct(cs.centers);

  const Index mm = Km.rows();
  Mat KKT = Mat::Zero(n + mm, n + mm);
  KKT.topLeftCorner(n, n) = A + cs.mu_g * Mat::Identity(n, n);
  KKT.topRightCorner(n, mm) = Km.transpose();
  KKT.bottomLeftCorner(mm, n) = Km;
  Vec rhs = Vec::Zero(n + mm);
  rhs.head(n) = bf;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(KKT);
  const Vec sol = cod.solve(rhs);

  Eigen::JacobiSVD<Mat> svd(Km, Eigen::ComputeThinU);
  const Vec sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++rank;
  const Mat Ur = svd.matrixU().leftCols(rank);

  ProblemInstance P;
  P.seed = seed;
  P.mu_g = cs.mu_g;
  P.tag = RegimeTag::regC;
  P.f = make_quadratic(A, bf);
  P.h = make_affine_indicator(Vec::Zero(mm));
  P.K = LinearMap::dense(Km);
  P.ref.x_star = sol.head(n);
  P.ref.u_star = Ur * (Ur.transpose() * sol.tail(mm));
  detail::finish_primal_dual(P);
  return P;
}

inline ProblemInstance gen_consensus(Index n_agents, Index dim, double mu_g,
                                     std::uint64_t seed) {
  if (n_agents < 2 || dim < 1) throw InputError("gen_consensus: bad params");
  Rng rng(seed);
  // random spanning tree (connected by construction) plus two chords
  std::vector<Index> perm(static_cast<size_t>(n_agents));
  for (Index i = 0; i < n_agents; ++i) perm[static_cast<size_t>(i)] = i;
  for (Index i = n_agents - 1; i > 0; --i)
    std::swap(perm[static_cast<size_t>(i)],
              perm[rng.integer(static_cast<std::uint64_t>(i + 1))]);
  std::set<std::pair<Index, Index>> edges;
  for (Index i = 1; i < n_agents; ++i) {
    const Index a = perm[static_cast<size_t>(i)];
    const Index b = perm[rng.integer(static_cast<std::uint64_t>(i))];
    edges.insert({std::min(a, b), std::max(a, b)});
  }
  int tries = 0;
  const size_t target = static_cast<size_t>(n_agents - 1) + 2;
  while (edges.size() < target && tries++ < 200) {
    const Index a = static_cast<Index>(rng.integer(static_cast<std::uint64_t>(n_agents)));
    const Index b = static_cast<Index>(rng.integer(static_cast<std::uint64_t>(n_agents)));
    if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
  }

  ConsensusSpec cs;
  cs.edges.assign(edges.begin(), edges.end());
  cs.dim = dim;
  cs.mu_g = mu_g;
  cs.agent_weights = Vec(n_agents);
  for (Index a = 0; a < n_agents; ++a) cs.agent_weights[a] = rng.uniform(0.5, 2.0);
  cs.centers = rng.normal_vec(n_agents * dim);
  return make_consensus_instance(cs, seed);
}

}  // namespace pdopt
