#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pdopt/common.hpp"

namespace pdopt {

// Dense linear operator with structured shortcuts. Immutable after
// construction; operations are pure and safe to share across runs.
class LinearMap {
 public:
  enum class Form { dense, identity, scaled_identity, diagonal, difference };

  static LinearMap dense(Mat m) {
    if (m.size() == 0) throw InputError("LinearMap: empty matrix");
    if (m.cwiseAbs().maxCoeff() == 0.0)
      throw InputError("LinearMap: zero operator");
    return LinearMap(std::move(m), Form::dense);
  }
  static LinearMap identity(Index n) {
    return LinearMap(Mat::Identity(n, n), Form::identity);
  }
  static LinearMap scaled_identity(Index n, double s) {
    if (s == 0.0) throw InputError("LinearMap: zero operator");
    return LinearMap(s * Mat::Identity(n, n), Form::scaled_identity);
  }
  static LinearMap diagonal(const Vec& d) {
    if (d.cwiseAbs().maxCoeff() == 0.0)
      throw InputError("LinearMap: zero operator");
    Mat m = d.asDiagonal();
    return LinearMap(std::move(m), Form::diagonal);
  }
  // (n-1) x n stacked first-difference rows: (Kx)_i = x_{i+1} - x_i
  static LinearMap difference(Index n) {
    if (n < 2) throw InputError("LinearMap: difference needs n >= 2");
    Mat m = Mat::Zero(n - 1, n);
    for (Index i = 0; i + 1 < n; ++i) {
      m(i, i) = -1.0;
      m(i, i + 1) = 1.0;
    }
    return LinearMap(std::move(m), Form::difference);
  }

  Index rows() const { return m_.rows(); }
  Index cols() const { return m_.cols(); }
  Form form() const { return form_; }
  const Mat& matrix() const { return m_; }

  Vec apply(const Vec& x) const {
    if (x.size() != cols())
      throw InputError("LinearMap::apply: dimension mismatch");
    if (form_ == Form::identity) return x;
    if (form_ == Form::diagonal || form_ == Form::scaled_identity)
      return m_.diagonal().cwiseProduct(x);
    return m_ * x;
  }

  Vec adjoint_apply(const Vec& u) const {
    if (u.size() != rows())
      throw InputError("LinearMap::adjoint_apply: dimension mismatch");
    if (form_ == Form::identity) return u;
    if (form_ == Form::diagonal || form_ == Form::scaled_identity)
      return m_.diagonal().cwiseProduct(u);
    return m_.transpose() * u;
  }

 private:
  LinearMap(Mat m, Form f) : m_(std::move(m)), form_(f) {}
  Mat m_;
  Form form_;
};

struct SpectralBounds {
  double op_norm_sq = 0.0;    // upper estimate of ||K||^2
  double lam_min = 0.0;       // lambda_min(KK*)
  double lam_min_plus = 0.0;  // smallest nonzero eigenvalue of KK*
  enum class Method { exact_eig, power_iteration } method = Method::exact_eig;
};

// op_norm_sq from power iteration on K*K, inflated by (1 + 10 tol) so that
// downstream stepsize conditions are never violated by an under-estimate.
// lam_min / lam_min_plus from an exact eigendecomposition of the rows x rows
// Gram matrix KK*. Numerical-rank threshold for the nonzero part:
// 1e-10 * op_norm_sq.
inline SpectralBounds estimate_spectral_bounds(const LinearMap& K,
                                               double tol = 1e-9,
                                               int max_iters = 10000) {
  if (tol <= 0.0) throw InputError("estimate_spectral_bounds: tol must be > 0");
  const Index n = K.cols();
  Rng rng(0x9e3779b97f4a7c15ull ^ (static_cast<std::uint64_t>(n) << 17) ^
          static_cast<std::uint64_t>(K.rows()));
  Vec w = rng.normal_vec(n);
  w.normalize();
  double lam = 0.0;
  int settled = 0;
  bool converged = false;
  for (int it = 0; it < max_iters; ++it) {
    Vec kw = K.apply(w);
    Vec ktkw = K.adjoint_apply(kw);
    const double lam_new = w.dot(ktkw);  // Rayleigh quotient of K*K
    const double nrm = ktkw.norm();
    if (nrm == 0.0) {
      // w landed in the kernel; restart from a fresh direction
      w = rng.normal_vec(n);
      w.normalize();
      continue;
    }
    w = ktkw / nrm;
    if (std::abs(lam_new - lam) <= tol * std::max(1.0, std::abs(lam_new))) {
      if (++settled >= 3) {
        lam = lam_new;
        converged = true;
        break;
      }
    } else {
      settled = 0;
    }
    lam = lam_new;
  }
  if (!converged)
    throw EstimationError("power iteration did not settle", lam * (1.0 + 10.0 * tol));

  SpectralBounds b;
  b.op_norm_sq = lam * (1.0 + 10.0 * tol);
  b.method = SpectralBounds::Method::exact_eig;

  const Mat gram = K.matrix() * K.matrix().transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  if (es.info() != Eigen::Success)
    throw EstimationError("eigendecomposition of KK* failed", b.op_norm_sq);
  const Vec ev = es.eigenvalues();  // ascending
  const double thr = 1e-10 * b.op_norm_sq;
  b.lam_min = ev[0] < thr ? 0.0 : ev[0];
  b.lam_min_plus = 0.0;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] >= thr) {
      b.lam_min_plus = ev[i];
      break;
    }
  }
  if (b.lam_min_plus == 0.0)
    throw EstimationError("operator numerically zero", b.op_norm_sq);
  return b;
}

// Plain-text matrix format: one row per line, whitespace-separated decimals.
inline Mat load_matrix_text(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof())
      throw IoError("load_matrix_text: non-numeric token in line: " + line);
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("load_matrix_text: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("load_matrix_text: empty input");
  Mat m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return m;
}

inline Mat load_matrix_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  return load_matrix_text(f);
}

}  // namespace pdopt
