#pragma once

// Independent reference implementations used only by tests: a central
// finite-difference gradient, a power-iteration-with-deflation eigensolver,
// and small sample-statistics helpers. These deliberately avoid the library's
// analytic gradients and Eigen's eigensolvers so that agreement between the
// two routes is meaningful evidence.

#include "flowartist/core.hpp"

#include <functional>

namespace oracles {

using flowartist::Index;
using flowartist::Matrix;
using flowartist::Vector;

/// Central finite differences: g_i = (f(x + h e_i) - f(x - h e_i)) / (2h).
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, Vector x,
                          double h = 1e-6) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double fp = f(x);
    x[i] = saved - h;
    const double fm = f(x);
    x[i] = saved;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Max per-component relative error with a small-magnitude floor: components
/// below the floor are effectively compared absolutely, which keeps the
/// metric meaningful where the true gradient is (near) zero and the central
/// difference only carries roundoff noise.
inline double max_rel_error(const Vector& a, const Vector& b, double floor = 1e-3) {
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

/// All n eigenpairs of a symmetric matrix by power iteration with deflation,
/// descending algebraic order. The iteration runs on S + cI with
/// c = ||S||_inf + 1 so every shifted eigenvalue is positive and the dominant
/// one is the largest algebraic eigenvalue; deflation subtracts the converged
/// rank-one piece. Runs each pair to residual <= tol and throws if the
/// iteration cap is hit.
inline std::pair<Vector, Matrix> deflation_eigensolver(const Matrix& s, double tol = 1e-12,
                                                       long max_iter = 2000000) {
  const Index n = s.rows();
  if (s.cols() != n) throw std::invalid_argument("deflation_eigensolver: square input");
  const double shift = s.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  Matrix a = s + shift * Matrix::Identity(n, n);
  const double scale = a.cwiseAbs().rowwise().sum().maxCoeff();
  Vector values(n);
  Matrix vectors(n, n);
  flowartist::Rng rng(0x0eac1eULL);
  for (Index k = 0; k < n; ++k) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.normal();
    v.normalize();
    double rho = 0.0;
    long iter = 0;
    while (true) {
      const Vector w = a * v;
      rho = v.dot(w);
      const double residual = (w - rho * v).norm();
      if (residual <= tol * scale) break;
      if (++iter > max_iter) {
        throw std::runtime_error("deflation_eigensolver: no convergence, residual " +
                                 std::to_string(residual));
      }
      v = w / w.norm();
    }
    for (Index i = 0; i < n; ++i) {
      if (std::abs(v[i]) > 1e-8) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    values[k] = rho - shift;
    vectors.col(k) = v;
    a -= rho * v * v.transpose();
  }
  return {std::move(values), std::move(vectors)};
}

inline double sample_mean(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

inline double sample_std(const std::vector<double>& xs) {
  const double mean = sample_mean(xs);
  double sum = 0.0;
  for (double x : xs) sum += (x - mean) * (x - mean);
  return std::sqrt(sum / static_cast<double>(xs.size() - 1));
}

}  // namespace oracles
