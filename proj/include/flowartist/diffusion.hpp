#pragma once

// Directed diffusion built on the flashlight affinity: row normalization gives
// the directed operator P_d = D^-1 A, symmetrization gives
// P_sd = (P_d + P_d^T)/2, whose eigenpairs yield diffusion coordinates
// coords[i][k] = lambda_k^t phi_k(i) and diffusion distances. Also provides
// distribution propagation and the unnormalized graph Laplacian used by the
// smoothness regularizer.

#include "flowartist/kernel.hpp"

#include <iostream>

namespace flowartist {

enum class OperatorKind { directed, symmetrized };

struct DiffusionOperator {
  Matrix P;
  OperatorKind kind = OperatorKind::directed;

  Index size() const { return P.rows(); }
};

struct DiffusionMapResult {
  Vector eigenvalues;  // descending algebraic order
  Matrix eigenvectors; // N x m, orthonormal columns
  int t = 1;
  Matrix coords;       // N x m, coords(i, k) = eigenvalues[k]^t * eigenvectors(i, k)
};

struct LaplacianMatrix {
  Matrix L;
};

/// P_d = D^-1 A. Rows of A whose sums have underflowed to (near) zero are
/// replaced by a one-hot row pointing at the Euclidean nearest neighbor; the
/// kernel value is positive in exact arithmetic, so such rows are purely a
/// floating-point artifact.
inline DiffusionOperator row_normalize(const AffinityMatrix& a, const FlowDataset& ds) {
  const Index n = a.size();
  require(n >= 2, "row_normalize: needs at least 2 points");
  require(ds.size() == n, "row_normalize: dataset size must match affinity matrix");
  DiffusionOperator op;
  op.kind = OperatorKind::directed;
  op.P = a.weights;
  for (Index i = 0; i < n; ++i) {
    double row_sum = op.P.row(i).sum();
    if (row_sum < 1e-300) {
      Index nearest = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d2 = (ds.positions.row(j) - ds.positions.row(i)).squaredNorm();
        if (d2 < best) {
          best = d2;
          nearest = j;
        }
      }
      std::cerr << "row_normalize: row " << i
                << " underflowed, using one-hot to nearest neighbor " << nearest << "\n";
      op.P.row(i).setZero();
      op.P(i, nearest) = 1.0;
      row_sum = 1.0;
    }
    if (!(row_sum > 0.0) || !std::isfinite(row_sum)) {
      throw std::invalid_argument("row_normalize: row " + std::to_string(i) +
                                  " has invalid sum after fallback");
    }
    op.P.row(i) /= row_sum;
  }
  return op;
}

inline DiffusionOperator symmetrize(const DiffusionOperator& pd) {
  require(pd.kind == OperatorKind::directed, "symmetrize: expects the directed operator");
  DiffusionOperator out;
  out.kind = OperatorKind::symmetrized;
  out.P = 0.5 * (pd.P + pd.P.transpose());
  return out;
}

/// Top-m eigenpairs of a symmetric matrix, descending by algebraic value.
/// Each eigenvector is flipped so its first component of noticeable magnitude
/// is positive, which pins the sign that eigensolvers leave free.
inline std::pair<Vector, Matrix> symmetric_eigendecomposition(const Matrix& s, Index m) {
  const Index n = s.rows();
  require(n >= 1 && s.cols() == n, "symmetric_eigendecomposition: square input required");
  require(m >= 1 && m <= n, "symmetric_eigendecomposition: m must be in [1, N]");
  require((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
          "symmetric_eigendecomposition: input is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (s + s.transpose()));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric_eigendecomposition: solver failed to converge");
  }
  Vector values(m);
  Matrix vectors(n, m);
  for (Index k = 0; k < m; ++k) {
    // Eigen returns ascending order; take from the top.
    const Index src = n - 1 - k;
    values[k] = solver.eigenvalues()[src];
    Vector phi = solver.eigenvectors().col(src);
    for (Index i = 0; i < n; ++i) {
      if (std::abs(phi[i]) > 1e-12) {
        if (phi[i] < 0.0) phi = -phi;
        break;
      }
    }
    vectors.col(k) = phi;
    const double residual = (s * phi - values[k] * phi).norm();
    if (residual > 1e-8) {
      throw std::runtime_error("symmetric_eigendecomposition: residual " +
                               std::to_string(residual) + " above 1e-8 for pair " +
                               std::to_string(k));
    }
  }
  return {std::move(values), std::move(vectors)};
}

inline Matrix diffusion_coordinates(const Vector& eigenvalues, const Matrix& eigenvectors,
                                    int t) {
  require(t >= 1, "diffusion_coordinates: t must be a positive integer");
  require(eigenvectors.cols() == eigenvalues.size(),
          "diffusion_coordinates: eigenpair count mismatch");
  Matrix coords = eigenvectors;
  for (Index k = 0; k < eigenvalues.size(); ++k) {
    coords.col(k) *= ipow(eigenvalues[k], t);
  }
  return coords;
}

inline DiffusionMapResult diffusion_map(const DiffusionOperator& psd, Index m, int t) {
  require(psd.kind == OperatorKind::symmetrized, "diffusion_map: expects symmetrized operator");
  DiffusionMapResult result;
  std::tie(result.eigenvalues, result.eigenvectors) =
      symmetric_eigendecomposition(psd.P, m);
  result.t = t;
  result.coords = diffusion_coordinates(result.eigenvalues, result.eigenvectors, t);
  return result;
}

inline Matrix diffusion_distance_matrix(const Matrix& coords) {
  require(coords.rows() >= 1 && coords.cols() >= 1,
          "diffusion_distance_matrix: coords must be nonempty");
  const Index n = coords.rows();
  Matrix d(n, n);
  d.setZero();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double dist = (coords.row(i) - coords.row(j)).norm();
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return d;
}

/// e_start^T P^t: the distribution after t steps of the chain started at one
/// point.
inline Vector propagate(const DiffusionOperator& op, Index start, int t) {
  require(op.kind == OperatorKind::directed, "propagate: expects the directed operator");
  const Index n = op.size();
  require(start >= 0 && start < n, "propagate: start index out of range");
  require(t >= 0, "propagate: t must be nonnegative");
  Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(n);
  mu[start] = 1.0;
  for (int step = 0; step < t; ++step) mu = mu * op.P;
  return mu.transpose();
}

/// Unnormalized Laplacian L = D_s - W with W the symmetric Gaussian affinity
/// on positions (zero diagonal). Positive semidefinite with L * 1 = 0.
inline LaplacianMatrix graph_laplacian(const FlowDataset& ds, double sigma) {
  ds.validate();
  require(sigma > 0.0 && std::isfinite(sigma), "graph_laplacian: sigma must be positive");
  const Index n = ds.size();
  require(n >= 2, "graph_laplacian: needs at least 2 points");
  Matrix w(n, n);
  w.setZero();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d2 = (ds.positions.row(i) - ds.positions.row(j)).squaredNorm();
      const double value = std::exp(-d2 / sigma);
      w(i, j) = value;
      w(j, i) = value;
    }
  }
  LaplacianMatrix lap;
  lap.L = Matrix(w.rowwise().sum().asDiagonal()) - w;
  return lap;
}

}  // namespace flowartist
