#pragma once

// The three training objectives and their exact analytic gradients:
// a stress-style distance loss against diffusion distances, the flow neighbor
// loss tying the vector field to embedded displacements, and a Laplacian
// Rayleigh-quotient smoothness penalty on the field.

#include "flowartist/diffusion.hpp"

namespace flowartist {

struct LossValueGrad {
  double value = 0.0;
  Matrix grad;
};

/// Mean over ordered pairs i != j of (||e_i - e_j|| - manifold_d(i,j))^2.
/// At coincident embedded points the distance direction is undefined; the
/// gradient contribution of such a pair is taken as 0.
inline LossValueGrad distance_loss(const Matrix& embedded, const Matrix& manifold_d) {
  const Index b = embedded.rows();
  require(b >= 2, "distance_loss: needs at least 2 points");
  require(manifold_d.rows() == b && manifold_d.cols() == b,
          "distance_loss: manifold distance block must be B x B");
  LossValueGrad out;
  out.grad = Matrix::Zero(b, embedded.cols());
  const double scale = 2.0 / static_cast<double>(b * (b - 1));
  for (Index i = 0; i < b; ++i) {
    for (Index j = i + 1; j < b; ++j) {
      const Vector diff = (embedded.row(i) - embedded.row(j)).transpose();
      const double dist = diff.norm();
      const double residual = dist - manifold_d(i, j);
      out.value += scale * residual * residual;
      if (dist >= 1e-12) {
        const Vector g = (scale * 2.0 * residual / dist) * diff;
        out.grad.row(i) += g.transpose();
        out.grad.row(j) -= g.transpose();
      }
    }
  }
  return out;
}

struct FlowLossResult {
  double value = 0.0;
  Vector2 grad_center = Vector2::Zero();
  Matrix grad_neighbors;  // k x 2
  Vector2 grad_psi = Vector2::Zero();
};

/// Sum over neighbors of ||(xi(x_j) - xi(x_i)) - psi||^2, with psi evaluated
/// at the embedded center.
inline FlowLossResult flow_neighbor_loss(const Vector2& center_embed,
                                         const Matrix& neighbor_embeds,
                                         const Vector2& psi_at_center) {
  const Index k = neighbor_embeds.rows();
  require(k >= 1, "flow_neighbor_loss: needs at least one neighbor");
  require(neighbor_embeds.cols() == 2, "flow_neighbor_loss: embeddings must be 2-d");
  FlowLossResult out;
  out.grad_neighbors = Matrix::Zero(k, 2);
  for (Index j = 0; j < k; ++j) {
    const Vector2 residual =
        neighbor_embeds.row(j).transpose() - center_embed - psi_at_center;
    out.value += residual.squaredNorm();
    out.grad_neighbors.row(j) = 2.0 * residual.transpose();
    out.grad_center -= 2.0 * residual;
    out.grad_psi -= 2.0 * residual;
  }
  return out;
}

/// Sum over the 2 field coordinates c of the Rayleigh quotient
/// (f_c^T L f_c) / (f_c^T f_c). Scale invariant in the field; columns with
/// norm below 1e-12 contribute zero.
inline LossValueGrad laplacian_smoothness(const Matrix& field_at_points,
                                          const LaplacianMatrix& lap) {
  const Index n = field_at_points.rows();
  require(lap.L.rows() == n && lap.L.cols() == n,
          "laplacian_smoothness: Laplacian size must match field");
  require(field_at_points.cols() == 2, "laplacian_smoothness: field must be N x 2");
  LossValueGrad out;
  out.grad = Matrix::Zero(n, 2);
  for (Index c = 0; c < 2; ++c) {
    const Vector f = field_at_points.col(c);
    const double denom = f.squaredNorm();
    if (std::sqrt(denom) < 1e-12) continue;
    const Vector lf = lap.L * f;
    const double quotient = f.dot(lf) / denom;
    out.value += quotient;
    out.grad.col(c) = (2.0 / denom) * (lf - quotient * f);
  }
  return out;
}

}  // namespace flowartist
