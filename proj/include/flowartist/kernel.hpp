#pragma once

// Flashlight kernel: an asymmetric affinity that rewards displacement aligned
// with the source point's velocity,
//
//   K(p_i, p_j) = exp(-[ d^2 + beta * (||v_i|| - <v_i, u>) ] / sigma),
//
// with d = ||x_j - x_i|| and u the unit displacement from x_i to x_j. With
// beta = 0 it reduces to the usual Gaussian kernel.

#include "flowartist/dataset.hpp"

#include <algorithm>
#include <numeric>

namespace flowartist {

struct KernelParams {
  double sigma = 1.0;
  double beta = 1.0;
  double epsilon_pos = 1e-12;

  void validate() const {
    require(sigma > 0.0 && std::isfinite(sigma), "KernelParams: sigma must be positive");
    require(beta >= 0.0 && std::isfinite(beta), "KernelParams: beta must be nonnegative");
    require(epsilon_pos > 0.0, "KernelParams: epsilon_pos must be positive");
  }
};

struct AffinityMatrix {
  Matrix weights;  // N x N, zero diagonal, generally asymmetric
  KernelParams params;

  Index size() const { return weights.rows(); }
};

struct FlowNeighborhoods {
  Index k = 0;
  std::vector<std::vector<Index>> neighbors;  // descending affinity per point
};

inline double flashlight_affinity(const VelocityPoint& pi, const VelocityPoint& pj,
                                  const KernelParams& params) {
  params.validate();
  require(pi.x.size() == pj.x.size() && pi.v.size() == pi.x.size(),
          "flashlight_affinity: dimension mismatch");
  require(pi.x.allFinite() && pi.v.allFinite() && pj.x.allFinite(),
          "flashlight_affinity: non-finite input");
  const Vector delta = pj.x - pi.x;
  const double d2 = delta.squaredNorm();
  const double d = std::sqrt(d2);
  const double v_norm = pi.v.norm();
  double bracket;
  if (d <= params.epsilon_pos) {
    // Coincident points: no defined direction, so the inner-product term is
    // dropped and only the velocity magnitude is penalized.
    bracket = params.beta * v_norm;
  } else {
    double flow = v_norm - pi.v.dot(delta) / d;
    if (flow < 0.0) flow = 0.0;  // Cauchy-Schwarz guarantees >= 0 up to roundoff
    bracket = d2 + params.beta * flow;
  }
  return std::exp(-bracket / params.sigma);
}

inline AffinityMatrix build_affinity_matrix(const FlowDataset& ds, const KernelParams& params) {
  ds.validate();
  params.validate();
  const Index n = ds.size();
  AffinityMatrix result;
  result.params = params;
  result.weights.setZero(n, n);
  for (Index i = 0; i < n; ++i) {
    const VelocityPoint pi = ds.point(i);
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      result.weights(i, j) = flashlight_affinity(pi, ds.point(j), params);
    }
  }
  return result;
}

/// Per point, the k columns with largest affinity, in descending order; ties
/// broken toward the lower index so results are reproducible.
inline FlowNeighborhoods flow_neighborhoods(const AffinityMatrix& a, Index k) {
  const Index n = a.size();
  require(k >= 1 && k <= n - 1, "flow_neighborhoods: k must be in [1, N-1]");
  FlowNeighborhoods out;
  out.k = k;
  out.neighbors.resize(static_cast<std::size_t>(n));
  std::vector<Index> candidates(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    Index c = 0;
    for (Index j = 0; j < n; ++j)
      if (j != i) candidates[static_cast<std::size_t>(c++)] = j;
    auto better = [&](Index lhs, Index rhs) {
      const double wl = a.weights(i, lhs);
      const double wr = a.weights(i, rhs);
      if (wl != wr) return wl > wr;
      return lhs < rhs;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end(), better);
    out.neighbors[static_cast<std::size_t>(i)].assign(candidates.begin(), candidates.begin() + k);
  }
  return out;
}

/// Median over points of the squared distance to the k-th nearest Euclidean
/// neighbor. A reproducible bandwidth default for datasets at different scales.
inline double median_heuristic_sigma(const FlowDataset& ds, Index k) {
  ds.validate();
  const Index n = ds.size();
  require(k >= 1 && k < n, "median_heuristic_sigma: requires N > k >= 1");
  std::vector<double> kth(static_cast<std::size_t>(n));
  std::vector<double> d2(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    Index c = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      d2[static_cast<std::size_t>(c++)] = (ds.positions.row(j) - ds.positions.row(i)).squaredNorm();
    }
    std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
    kth[static_cast<std::size_t>(i)] = d2[static_cast<std::size_t>(k - 1)];
  }
  std::sort(kth.begin(), kth.end());
  const std::size_t mid = kth.size() / 2;
  const double median =
      kth.size() % 2 == 1 ? kth[mid] : 0.5 * (kth[mid - 1] + kth[mid]);
  require(median > 0.0, "median_heuristic_sigma: degenerate dataset (coincident points)");
  return median;
}

}  // namespace flowartist
