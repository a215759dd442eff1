#pragma once

// Quantitative checks on a trained embedding: stress against diffusion
// distances, agreement between the learned field and embedded neighbor
// displacements, label separability probes, diffusion entropy comparison,
// and a PCA baseline.

#include "flowartist/trainer.hpp"

#include <map>
#include <optional>
#include <set>

namespace flowartist {

struct EntropyPair {
  double directed = 0.0;
  double symmetric = 0.0;
};

struct MetricReport {
  double stress = 0.0;
  double flow_cosine = 0.0;
  Index flow_cosine_excluded = 0;
  std::optional<double> strand_accuracy_plain;
  std::optional<double> strand_accuracy_velocity;
  std::map<int, EntropyPair> diffusion_entropies;
};

inline double shannon_entropy(const Vector& p) {
  double h = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

/// Stress (mean squared deviation between embedded and target distances over
/// all pairs) and flow_cosine (mean cosine between psi at each point and the
/// mean embedded displacement toward its flow neighbors). Points where either
/// vector has vanishing norm are excluded and counted.
inline MetricReport evaluate_metrics(const EmbeddingResult& result, const Matrix& d_manifold,
                                     const FlowNeighborhoods& hoods) {
  const Index n = result.embeddings.rows();
  require(d_manifold.rows() == n && static_cast<Index>(hoods.neighbors.size()) == n,
          "evaluate_metrics: inputs must cover the same dataset");
  require(hoods.k >= result.config.k, "evaluate_metrics: neighborhoods smaller than config.k");
  MetricReport report;
  report.stress = distance_loss(result.embeddings, d_manifold).value;

  double cosine_sum = 0.0;
  Index included = 0;
  for (Index i = 0; i < n; ++i) {
    const auto& hood = hoods.neighbors[static_cast<std::size_t>(i)];
    Vector2 mean_disp = Vector2::Zero();
    for (Index j = 0; j < result.config.k; ++j) {
      mean_disp += (result.embeddings.row(hood[static_cast<std::size_t>(j)]) -
                    result.embeddings.row(i))
                       .transpose();
    }
    mean_disp /= static_cast<double>(result.config.k);
    const Vector2 psi = result.field_at_points.row(i).transpose();
    const double np = psi.norm();
    const double nd = mean_disp.norm();
    if (np < 1e-12 || nd < 1e-12) {
      ++report.flow_cosine_excluded;
      continue;
    }
    cosine_sum += psi.dot(mean_disp) / (np * nd);
    ++included;
  }
  if (included == 0) {
    throw std::runtime_error("evaluate_metrics: degenerate field, all points excluded");
  }
  report.flow_cosine = cosine_sum / static_cast<double>(included);
  return report;
}

namespace detail {

/// Column-wise standardization to zero mean, unit variance; constant columns
/// are left at zero rather than divided by a vanishing scale.
inline Matrix standardize_columns(const Matrix& m) {
  Matrix out = m;
  for (Index j = 0; j < m.cols(); ++j) {
    const double mean = m.col(j).mean();
    out.col(j).array() -= mean;
    const double sd = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(m.rows()));
    if (sd < 1e-12) {
      out.col(j).setZero();
    } else {
      out.col(j) /= sd;
    }
  }
  return out;
}

inline double leave_one_out_1nn(const Matrix& features, const std::vector<int>& labels) {
  const Index n = features.rows();
  Index correct = 0;
  for (Index i = 0; i < n; ++i) {
    Index best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d2 = (features.row(i) - features.row(j)).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = j;
      }
    }
    if (labels[static_cast<std::size_t>(best)] == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace detail

/// Leave-one-out 1-nearest-neighbor accuracy with embedding features alone
/// versus embedding plus embedded-velocity features. The embedded velocity of
/// point i is the image of its data velocity under the embedder's
/// differential, so two points that land on top of each other can still carry
/// opposite arrows. Each column is standardized first so the velocity
/// magnitude cannot dominate the metric.
inline std::pair<double, double> strand_separability(const EmbeddingResult& result,
                                                     const std::vector<int>& labels) {
  const Index n = result.embeddings.rows();
  require(static_cast<Index>(labels.size()) == n, "strand_separability: labels must cover dataset");
  require(result.velocity_at_points.rows() == n && result.velocity_at_points.cols() == 2,
          "strand_separability: result lacks embedded velocities");
  std::set<int> classes(labels.begin(), labels.end());
  require(classes.size() == 2, "strand_separability: expects exactly two classes");

  const Matrix plain = detail::standardize_columns(result.embeddings);
  Matrix joint(n, 4);
  joint.leftCols(2) = result.embeddings;
  joint.rightCols(2) = result.velocity_at_points;
  const Matrix velocity = detail::standardize_columns(joint);

  return {detail::leave_one_out_1nn(plain, labels),
          detail::leave_one_out_1nn(velocity, labels)};
}

/// Shannon entropies of t-step diffusion from a start point under the
/// flashlight kernel versus the beta=0 symmetric Gaussian kernel.
/// start = -1 picks the point of minimal pseudotime (lowest index on ties),
/// or index 0 when pseudotime is absent.
inline std::map<int, EntropyPair> diffusion_entropy_comparison(const FlowDataset& ds,
                                                               const KernelParams& params,
                                                               const std::vector<int>& t_list,
                                                               Index start = -1) {
  ds.validate();
  if (start < 0) {
    start = 0;
    if (ds.has_pseudotime()) {
      for (Index i = 1; i < ds.size(); ++i) {
        if (ds.pseudotime[i] < ds.pseudotime[start]) start = i;
      }
    }
  }
  require(start < ds.size(), "diffusion_entropy_comparison: start index out of range");

  const DiffusionOperator directed = row_normalize(build_affinity_matrix(ds, params), ds);
  KernelParams gaussian = params;
  gaussian.beta = 0.0;
  const DiffusionOperator symmetric = row_normalize(build_affinity_matrix(ds, gaussian), ds);

  std::map<int, EntropyPair> out;
  for (int t : t_list) {
    EntropyPair pair;
    pair.directed = shannon_entropy(propagate(directed, start, t));
    pair.symmetric = shannon_entropy(propagate(symmetric, start, t));
    out[t] = pair;
  }
  return out;
}

/// Top-2 principal components of centered positions; velocities are mapped
/// through the same linear projection.
inline std::pair<Matrix, Matrix> pca_baseline(const FlowDataset& ds) {
  ds.validate();
  const Index n = ds.size();
  require(n >= 3, "pca_baseline: needs at least 3 points");
  const Eigen::RowVectorXd mean = ds.positions.colwise().mean();
  const Matrix centered = ds.positions.rowwise() - mean;
  const Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
  Vector values;
  Matrix vectors;
  std::tie(values, vectors) = symmetric_eigendecomposition(cov, 2);
  if (values[1] <= 1e-12 * std::max(values[0], 1.0)) {
    throw std::runtime_error("pca_baseline: second principal axis is degenerate");
  }
  return {centered * vectors, ds.velocities * vectors};
}

}  // namespace flowartist
