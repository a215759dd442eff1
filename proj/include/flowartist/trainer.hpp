#pragma once

// Joint training of the point embedder xi: R^n -> R^2 and the vector field
// psi: R^2 -> R^2. Each batch holds a center, its flow neighbors, and random
// non-neighbors; the distance loss pulls embedded pair distances toward
// diffusion distances while the flow loss pulls psi at the embedded center
// toward the embedded neighbor displacements.

#include "flowartist/losses.hpp"
#include "flowartist/mlp.hpp"

#include <iostream>

namespace flowartist {

struct TrainerConfig {
  Index k = 10;            // flow neighbors per batch
  Index n_random = 10;     // random non-neighbors per batch
  double lr = 1e-3;
  Index epochs = 100;
  double weight_flow = 1.0;
  double weight_dist = 1.0;
  double weight_smooth = 0.0;
  int t = 1;               // diffusion time for D_manifold
  Index m = 25;            // eigenpairs for diffusion coordinates
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  bool early_stop = false;
  double early_stop_tol = 1e-5;
  Index early_stop_patience = 10;
  std::vector<Index> xi_hidden{64, 64, 64};
  std::vector<Index> psi_hidden{64, 64, 64};
  double leaky_slope = 0.01;

  void validate() const {
    require(k >= 1, "TrainerConfig: k must be >= 1");
    require(n_random >= 0, "TrainerConfig: n_random must be >= 0");
    require(lr > 0.0 && std::isfinite(lr), "TrainerConfig: lr must be positive");
    require(epochs >= 1, "TrainerConfig: epochs must be >= 1");
    require(weight_flow >= 0.0 && weight_dist >= 0.0 && weight_smooth >= 0.0,
            "TrainerConfig: loss weights must be nonnegative");
    require(t >= 1, "TrainerConfig: t must be >= 1");
    require(m >= 1, "TrainerConfig: m must be >= 1");
    require(test_fraction >= 0.0 && test_fraction < 1.0,
            "TrainerConfig: test_fraction must be in [0, 1)");
    require(early_stop_patience >= 1, "TrainerConfig: patience must be >= 1");
  }
};

struct Batch {
  Index center = 0;
  std::vector<Index> neighbor_indices;
  std::vector<Index> random_indices;

  std::vector<Index> all_indices() const {
    std::vector<Index> all;
    all.reserve(1 + neighbor_indices.size() + random_indices.size());
    all.push_back(center);
    all.insert(all.end(), neighbor_indices.begin(), neighbor_indices.end());
    all.insert(all.end(), random_indices.begin(), random_indices.end());
    return all;
  }
};

/// One batch per training center, in shuffled order. Neighbors are the
/// center's strongest config.k flow neighbors; random indices are uniform
/// draws from the remaining points, without replacement.
inline std::vector<Batch> make_batches(const FlowNeighborhoods& hoods,
                                       const TrainerConfig& config,
                                       std::uint64_t epoch_seed,
                                       const std::vector<Index>& centers) {
  const Index n = static_cast<Index>(hoods.neighbors.size());
  require(config.k <= hoods.k, "make_batches: config.k exceeds neighborhood size");
  require(!centers.empty(), "make_batches: empty training set");
  Rng rng(epoch_seed);
  std::vector<Index> order = centers;
  rng.shuffle(order);
  const Index available = n - 1 - config.k;
  const Index n_random = std::min(config.n_random, available);
  if (n_random < config.n_random) {
    std::cerr << "make_batches: only " << n_random << " of " << config.n_random
              << " random non-neighbors available\n";
  }
  std::vector<Batch> batches;
  batches.reserve(order.size());
  for (Index c : order) {
    Batch b;
    b.center = c;
    const auto& hood = hoods.neighbors[static_cast<std::size_t>(c)];
    b.neighbor_indices.assign(hood.begin(), hood.begin() + config.k);
    auto excluded = [&](Index idx) {
      if (idx == c) return true;
      for (Index nb : b.neighbor_indices)
        if (nb == idx) return true;
      for (Index r : b.random_indices)
        if (r == idx) return true;
      return false;
    };
    while (static_cast<Index>(b.random_indices.size()) < n_random) {
      const Index idx = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
      if (!excluded(idx)) b.random_indices.push_back(idx);
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

struct LossPoint {
  double distance = 0.0;
  double flow = 0.0;
  double smooth = 0.0;
  double total = 0.0;
};

struct EmbeddingResult {
  Matrix embeddings;          // N x 2, xi(x_i)
  Matrix field_at_points;     // N x 2, psi(xi(x_i))
  Matrix velocity_at_points;  // N x 2, D xi(x_i) v_i, the embedded velocities
  LossPoint initial_train, initial_test;       // before any update
  std::vector<LossPoint> train_curve, test_curve;  // one entry per epoch run
  TrainerConfig config;
  MLP xi, psi;
  std::vector<Index> train_indices, test_indices;
};

namespace detail {

inline Matrix take_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
  return out;
}

inline Matrix take_block(const Matrix& m, const std::vector<Index>& idx) {
  const auto b = static_cast<Index>(idx.size());
  Matrix out(b, b);
  for (Index i = 0; i < b; ++i)
    for (Index j = 0; j < b; ++j)
      out(i, j) = m(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return out;
}

/// Epoch-level losses over the centers in `subset`: distance over pairs
/// within the subset, flow as a per-center mean, smoothness over the full
/// field (a global property, identical for train and test logs).
inline LossPoint evaluate_losses(const Matrix& all_embeds, const Matrix& all_field,
                                 const FlowNeighborhoods& hoods,
                                 const Matrix& d_manifold, const LaplacianMatrix& lap,
                                 const TrainerConfig& config,
                                 const std::vector<Index>& subset) {
  LossPoint p;
  if (subset.size() >= 2) {
    p.distance = distance_loss(take_rows(all_embeds, subset),
                               take_block(d_manifold, subset)).value;
  }
  if (!subset.empty()) {
    double flow_sum = 0.0;
    std::vector<Index> hood_k;
    for (Index i : subset) {
      const auto& hood = hoods.neighbors[static_cast<std::size_t>(i)];
      hood_k.assign(hood.begin(), hood.begin() + config.k);
      flow_sum += flow_neighbor_loss(all_embeds.row(i).transpose(),
                                     take_rows(all_embeds, hood_k),
                                     all_field.row(i).transpose()).value;
    }
    p.flow = flow_sum / static_cast<double>(subset.size());
  }
  p.smooth = laplacian_smoothness(all_field, lap).value;
  p.total = config.weight_dist * p.distance + config.weight_flow * p.flow +
            config.weight_smooth * p.smooth;
  return p;
}

}  // namespace detail

/// Joint Adam training of xi and psi. The affinity graph, neighborhoods, and
/// D_manifold are full-dataset quantities; the train/test split only controls
/// which centers generate gradient batches. Deterministic given config.seed.
inline EmbeddingResult train(const FlowDataset& ds, const AffinityMatrix& a,
                             const FlowNeighborhoods& hoods, const Matrix& d_manifold,
                             const TrainerConfig& config) {
  ds.validate();
  config.validate();
  const Index n = ds.size();
  require(a.size() == n && static_cast<Index>(hoods.neighbors.size()) == n &&
              d_manifold.rows() == n && d_manifold.cols() == n,
          "train: inputs must cover the same dataset");
  require(config.k <= hoods.k, "train: config.k exceeds neighborhood size");

  EmbeddingResult result;
  result.config = config;
  if (config.test_fraction > 0.0) {
    std::tie(result.train_indices, result.test_indices) =
        train_test_split(ds, config.test_fraction, derive_seed(config.seed, 0));
  } else {
    result.train_indices.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) result.train_indices[static_cast<std::size_t>(i)] = i;
  }
  require(!result.train_indices.empty(), "train: empty training set");

  MLPSpec xi_spec;
  xi_spec.layer_sizes.push_back(ds.dim());
  xi_spec.layer_sizes.insert(xi_spec.layer_sizes.end(), config.xi_hidden.begin(),
                             config.xi_hidden.end());
  xi_spec.layer_sizes.push_back(2);
  xi_spec.leaky_slope = config.leaky_slope;
  xi_spec.seed = derive_seed(config.seed, 1);
  result.xi = init_mlp(xi_spec);

  MLPSpec psi_spec;
  psi_spec.layer_sizes.push_back(2);
  psi_spec.layer_sizes.insert(psi_spec.layer_sizes.end(), config.psi_hidden.begin(),
                              config.psi_hidden.end());
  psi_spec.layer_sizes.push_back(2);
  psi_spec.leaky_slope = config.leaky_slope;
  psi_spec.seed = derive_seed(config.seed, 2);
  result.psi = init_mlp(psi_spec);

  AdamState adam_xi = init_adam(result.xi, config.lr);
  AdamState adam_psi = init_adam(result.psi, config.lr);
  const LaplacianMatrix lap = graph_laplacian(ds, a.params.sigma);

  auto evaluate_pair = [&](LossPoint& train_point, LossPoint& test_point) {
    const Matrix e = apply(result.xi, ds.positions);
    const Matrix f = apply(result.psi, e);
    train_point = detail::evaluate_losses(e, f, hoods, d_manifold, lap, config,
                                          result.train_indices);
    test_point = result.test_indices.empty()
                     ? LossPoint{}
                     : detail::evaluate_losses(e, f, hoods, d_manifold, lap, config,
                                               result.test_indices);
  };

  evaluate_pair(result.initial_train, result.initial_test);

  double prev_total = result.initial_train.total;
  Index stall_count = 0;
  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches = make_batches(hoods, config, derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(epoch)),
                                      result.train_indices);
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Batch& batch = batches[bi];
      const auto indices = batch.all_indices();
      const auto k_used = static_cast<Index>(batch.neighbor_indices.size());

      const Matrix x = detail::take_rows(ds.positions, indices);
      ForwardCache xi_cache = forward(result.xi, x);
      const Matrix& e = xi_cache.output;
      ForwardCache psi_cache = forward(result.psi, e.row(0));
      const Vector2 psi_out = psi_cache.output.row(0).transpose();

      const LossValueGrad dist =
          distance_loss(e, detail::take_block(d_manifold, indices));
      const FlowLossResult flow = flow_neighbor_loss(
          e.row(0).transpose(), e.middleRows(1, k_used), psi_out);

      const double batch_loss =
          config.weight_dist * dist.value + config.weight_flow * flow.value;
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("train: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch " + std::to_string(bi));
      }

      Matrix grad_e = config.weight_dist * dist.grad;
      grad_e.row(0) += config.weight_flow * flow.grad_center.transpose();
      grad_e.middleRows(1, k_used) += config.weight_flow * flow.grad_neighbors;

      const MLPGradients psi_grads = backward(
          result.psi, psi_cache, (config.weight_flow * flow.grad_psi).transpose());
      grad_e.row(0) += psi_grads.input.row(0);

      const MLPGradients xi_grads = backward(result.xi, xi_cache, grad_e);

      adam_step(result.xi, xi_grads, adam_xi);
      adam_step(result.psi, psi_grads, adam_psi);
    }

    if (config.weight_smooth > 0.0) {
      // One full-field smoothness step per epoch; the Rayleigh quotient is a
      // global quantity, so it is not meaningful per batch.
      ForwardCache xi_cache = forward(result.xi, ds.positions);
      ForwardCache psi_cache = forward(result.psi, xi_cache.output);
      const LossValueGrad sm = laplacian_smoothness(psi_cache.output, lap);
      const MLPGradients psi_grads =
          backward(result.psi, psi_cache, config.weight_smooth * sm.grad);
      const MLPGradients xi_grads = backward(result.xi, xi_cache, psi_grads.input);
      adam_step(result.xi, xi_grads, adam_xi);
      adam_step(result.psi, psi_grads, adam_psi);
    }

    LossPoint train_point, test_point;
    evaluate_pair(train_point, test_point);
    result.train_curve.push_back(train_point);
    result.test_curve.push_back(test_point);

    if (config.early_stop) {
      const double improvement =
          (prev_total - train_point.total) / std::max(std::abs(prev_total), 1e-300);
      stall_count = improvement < config.early_stop_tol ? stall_count + 1 : 0;
      prev_total = train_point.total;
      if (stall_count >= config.early_stop_patience) break;
    } else {
      prev_total = train_point.total;
    }
  }

  result.embeddings = apply(result.xi, ds.positions);
  result.field_at_points = apply(result.psi, result.embeddings);
  result.velocity_at_points = pushforward(result.xi, ds.positions, ds.velocities);
  require(result.embeddings.allFinite() && result.field_at_points.allFinite() &&
              result.velocity_at_points.allFinite(),
          "train: non-finite outputs");
  return result;
}

}  // namespace flowartist
