#pragma once

// Convenience composition of the full pipeline: affinity graph, flow
// neighborhoods, diffusion geometry, and training.

#include "flowartist/trainer.hpp"

namespace flowartist {

struct GraphBundle {
  AffinityMatrix affinity;
  FlowNeighborhoods neighborhoods;
  DiffusionOperator directed;
  DiffusionMapResult map;
  Matrix d_manifold;
};

inline GraphBundle build_graph_bundle(const FlowDataset& ds, const KernelParams& params,
                                      Index k, Index m, int t) {
  GraphBundle bundle;
  bundle.affinity = build_affinity_matrix(ds, params);
  bundle.neighborhoods = flow_neighborhoods(bundle.affinity, k);
  bundle.directed = row_normalize(bundle.affinity, ds);
  bundle.map = diffusion_map(symmetrize(bundle.directed), std::min(m, ds.size()), t);
  bundle.d_manifold = diffusion_distance_matrix(bundle.map.coords);
  return bundle;
}

inline EmbeddingResult run_pipeline(const FlowDataset& ds, const KernelParams& params,
                                    const TrainerConfig& config) {
  const GraphBundle bundle =
      build_graph_bundle(ds, params, config.k, config.m, config.t);
  return train(ds, bundle.affinity, bundle.neighborhoods, bundle.d_manifold, config);
}

}  // namespace flowartist
