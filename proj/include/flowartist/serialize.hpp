#pragma once

// JSON serialization: MLP checkpoints, trainer/kernel configuration, result
// sidecars, and metric reports. nlohmann::json prints doubles with a
// round-trip-exact shortest representation, so save/load cycles are bit-exact.

#include "flowartist/metrics.hpp"
#include "flowartist/svg.hpp"

#include <json.hpp>

#include <filesystem>

namespace flowartist {

using Json = nlohmann::json;

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j) {
  require(j.is_array() && !j.empty(), "matrix_from_json: expected a nonempty array");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j.at(static_cast<std::size_t>(i));
    require(static_cast<Index>(row.size()) == cols, "matrix_from_json: ragged rows");
    for (Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

inline Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Vector vector_from_json(const Json& j) {
  require(j.is_array(), "vector_from_json: expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

inline Json kernel_params_to_json(const KernelParams& p) {
  return Json{{"sigma", p.sigma}, {"beta", p.beta}, {"epsilon_pos", p.epsilon_pos}};
}

inline KernelParams kernel_params_from_json(const Json& j) {
  KernelParams p;
  p.sigma = j.at("sigma").get<double>();
  p.beta = j.at("beta").get<double>();
  p.epsilon_pos = j.at("epsilon_pos").get<double>();
  p.validate();
  return p;
}

inline Json trainer_config_to_json(const TrainerConfig& c) {
  return Json{{"k", c.k},
              {"n_random", c.n_random},
              {"lr", c.lr},
              {"epochs", c.epochs},
              {"weight_flow", c.weight_flow},
              {"weight_dist", c.weight_dist},
              {"weight_smooth", c.weight_smooth},
              {"t", c.t},
              {"m", c.m},
              {"seed", c.seed},
              {"test_fraction", c.test_fraction},
              {"early_stop", c.early_stop},
              {"early_stop_tol", c.early_stop_tol},
              {"early_stop_patience", c.early_stop_patience},
              {"xi_hidden", c.xi_hidden},
              {"psi_hidden", c.psi_hidden},
              {"leaky_slope", c.leaky_slope}};
}

inline TrainerConfig trainer_config_from_json(const Json& j) {
  TrainerConfig c;
  c.k = j.at("k").get<Index>();
  c.n_random = j.at("n_random").get<Index>();
  c.lr = j.at("lr").get<double>();
  c.epochs = j.at("epochs").get<Index>();
  c.weight_flow = j.at("weight_flow").get<double>();
  c.weight_dist = j.at("weight_dist").get<double>();
  c.weight_smooth = j.at("weight_smooth").get<double>();
  c.t = j.at("t").get<int>();
  c.m = j.at("m").get<Index>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.test_fraction = j.at("test_fraction").get<double>();
  c.early_stop = j.at("early_stop").get<bool>();
  c.early_stop_tol = j.at("early_stop_tol").get<double>();
  c.early_stop_patience = j.at("early_stop_patience").get<Index>();
  c.xi_hidden = j.at("xi_hidden").get<std::vector<Index>>();
  c.psi_hidden = j.at("psi_hidden").get<std::vector<Index>>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.validate();
  return c;
}

inline Json mlp_to_json(const MLP& mlp) {
  mlp.validate();
  Json weights = Json::array();
  Json biases = Json::array();
  for (Index l = 0; l < mlp.n_layers(); ++l) {
    weights.push_back(matrix_to_json(mlp.weights[static_cast<std::size_t>(l)]));
    biases.push_back(vector_to_json(mlp.biases[static_cast<std::size_t>(l)]));
  }
  return Json{{"format", "flowartist-mlp"},
              {"version", 1},
              {"layer_sizes", mlp.spec.layer_sizes},
              {"leaky_slope", mlp.spec.leaky_slope},
              {"seed", mlp.spec.seed},
              {"weights", weights},
              {"biases", biases}};
}

inline MLP mlp_from_json(const Json& j) {
  require(j.at("format").get<std::string>() == "flowartist-mlp",
          "mlp_from_json: not an mlp checkpoint");
  require(j.at("version").get<int>() == 1, "mlp_from_json: unsupported checkpoint version");
  MLP mlp;
  mlp.spec.layer_sizes = j.at("layer_sizes").get<std::vector<Index>>();
  mlp.spec.leaky_slope = j.at("leaky_slope").get<double>();
  mlp.spec.seed = j.at("seed").get<std::uint64_t>();
  for (const Json& w : j.at("weights")) mlp.weights.push_back(matrix_from_json(w));
  for (const Json& b : j.at("biases")) mlp.biases.push_back(vector_from_json(b));
  mlp.validate();
  return mlp;
}

inline void save_json(const Json& j, const std::string& path) {
  write_text(path, j.dump(2) + "\n");
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  Json j;
  in >> j;
  return j;
}

inline Json loss_point_to_json(const LossPoint& p) {
  return Json{{"distance", p.distance}, {"flow", p.flow}, {"smooth", p.smooth}, {"total", p.total}};
}

inline LossPoint loss_point_from_json(const Json& j) {
  LossPoint p;
  p.distance = j.at("distance").get<double>();
  p.flow = j.at("flow").get<double>();
  p.smooth = j.at("smooth").get<double>();
  p.total = j.at("total").get<double>();
  return p;
}

inline Json loss_curve_to_json(const std::vector<LossPoint>& curve) {
  Json distance = Json::array(), flow = Json::array(), smooth = Json::array(),
       total = Json::array();
  for (const LossPoint& p : curve) {
    distance.push_back(p.distance);
    flow.push_back(p.flow);
    smooth.push_back(p.smooth);
    total.push_back(p.total);
  }
  return Json{{"distance", distance}, {"flow", flow}, {"smooth", smooth}, {"total", total}};
}

inline std::vector<LossPoint> loss_curve_from_json(const Json& j) {
  const auto distance = j.at("distance").get<std::vector<double>>();
  const auto flow = j.at("flow").get<std::vector<double>>();
  const auto smooth = j.at("smooth").get<std::vector<double>>();
  const auto total = j.at("total").get<std::vector<double>>();
  require(distance.size() == flow.size() && flow.size() == smooth.size() &&
              smooth.size() == total.size(),
          "loss_curve_from_json: curve length mismatch");
  std::vector<LossPoint> curve(distance.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    curve[i] = LossPoint{distance[i], flow[i], smooth[i], total[i]};
  }
  return curve;
}

/// Embedding table `id,e0,e1,psi0,psi1[,label]`, doubles in %.17g.
inline void save_embedding_csv(const EmbeddingResult& result, const std::vector<int>& labels,
                               const std::string& path) {
  const Index n = result.embeddings.rows();
  require(labels.empty() || static_cast<Index>(labels.size()) == n,
          "save_embedding_csv: label count mismatch");
  std::ostringstream out;
  out << "id,e0,e1,psi0,psi1";
  if (!labels.empty()) out << ",label";
  out << "\n";
  for (Index i = 0; i < n; ++i) {
    out << i << "," << format_double(result.embeddings(i, 0)) << ","
        << format_double(result.embeddings(i, 1)) << ","
        << format_double(result.field_at_points(i, 0)) << ","
        << format_double(result.field_at_points(i, 1));
    if (!labels.empty()) out << "," << labels[static_cast<std::size_t>(i)];
    out << "\n";
  }
  write_text(path, out.str());
}

/// Loads embeddings and field values back from an embedding CSV; fills only
/// the embedding/field members of an EmbeddingResult.
inline EmbeddingResult load_embedding_csv(const std::string& path) {
  const auto [m, header] = load_matrix_csv(path);
  require(header.size() >= 5 && header[0] == "id" && header[1] == "e0" && header[2] == "e1" &&
              header[3] == "psi0" && header[4] == "psi1",
          "load_embedding_csv: unexpected header in " + path);
  EmbeddingResult result;
  result.embeddings = m.middleCols(1, 2);
  result.field_at_points = m.middleCols(3, 2);
  return result;
}

inline Json result_sidecar_to_json(const EmbeddingResult& result,
                                   const KernelParams& kernel) {
  return Json{{"format", "flowartist-result"},
              {"version", 1},
              {"config", trainer_config_to_json(result.config)},
              {"kernel", kernel_params_to_json(kernel)},
              {"initial_train", loss_point_to_json(result.initial_train)},
              {"initial_test", loss_point_to_json(result.initial_test)},
              {"train_curve", loss_curve_to_json(result.train_curve)},
              {"test_curve", loss_curve_to_json(result.test_curve)},
              {"train_indices", result.train_indices},
              {"test_indices", result.test_indices}};
}

inline Json metric_report_to_json(const MetricReport& report) {
  Json j{{"stress", report.stress},
         {"flow_cosine", report.flow_cosine},
         {"flow_cosine_excluded", report.flow_cosine_excluded}};
  if (report.strand_accuracy_plain) j["strand_accuracy_plain"] = *report.strand_accuracy_plain;
  if (report.strand_accuracy_velocity)
    j["strand_accuracy_velocity"] = *report.strand_accuracy_velocity;
  if (!report.diffusion_entropies.empty()) {
    Json entropies = Json::object();
    for (const auto& [t, pair] : report.diffusion_entropies) {
      entropies[std::to_string(t)] =
          Json{{"directed", pair.directed}, {"symmetric", pair.symmetric}};
    }
    j["diffusion_entropies"] = entropies;
  }
  return j;
}

}  // namespace flowartist
