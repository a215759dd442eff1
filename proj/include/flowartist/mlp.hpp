#pragma once

// Small dense feed-forward networks with Leaky ReLU hidden activations, a
// linear final layer, exact reverse-mode gradients, and Adam. Everything is
// 64-bit and deterministic given the seed.

#include "flowartist/core.hpp"

namespace flowartist {

struct MLPSpec {
  std::vector<Index> layer_sizes;  // input, hidden..., output
  double leaky_slope = 0.01;
  std::uint64_t seed = 0;

  Index n_affine_layers() const {
    return static_cast<Index>(layer_sizes.size()) - 1;
  }

  void validate() const {
    require(layer_sizes.size() >= 2, "MLPSpec: needs at least input and output sizes");
    require(n_affine_layers() <= 10, "MLPSpec: at most 10 affine layers");
    for (Index s : layer_sizes) require(s >= 1, "MLPSpec: layer sizes must be positive");
    require(leaky_slope > 0.0 && leaky_slope < 1.0, "MLPSpec: leaky_slope must be in (0,1)");
  }
};

struct MLP {
  MLPSpec spec;
  std::vector<Matrix> weights;  // layer l maps in_l -> out_l, stored out_l x in_l
  std::vector<Vector> biases;

  Index n_layers() const { return static_cast<Index>(weights.size()); }
  Index input_dim() const { return spec.layer_sizes.front(); }
  Index output_dim() const { return spec.layer_sizes.back(); }

  void validate() const {
    spec.validate();
    require(n_layers() == spec.n_affine_layers(), "MLP: layer count mismatch");
    for (Index l = 0; l < n_layers(); ++l) {
      const auto lu = static_cast<std::size_t>(l);
      require(weights[lu].rows() == spec.layer_sizes[lu + 1] &&
                  weights[lu].cols() == spec.layer_sizes[lu] &&
                  biases[lu].size() == spec.layer_sizes[lu + 1],
              "MLP: parameter shape mismatch");
      require(weights[lu].allFinite() && biases[lu].allFinite(),
              "MLP: non-finite parameters");
    }
  }
};

/// Uniform weights in +-sqrt(3 / fan_in) so each pre-activation has unit
/// variance under unit-variance inputs; biases start at zero.
inline MLP init_mlp(const MLPSpec& spec) {
  spec.validate();
  MLP mlp;
  mlp.spec = spec;
  Rng rng(spec.seed);
  for (Index l = 0; l + 1 < static_cast<Index>(spec.layer_sizes.size()); ++l) {
    const Index fan_in = spec.layer_sizes[static_cast<std::size_t>(l)];
    const Index fan_out = spec.layer_sizes[static_cast<std::size_t>(l) + 1];
    const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
    Matrix w(fan_out, fan_in);
    for (Index r = 0; r < fan_out; ++r) {
      for (Index c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    mlp.weights.push_back(std::move(w));
    mlp.biases.push_back(Vector::Zero(fan_out));
  }
  return mlp;
}

struct ForwardCache {
  std::vector<Matrix> layer_inputs;     // input to each affine layer, B x in_l
  std::vector<Matrix> pre_activations;  // hidden layers only, B x out_l
  Matrix output;                        // B x d_out
};

inline Matrix leaky_relu(const Matrix& z, double slope) {
  return z.unaryExpr([slope](double x) { return x >= 0.0 ? x : slope * x; });
}

inline ForwardCache forward(const MLP& mlp, const Matrix& batch) {
  require(batch.cols() == mlp.input_dim(), "forward: input width mismatch");
  require(batch.allFinite(), "forward: non-finite input");
  ForwardCache cache;
  Matrix current = batch;
  const Index last = mlp.n_layers() - 1;
  for (Index l = 0; l <= last; ++l) {
    const auto lu = static_cast<std::size_t>(l);
    cache.layer_inputs.push_back(current);
    Matrix z = (current * mlp.weights[lu].transpose()).rowwise() +
               mlp.biases[lu].transpose();
    if (l < last) {
      cache.pre_activations.push_back(z);
      current = leaky_relu(z, mlp.spec.leaky_slope);
    } else {
      current = std::move(z);
    }
  }
  cache.output = std::move(current);
  return cache;
}

inline Matrix apply(const MLP& mlp, const Matrix& batch) {
  return forward(mlp, batch).output;
}

inline Vector2 apply_one(const MLP& mlp, const Vector& x) {
  Matrix out = apply(mlp, x.transpose());
  require(out.cols() == 2, "apply_one: expects a 2-d output network");
  return out.row(0).transpose();
}

/// Jacobian-vector products: row i of the result is D f(points_i) applied to
/// tangents_i, computed by pushing the tangents through the linearization of
/// each layer. Uses the same subgradient convention as backward (derivative 1
/// at zero pre-activation).
inline Matrix pushforward(const MLP& mlp, const Matrix& points,
                          const Matrix& tangents) {
  require(points.rows() == tangents.rows() && points.cols() == tangents.cols(),
          "pushforward: points/tangents shape mismatch");
  require(points.cols() == mlp.input_dim(), "pushforward: input width mismatch");
  require(points.allFinite() && tangents.allFinite(),
          "pushforward: non-finite input");
  Matrix current = points;
  Matrix tangent = tangents;
  const Index last = mlp.n_layers() - 1;
  const double slope = mlp.spec.leaky_slope;
  for (Index l = 0; l <= last; ++l) {
    const auto lu = static_cast<std::size_t>(l);
    Matrix z = (current * mlp.weights[lu].transpose()).rowwise() +
               mlp.biases[lu].transpose();
    tangent = tangent * mlp.weights[lu].transpose();
    if (l < last) {
      tangent = tangent.cwiseProduct(z.unaryExpr(
          [slope](double x) { return x >= 0.0 ? 1.0 : slope; }));
      current = leaky_relu(z, slope);
    }
  }
  return tangent;
}

struct MLPGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Matrix input;  // gradient wrt the forwarded batch, B x d_in
};

inline MLPGradients zero_gradients(const MLP& mlp) {
  MLPGradients g;
  for (Index l = 0; l < mlp.n_layers(); ++l) {
    const auto lu = static_cast<std::size_t>(l);
    g.weights.push_back(Matrix::Zero(mlp.weights[lu].rows(), mlp.weights[lu].cols()));
    g.biases.push_back(Vector::Zero(mlp.biases[lu].size()));
  }
  return g;
}

inline void accumulate(MLPGradients& into, const MLPGradients& from, double scale = 1.0) {
  require(into.weights.size() == from.weights.size(), "accumulate: layer count mismatch");
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    into.weights[l] += scale * from.weights[l];
    into.biases[l] += scale * from.biases[l];
  }
}

/// Exact reverse-mode gradients of the function computed by the matching
/// forward() call. output_grad is dL/d(output), shape B x d_out.
inline MLPGradients backward(const MLP& mlp, const ForwardCache& cache,
                             const Matrix& output_grad) {
  const Index last = mlp.n_layers() - 1;
  require(static_cast<Index>(cache.layer_inputs.size()) == last + 1,
          "backward: cache does not match network");
  require(output_grad.rows() == cache.output.rows() &&
              output_grad.cols() == mlp.output_dim(),
          "backward: output gradient shape mismatch");
  MLPGradients g;
  g.weights.resize(static_cast<std::size_t>(last) + 1);
  g.biases.resize(static_cast<std::size_t>(last) + 1);
  Matrix grad = output_grad;
  for (Index l = last; l >= 0; --l) {
    const auto lu = static_cast<std::size_t>(l);
    if (l < last) {
      const Matrix& z = cache.pre_activations[lu];
      const double slope = mlp.spec.leaky_slope;
      grad = grad.cwiseProduct(z.unaryExpr(
          [slope](double x) { return x >= 0.0 ? 1.0 : slope; }));
    }
    g.weights[lu] = grad.transpose() * cache.layer_inputs[lu];
    g.biases[lu] = grad.colwise().sum().transpose();
    grad = grad * mlp.weights[lu];
  }
  g.input = std::move(grad);
  return g;
}

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Matrix> m_weights, v_weights;
  std::vector<Vector> m_biases, v_biases;
};

inline AdamState init_adam(const MLP& mlp, double lr) {
  require(lr > 0.0 && std::isfinite(lr), "init_adam: lr must be positive");
  AdamState s;
  s.lr = lr;
  for (Index l = 0; l < mlp.n_layers(); ++l) {
    const auto lu = static_cast<std::size_t>(l);
    s.m_weights.push_back(Matrix::Zero(mlp.weights[lu].rows(), mlp.weights[lu].cols()));
    s.v_weights.push_back(Matrix::Zero(mlp.weights[lu].rows(), mlp.weights[lu].cols()));
    s.m_biases.push_back(Vector::Zero(mlp.biases[lu].size()));
    s.v_biases.push_back(Vector::Zero(mlp.biases[lu].size()));
  }
  return s;
}

inline void adam_step(MLP& mlp, const MLPGradients& grads, AdamState& s) {
  require(grads.weights.size() == static_cast<std::size_t>(mlp.n_layers()),
          "adam_step: gradient layer count mismatch");
  s.step += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    require(param.rows() == grad.rows() && param.cols() == grad.cols(),
            "adam_step: gradient shape mismatch");
    require(grad.allFinite(), "adam_step: non-finite gradient");
    m = s.beta1 * m + (1.0 - s.beta1) * grad;
    v = s.beta2 * v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
    const auto m_hat = (m / bc1).array();
    const auto v_hat = (v / bc2).array();
    param.array() -= s.lr * m_hat / (v_hat.sqrt() + s.eps);
  };
  for (Index l = 0; l < mlp.n_layers(); ++l) {
    const auto lu = static_cast<std::size_t>(l);
    update(mlp.weights[lu], grads.weights[lu], s.m_weights[lu], s.v_weights[lu]);
    update(mlp.biases[lu], grads.biases[lu], s.m_biases[lu], s.v_biases[lu]);
  }
}

}  // namespace flowartist
