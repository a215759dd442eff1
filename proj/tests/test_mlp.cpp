#include "flowartist/mlp.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace flowartist;

namespace {

Index param_count(const MLP& mlp) {
  Index total = 0;
  for (Index l = 0; l < mlp.n_layers(); ++l) {
    const auto lu = static_cast<std::size_t>(l);
    total += mlp.weights[lu].size() + mlp.biases[lu].size();
  }
  return total;
}

Vector pack_params(const MLP& mlp) {
  Vector packed(param_count(mlp));
  Index at = 0;
  for (Index l = 0; l < mlp.n_layers(); ++l) {
    const auto lu = static_cast<std::size_t>(l);
    for (Index r = 0; r < mlp.weights[lu].rows(); ++r)
      for (Index c = 0; c < mlp.weights[lu].cols(); ++c) packed[at++] = mlp.weights[lu](r, c);
    for (Index r = 0; r < mlp.biases[lu].size(); ++r) packed[at++] = mlp.biases[lu][r];
  }
  return packed;
}

void unpack_params(MLP& mlp, const Vector& packed) {
  Index at = 0;
  for (Index l = 0; l < mlp.n_layers(); ++l) {
    const auto lu = static_cast<std::size_t>(l);
    for (Index r = 0; r < mlp.weights[lu].rows(); ++r)
      for (Index c = 0; c < mlp.weights[lu].cols(); ++c) mlp.weights[lu](r, c) = packed[at++];
    for (Index r = 0; r < mlp.biases[lu].size(); ++r) mlp.biases[lu][r] = packed[at++];
  }
}

Vector pack_grads(const MLPGradients& g) {
  Index total = 0;
  for (std::size_t l = 0; l < g.weights.size(); ++l)
    total += g.weights[l].size() + g.biases[l].size();
  Vector packed(total);
  Index at = 0;
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    for (Index r = 0; r < g.weights[l].rows(); ++r)
      for (Index c = 0; c < g.weights[l].cols(); ++c) packed[at++] = g.weights[l](r, c);
    for (Index r = 0; r < g.biases[l].size(); ++r) packed[at++] = g.biases[l][r];
  }
  return packed;
}

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("initialization respects fan-in bounds and the seed", "[mlp]") {
  MLPSpec spec;
  spec.layer_sizes = {3, 2};
  spec.seed = 17;
  const MLP mlp = init_mlp(spec);
  REQUIRE(mlp.n_layers() == 1);
  REQUIRE(mlp.weights[0].rows() == 2);
  REQUIRE(mlp.weights[0].cols() == 3);
  REQUIRE(mlp.weights[0].cwiseAbs().maxCoeff() <= 1.0);  // sqrt(3/3)
  REQUIRE(mlp.weights[0].cwiseAbs().minCoeff() > 0.0);
  REQUIRE(mlp.biases[0].cwiseAbs().maxCoeff() == 0.0);

  const MLP again = init_mlp(spec);
  REQUIRE(again.weights[0] == mlp.weights[0]);
  spec.seed = 18;
  REQUIRE(init_mlp(spec).weights[0] != mlp.weights[0]);

  MLPSpec wide;
  wide.layer_sizes = {12, 4};
  const MLP wide_mlp = init_mlp(wide);
  REQUIRE(wide_mlp.weights[0].cwiseAbs().maxCoeff() <= std::sqrt(3.0 / 12.0));
}

TEST_CASE("forward pass matches hand computation", "[mlp]") {
  MLPSpec spec;
  spec.layer_sizes = {2, 2};
  MLP mlp = init_mlp(spec);
  mlp.weights[0] = Matrix::Identity(2, 2);
  mlp.biases[0] = Vector::Zero(2);
  Matrix batch(2, 2);
  batch << 1.5, -2.0, 0.0, 3.25;
  REQUIRE(apply(mlp, batch) == batch);

  mlp.biases[0] << 0.5, -1.0;
  Matrix shifted = apply(mlp, batch);
  REQUIRE(shifted(0, 0) == 2.0);
  REQUIRE(shifted(0, 1) == -3.0);

  // One hidden unit: x -> leaky(x) -> identity out.
  MLPSpec deep;
  deep.layer_sizes = {1, 1, 1};
  MLP chain = init_mlp(deep);
  chain.weights[0](0, 0) = 1.0;
  chain.weights[1](0, 0) = 1.0;
  chain.biases[0][0] = 0.0;
  chain.biases[1][0] = 0.0;
  Matrix neg(1, 1), pos(1, 1);
  neg << -1.0;
  pos << 2.0;
  REQUIRE(apply(chain, neg)(0, 0) == Catch::Approx(-0.01));
  REQUIRE(apply(chain, pos)(0, 0) == 2.0);
}

TEST_CASE("single linear layer has closed-form gradients", "[mlp]") {
  MLPSpec spec;
  spec.layer_sizes = {3, 2};
  spec.seed = 4;
  const MLP mlp = init_mlp(spec);
  Matrix x(1, 3);
  x << 0.5, -1.0, 2.0;
  const ForwardCache cache = forward(mlp, x);
  Matrix g(1, 2);
  g << 1.0, -2.0;
  const MLPGradients grads = backward(mlp, cache, g);
  REQUIRE((grads.weights[0] - g.transpose() * x).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((grads.biases[0] - g.row(0).transpose()).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((grads.input - g * mlp.weights[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward matches finite differences through hidden layers", "[mlp]") {
  MLPSpec spec;
  spec.layer_sizes = {3, 5, 2};
  spec.seed = 21;
  MLP mlp = init_mlp(spec);
  const Matrix batch = random_matrix(4, 3, 91);
  const Matrix target = random_matrix(4, 2, 92);

  const auto loss_at = [&](const MLP& net) {
    const Matrix out = apply(net, batch);
    return (out - target).squaredNorm();
  };

  const ForwardCache cache = forward(mlp, batch);
  const Matrix upstream = 2.0 * (cache.output - target);
  const MLPGradients grads = backward(mlp, cache, upstream);

  const Vector analytic = pack_grads(grads);
  MLP probe = mlp;
  const Vector numeric = oracles::fd_gradient(
      [&](const Vector& p) {
        unpack_params(probe, p);
        return loss_at(probe);
      },
      pack_params(mlp));
  REQUIRE(oracles::max_rel_error(analytic, numeric) <= 1e-4);

  // Gradient with respect to the input batch, same loss.
  Vector flat_input(batch.size());
  for (Index i = 0; i < batch.rows(); ++i)
    for (Index j = 0; j < batch.cols(); ++j) flat_input[i * batch.cols() + j] = batch(i, j);
  const Vector numeric_input = oracles::fd_gradient(
      [&](const Vector& p) {
        Matrix b(batch.rows(), batch.cols());
        for (Index i = 0; i < b.rows(); ++i)
          for (Index j = 0; j < b.cols(); ++j) b(i, j) = p[i * b.cols() + j];
        return (apply(mlp, b) - target).squaredNorm();
      },
      flat_input);
  Vector analytic_input(batch.size());
  for (Index i = 0; i < batch.rows(); ++i)
    for (Index j = 0; j < batch.cols(); ++j)
      analytic_input[i * batch.cols() + j] = grads.input(i, j);
  REQUIRE(oracles::max_rel_error(analytic_input, numeric_input) <= 1e-4);
}

TEST_CASE("zero upstream gradient produces zero parameter gradients", "[mlp]") {
  MLPSpec spec;
  spec.layer_sizes = {2, 4, 2};
  spec.seed = 3;
  const MLP mlp = init_mlp(spec);
  const Matrix batch = random_matrix(3, 2, 8);
  const ForwardCache cache = forward(mlp, batch);
  const MLPGradients grads = backward(mlp, cache, Matrix::Zero(3, 2));
  REQUIRE(pack_grads(grads).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(grads.input.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("first adam step moves each parameter by about lr", "[mlp]") {
  MLPSpec spec;
  spec.layer_sizes = {1, 1};
  MLP mlp = init_mlp(spec);
  mlp.weights[0](0, 0) = 0.7;
  mlp.biases[0][0] = -0.3;
  AdamState state = init_adam(mlp, 1e-3);
  MLPGradients grads = zero_gradients(mlp);
  grads.weights[0](0, 0) = 0.5;
  grads.biases[0][0] = -2.0;
  adam_step(mlp, grads, state);
  REQUIRE(state.step == 1);
  REQUIRE(mlp.weights[0](0, 0) == Catch::Approx(0.7 - 1e-3).epsilon(1e-6));
  REQUIRE(mlp.biases[0][0] == Catch::Approx(-0.3 + 1e-3).epsilon(1e-6));
}

TEST_CASE("adam leaves parameters alone under zero gradients", "[mlp]") {
  MLPSpec spec;
  spec.layer_sizes = {2, 3, 2};
  spec.seed = 10;
  MLP mlp = init_mlp(spec);
  const MLP before = mlp;
  AdamState state = init_adam(mlp, 0.1);
  adam_step(mlp, zero_gradients(mlp), state);
  adam_step(mlp, zero_gradients(mlp), state);
  for (Index l = 0; l < mlp.n_layers(); ++l) {
    const auto lu = static_cast<std::size_t>(l);
    REQUIRE(mlp.weights[lu] == before.weights[lu]);
    REQUIRE(mlp.biases[lu] == before.biases[lu]);
  }
}

TEST_CASE("training updates are bit-for-bit deterministic", "[mlp]") {
  const auto run = [] {
    MLPSpec spec;
    spec.layer_sizes = {2, 6, 2};
    spec.seed = 44;
    MLP mlp = init_mlp(spec);
    AdamState state = init_adam(mlp, 1e-2);
    const Matrix batch = random_matrix(5, 2, 13);
    const Matrix target = random_matrix(5, 2, 14);
    for (int step = 0; step < 20; ++step) {
      const ForwardCache cache = forward(mlp, batch);
      const MLPGradients grads = backward(mlp, cache, 2.0 * (cache.output - target));
      adam_step(mlp, grads, state);
    }
    return apply(mlp, batch);
  };
  REQUIRE(run() == run());
}

TEST_CASE("shape and specification errors are rejected", "[mlp]") {
  MLPSpec spec;
  spec.layer_sizes = {2, 3, 2};
  const MLP mlp = init_mlp(spec);
  REQUIRE_THROWS_AS(apply(mlp, Matrix::Zero(1, 3)), std::invalid_argument);

  const ForwardCache cache = forward(mlp, Matrix::Zero(2, 2));
  REQUIRE_THROWS_AS(backward(mlp, cache, Matrix::Zero(2, 3)), std::invalid_argument);

  MLPSpec deep;
  deep.layer_sizes = std::vector<Index>(12, 4);  // 11 affine layers
  REQUIRE_THROWS_AS(init_mlp(deep), std::invalid_argument);

  MLPSpec degenerate;
  degenerate.layer_sizes = {2};
  REQUIRE_THROWS_AS(init_mlp(degenerate), std::invalid_argument);

  MLPSpec bad_slope;
  bad_slope.layer_sizes = {2, 2};
  bad_slope.leaky_slope = 0.0;
  REQUIRE_THROWS_AS(init_mlp(bad_slope), std::invalid_argument);

  Matrix nan_batch = Matrix::Zero(1, 2);
  nan_batch(0, 0) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(apply(mlp, nan_batch), std::invalid_argument);
}

TEST_CASE("apply_one returns the embedded point", "[mlp]") {
  MLPSpec spec;
  spec.layer_sizes = {3, 4, 2};
  spec.seed = 6;
  const MLP mlp = init_mlp(spec);
  Vector x(3);
  x << 0.1, 0.2, 0.3;
  const Vector2 y = apply_one(mlp, x);
  const Matrix full = apply(mlp, x.transpose());
  REQUIRE(y[0] == full(0, 0));
  REQUIRE(y[1] == full(0, 1));
}

TEST_CASE("pushforward matches directional finite differences", "[mlp]") {
  MLPSpec spec;
  spec.layer_sizes = {3, 8, 6, 2};
  spec.seed = 31;
  const MLP mlp = init_mlp(spec);
  const Matrix points = random_matrix(12, 3, 401);
  const Matrix tangents = random_matrix(12, 3, 402);

  const Matrix jvp = pushforward(mlp, points, tangents);
  REQUIRE(jvp.rows() == 12);
  REQUIRE(jvp.cols() == 2);

  const double h = 1e-6;
  const Matrix numeric =
      (apply(mlp, points + h * tangents) - apply(mlp, points - h * tangents)) /
      (2.0 * h);
  for (Index i = 0; i < jvp.rows(); ++i) {
    const Vector a = jvp.row(i).transpose();
    const Vector b = numeric.row(i).transpose();
    REQUIRE(oracles::max_rel_error(a, b) <= 1e-4);
  }
}

TEST_CASE("pushforward of a linear network is exact", "[mlp]") {
  // With one affine layer the differential is the weight matrix itself, so
  // the pushforward must equal tangents * W^T with no approximation.
  MLPSpec spec;
  spec.layer_sizes = {4, 2};
  spec.seed = 15;
  const MLP mlp = init_mlp(spec);
  const Matrix points = random_matrix(7, 4, 403);
  const Matrix tangents = random_matrix(7, 4, 404);
  const Matrix jvp = pushforward(mlp, points, tangents);
  const Matrix expected = tangents * mlp.weights[0].transpose();
  REQUIRE((jvp - expected).cwiseAbs().maxCoeff() == 0.0);

  // Scaling the input tangent scales the output linearly even through hidden
  // layers, because the linearization is evaluated at the same base points.
  MLPSpec deep;
  deep.layer_sizes = {4, 5, 2};
  deep.seed = 16;
  const MLP net = init_mlp(deep);
  const Matrix once = pushforward(net, points, tangents);
  const Matrix thrice = pushforward(net, points, Matrix(3.0 * tangents));
  REQUIRE((thrice - 3.0 * once).cwiseAbs().maxCoeff() <= 1e-12);

  REQUIRE_THROWS_AS(pushforward(net, points, random_matrix(6, 4, 405)),
                    std::invalid_argument);
}
