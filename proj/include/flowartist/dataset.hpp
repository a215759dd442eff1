#pragma once

// Position-velocity datasets: the core container, synthetic curve generators
// (circle, branch, spiral, double helix), additive position noise, and
// train/test splitting.

#include "flowartist/core.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

namespace flowartist {

struct VelocityPoint {
  Vector x;
  Vector v;
};

/// A set of N points with matching velocities in R^n. Labels and pseudotime
/// are optional per-point annotations; an empty vector means "absent".
struct FlowDataset {
  Matrix positions;           // N x n
  Matrix velocities;          // N x n
  std::vector<int> labels;    // strand / segment id
  Vector pseudotime;          // progression along the flow
  std::string name;

  Index size() const { return positions.rows(); }
  Index dim() const { return positions.cols(); }
  bool has_labels() const { return !labels.empty(); }
  bool has_pseudotime() const { return pseudotime.size() > 0; }

  VelocityPoint point(Index i) const {
    return VelocityPoint{positions.row(i).transpose(), velocities.row(i).transpose()};
  }

  void validate() const {
    require(positions.rows() >= 2, "FlowDataset: needs at least 2 points");
    require(positions.cols() >= 2, "FlowDataset: dimension must be >= 2");
    require(velocities.rows() == positions.rows() &&
                velocities.cols() == positions.cols(),
            "FlowDataset: velocity shape must match positions");
    require(positions.allFinite() && velocities.allFinite(),
            "FlowDataset: entries must be finite");
    require(labels.empty() ||
                static_cast<Index>(labels.size()) == positions.rows(),
            "FlowDataset: labels must have one entry per point");
    require(pseudotime.size() == 0 || pseudotime.size() == positions.rows(),
            "FlowDataset: pseudotime must have one entry per point");
  }
};

enum class Shape { circle, branch, spiral, double_helix };

inline Shape shape_from_string(const std::string& s) {
  if (s == "circle") return Shape::circle;
  if (s == "branch") return Shape::branch;
  if (s == "spiral") return Shape::spiral;
  if (s == "double_helix") return Shape::double_helix;
  throw std::invalid_argument("unknown shape name: " + s);
}

inline std::string to_string(Shape s) {
  switch (s) {
    case Shape::circle: return "circle";
    case Shape::branch: return "branch";
    case Shape::spiral: return "spiral";
    case Shape::double_helix: return "double_helix";
  }
  return "?";
}

struct GeneratorSpec {
  Shape shape = Shape::circle;
  Index n_points = 500;
  double speed = 1.0;
  std::map<std::string, double> shape_params;
  std::uint64_t seed = 0;

  void validate() const {
    require(n_points >= 2, "GeneratorSpec: n_points must be >= 2");
    require(speed > 0.0 && std::isfinite(speed),
            "GeneratorSpec: speed must be positive");
  }
};

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    require(sigma >= 0.0 && std::isfinite(sigma),
            "NoiseSpec: sigma must be nonnegative");
  }
};

namespace detail {

inline double shape_param(const std::map<std::string, double>& params,
                          const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

inline void check_param_keys(const std::map<std::string, double>& params,
                             std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      throw std::invalid_argument("unknown shape parameter: " + key);
    }
  }
}

}  // namespace detail

/// Samples points uniformly in the curve parameter; velocities are unit
/// tangents scaled to spec.speed. Deterministic for a given spec.
inline FlowDataset generate_dataset(const GeneratorSpec& spec) {
  spec.validate();
  const Index n = spec.n_points;
  FlowDataset ds;
  ds.name = to_string(spec.shape);

  switch (spec.shape) {
    case Shape::circle: {
      detail::check_param_keys(spec.shape_params, {"radius"});
      const double radius = detail::shape_param(spec.shape_params, "radius", 1.0);
      require(radius > 0.0, "circle: radius must be positive");
      ds.positions.resize(n, 2);
      ds.velocities.resize(n, 2);
      ds.pseudotime.resize(n);
      for (Index i = 0; i < n; ++i) {
        const double theta = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        ds.positions.row(i) << radius * std::cos(theta), radius * std::sin(theta);
        ds.velocities.row(i) << -spec.speed * std::sin(theta), spec.speed * std::cos(theta);
        ds.pseudotime[i] = theta;
      }
      break;
    }
    case Shape::branch: {
      // Unit trunk along +y splitting into two unit arms at +-arm_angle.
      detail::check_param_keys(spec.shape_params, {"arm_angle_deg"});
      const double angle =
          detail::shape_param(spec.shape_params, "arm_angle_deg", 45.0) * M_PI / 180.0;
      const Eigen::Vector2d junction(0.0, 1.0);
      const Eigen::Vector2d trunk_dir(0.0, 1.0);
      const Eigen::Vector2d left_dir(-std::sin(angle), std::cos(angle));
      const Eigen::Vector2d right_dir(std::sin(angle), std::cos(angle));
      ds.positions.resize(n, 2);
      ds.velocities.resize(n, 2);
      ds.labels.resize(n);
      ds.pseudotime.resize(n);
      for (Index i = 0; i < n; ++i) {
        const double s = 3.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        Eigen::Vector2d pos, dir;
        if (s < 1.0) {
          pos = s * trunk_dir;
          dir = trunk_dir;
          ds.labels[i] = 0;
          ds.pseudotime[i] = s;
        } else if (s < 2.0) {
          pos = junction + (s - 1.0) * left_dir;
          dir = left_dir;
          ds.labels[i] = 1;
          ds.pseudotime[i] = s;
        } else {
          pos = junction + (s - 2.0) * right_dir;
          dir = right_dir;
          ds.labels[i] = 2;
          ds.pseudotime[i] = s - 1.0;
        }
        ds.positions.row(i) = pos.transpose();
        ds.velocities.row(i) = spec.speed * dir.transpose();
      }
      break;
    }
    case Shape::spiral: {
      // Archimedean spiral r = r0 + growth * theta, winding outward.
      detail::check_param_keys(spec.shape_params, {"r0", "growth", "turns"});
      const double r0 = detail::shape_param(spec.shape_params, "r0", 0.5);
      const double growth = detail::shape_param(spec.shape_params, "growth", 0.15);
      const double turns = detail::shape_param(spec.shape_params, "turns", 3.0);
      require(turns > 0.0, "spiral: turns must be positive");
      const double theta_max = 2.0 * M_PI * turns;
      ds.positions.resize(n, 2);
      ds.velocities.resize(n, 2);
      ds.pseudotime.resize(n);
      for (Index i = 0; i < n; ++i) {
        const double theta = theta_max * static_cast<double>(i) / static_cast<double>(n - 1);
        const double r = r0 + growth * theta;
        ds.positions.row(i) << r * std::cos(theta), r * std::sin(theta);
        Eigen::Vector2d tangent(growth * std::cos(theta) - r * std::sin(theta),
                                growth * std::sin(theta) + r * std::cos(theta));
        tangent *= spec.speed / tangent.norm();
        ds.velocities.row(i) = tangent.transpose();
        ds.pseudotime[i] = theta;
      }
      break;
    }
    case Shape::double_helix: {
      // Two antipodal helices around the same axis. Strand 0 flows up the
      // helix; strand 1 flows down, so that spatially close points from
      // different strands carry opposing velocities.
      detail::check_param_keys(spec.shape_params, {"pitch", "turns", "radius"});
      const double pitch = detail::shape_param(spec.shape_params, "pitch", 0.7);
      const double turns = detail::shape_param(spec.shape_params, "turns", 3.0);
      const double radius = detail::shape_param(spec.shape_params, "radius", 1.5);
      require(turns > 0.0, "double_helix: turns must be positive");
      const double t_max = 2.0 * M_PI * turns;
      const Index k0 = (n + 1) / 2;
      const Index k1 = n - k0;
      ds.positions.resize(n, 3);
      ds.velocities.resize(n, 3);
      ds.labels.resize(n);
      ds.pseudotime.resize(n);
      auto fill_strand = [&](Index offset, Index count, int label) {
        for (Index j = 0; j < count; ++j) {
          const double t =
              count > 1 ? t_max * static_cast<double>(j) / static_cast<double>(count - 1) : 0.0;
          const Index i = offset + j;
          const double phase = label == 0 ? t : t + M_PI;
          ds.positions.row(i) << radius * std::cos(phase), radius * std::sin(phase), pitch * t;
          Eigen::Vector3d tangent(-radius * std::sin(phase), radius * std::cos(phase), pitch);
          tangent *= spec.speed / tangent.norm();
          if (label == 1) tangent = -tangent;
          ds.velocities.row(i) = tangent.transpose();
          ds.labels[i] = label;
          ds.pseudotime[i] = label == 0 ? t : t_max - t;
        }
      };
      fill_strand(0, k0, 0);
      fill_strand(k0, k1, 1);
      break;
    }
  }

  ds.validate();
  return ds;
}

/// Perturbs each position coordinate by an independent N(0, sigma^2) draw.
/// Velocities, labels, and pseudotime pass through unchanged.
inline FlowDataset add_noise(const FlowDataset& ds, const NoiseSpec& noise) {
  ds.validate();
  noise.validate();
  FlowDataset out = ds;
  if (noise.sigma == 0.0) return out;
  Rng rng(noise.seed);
  for (Index i = 0; i < out.positions.rows(); ++i) {
    for (Index j = 0; j < out.positions.cols(); ++j) {
      out.positions(i, j) += noise.sigma * rng.normal();
    }
  }
  return out;
}

/// Disjoint (train, test) index sets covering [0, N); |test| is
/// round(test_fraction * N). Both sets are returned in ascending order.
inline std::pair<std::vector<Index>, std::vector<Index>> train_test_split(
    const FlowDataset& ds, double test_fraction, std::uint64_t seed) {
  ds.validate();
  require(test_fraction > 0.0 && test_fraction < 1.0,
          "train_test_split: test_fraction must be in (0, 1)");
  const Index n = ds.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  std::vector<Index> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<Index> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(test)};
}

}  // namespace flowartist
