#pragma once

// Self-contained SVG rendering of embeddings: scatter plots, quiver fields,
// streamlines traced through the learned field by midpoint integration, and
// probability heat scatters over dataset positions.

#include "flowartist/csv.hpp"
#include "flowartist/trainer.hpp"

#include <functional>

namespace flowartist {

enum class PlotMode { scatter, quiver, streamlines, diffusion_heat };
enum class ColorBy { label, pseudotime, none };

inline PlotMode plot_mode_from_string(const std::string& s) {
  if (s == "scatter") return PlotMode::scatter;
  if (s == "quiver") return PlotMode::quiver;
  if (s == "streamlines") return PlotMode::streamlines;
  if (s == "diffusion_heat") return PlotMode::diffusion_heat;
  throw std::invalid_argument("unknown plot mode: " + s);
}

inline ColorBy color_by_from_string(const std::string& s) {
  if (s == "label") return ColorBy::label;
  if (s == "pseudotime") return ColorBy::pseudotime;
  if (s == "none") return ColorBy::none;
  throw std::invalid_argument("unknown color attribute: " + s);
}

struct PlotSpec {
  PlotMode mode = PlotMode::scatter;
  ColorBy color_by = ColorBy::none;
  Index grid = 12;      // seeds / arrows per axis
  double canvas = 640;  // square canvas side, px

  void validate() const {
    require(grid >= 2, "PlotSpec: grid must be >= 2 per axis");
    require(canvas >= 64, "PlotSpec: canvas too small");
  }
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

constexpr const char* kCategoricalPalette[10] = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

/// Two-stop sequential ramp, dark violet to yellow, u in [0,1].
inline std::string sequential_color(double u) {
  u = std::clamp(u, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(68.0 + u * (253.0 - 68.0)));
  const int g = static_cast<int>(std::lround(1.0 + u * (231.0 - 1.0)));
  const int b = static_cast<int>(std::lround(84.0 + u * (37.0 - 84.0)));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace detail

class SvgCanvas {
 public:
  SvgCanvas(double width, double height) : width_(width), height_(height) {}

  void circle(double cx, double cy, double r, const std::string& fill) {
    body_ << "<circle cx=\"" << detail::svg_num(cx) << "\" cy=\"" << detail::svg_num(cy)
          << "\" r=\"" << detail::svg_num(r) << "\" fill=\"" << fill << "\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width) {
    body_ << "<line x1=\"" << detail::svg_num(x1) << "\" y1=\"" << detail::svg_num(y1)
          << "\" x2=\"" << detail::svg_num(x2) << "\" y2=\"" << detail::svg_num(y2)
          << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << detail::svg_num(stroke_width) << "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& points,
                const std::string& stroke, double stroke_width) {
    if (points.size() < 2) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
          << detail::svg_num(stroke_width) << "\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      body_ << (i ? " " : "") << detail::svg_num(points[i].first) << ","
            << detail::svg_num(points[i].second);
    }
    body_ << "\"/>\n";
  }

  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << detail::svg_num(width_) << "\" height=\"" << detail::svg_num(height_)
        << "\" viewBox=\"0 0 " << detail::svg_num(width_) << " " << detail::svg_num(height_)
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double width_, height_;
  std::ostringstream body_;
};

/// Fixed-step midpoint (RK2) integration of a planar field from `start`.
/// Stops after max_steps, on leaving the box, or if a non-finite value
/// appears, so emitted polylines always have finite coordinates.
inline std::vector<Vector2> integrate_streamline(
    const std::function<Vector2(const Vector2&)>& field, const Vector2& start, double step,
    int max_steps, const Vector2& box_min, const Vector2& box_max) {
  require(step > 0.0 && std::isfinite(step), "integrate_streamline: bad step");
  std::vector<Vector2> path;
  auto inside = [&](const Vector2& p) {
    return p.allFinite() && p[0] >= box_min[0] && p[0] <= box_max[0] && p[1] >= box_min[1] &&
           p[1] <= box_max[1];
  };
  Vector2 current = start;
  if (!inside(current)) return path;
  path.push_back(current);
  for (int i = 0; i < max_steps; ++i) {
    const Vector2 k1 = field(current);
    if (!k1.allFinite()) break;
    const Vector2 mid = current + 0.5 * step * k1;
    if (!mid.allFinite()) break;
    const Vector2 k2 = field(mid);
    if (!k2.allFinite()) break;
    const Vector2 next = current + step * k2;
    if (!inside(next)) break;
    path.push_back(next);
    current = next;
  }
  return path;
}

namespace detail {

struct WorldToScreen {
  double x0, y0, scale_x, scale_y, canvas;

  std::pair<double, double> operator()(double x, double y) const {
    // y axis flipped: SVG grows downward.
    return {(x - x0) * scale_x, canvas - (y - y0) * scale_y};
  }
};

inline WorldToScreen fit_box(double min_x, double max_x, double min_y, double max_y,
                             double canvas) {
  const double span_x = max_x - min_x;
  const double span_y = max_y - min_y;
  require(std::max(span_x, span_y) > 1e-12,
          "render_svg: degenerate bounding box (all points coincident)");
  const double pad_x = 0.05 * std::max(span_x, 1e-12 * std::max(span_y, 1.0));
  const double pad_y = 0.05 * std::max(span_y, 1e-12 * std::max(span_x, 1.0));
  WorldToScreen w{};
  w.x0 = min_x - pad_x;
  w.y0 = min_y - pad_y;
  w.scale_x = canvas / (span_x + 2.0 * pad_x);
  w.scale_y = canvas / (span_y + 2.0 * pad_y);
  w.canvas = canvas;
  return w;
}

inline std::string point_color(const PlotSpec& spec, const FlowDataset* ds, Index i,
                               double pt_min, double pt_span) {
  if (spec.color_by == ColorBy::label) {
    const int label = ds->labels[static_cast<std::size_t>(i)];
    return kCategoricalPalette[((label % 10) + 10) % 10];
  }
  if (spec.color_by == ColorBy::pseudotime) {
    const double u = pt_span > 0.0 ? (ds->pseudotime[i] - pt_min) / pt_span : 0.5;
    return sequential_color(u);
  }
  return "#4e79a7";
}

}  // namespace detail

/// Renders the embedding as a standalone SVG. Coloring by label or pseudotime
/// requires a dataset carrying that annotation. Quiver and streamline modes
/// evaluate psi over a regular grid spanning the embedding bounding box.
inline void render_svg(const EmbeddingResult& result, const PlotSpec& spec,
                       const std::string& path, const FlowDataset* ds = nullptr) {
  spec.validate();
  require(result.embeddings.allFinite(), "render_svg: non-finite embeddings");
  require(result.embeddings.cols() == 2, "render_svg: embeddings must be 2-d");
  require(spec.mode != PlotMode::diffusion_heat,
          "render_svg: diffusion_heat needs render_diffusion_heat_svg");
  if (spec.color_by == ColorBy::label) {
    require(ds != nullptr && ds->has_labels(), "render_svg: label coloring needs labels");
  }
  if (spec.color_by == ColorBy::pseudotime) {
    require(ds != nullptr && ds->has_pseudotime(),
            "render_svg: pseudotime coloring needs pseudotime");
  }
  const Index n = result.embeddings.rows();
  if (ds != nullptr) require(ds->size() == n, "render_svg: dataset size mismatch");

  const double min_x = result.embeddings.col(0).minCoeff();
  const double max_x = result.embeddings.col(0).maxCoeff();
  const double min_y = result.embeddings.col(1).minCoeff();
  const double max_y = result.embeddings.col(1).maxCoeff();
  const auto to_screen = detail::fit_box(min_x, max_x, min_y, max_y, spec.canvas);

  double pt_min = 0.0, pt_span = 0.0;
  if (spec.color_by == ColorBy::pseudotime) {
    pt_min = ds->pseudotime.minCoeff();
    pt_span = ds->pseudotime.maxCoeff() - pt_min;
  }

  SvgCanvas canvas(spec.canvas, spec.canvas);
  for (Index i = 0; i < n; ++i) {
    const auto [sx, sy] = to_screen(result.embeddings(i, 0), result.embeddings(i, 1));
    canvas.circle(sx, sy, 3.0, detail::point_color(spec, ds, i, pt_min, pt_span));
  }

  if (spec.mode == PlotMode::quiver || spec.mode == PlotMode::streamlines) {
    const Vector2 box_min(min_x, min_y);
    const Vector2 box_max(max_x, max_y);
    const double diag = (box_max - box_min).norm();
    auto field = [&result](const Vector2& e) { return apply_one(result.psi, e); };
    const Index g = spec.grid;
    double field_max = 1e-12;
    std::vector<Vector2> grid_points, grid_field;
    for (Index gy = 0; gy < g; ++gy) {
      for (Index gx = 0; gx < g; ++gx) {
        Vector2 e(min_x + (max_x - min_x) * static_cast<double>(gx) / static_cast<double>(g - 1),
                  min_y + (max_y - min_y) * static_cast<double>(gy) / static_cast<double>(g - 1));
        grid_points.push_back(e);
        if (spec.mode == PlotMode::quiver) {
          grid_field.push_back(field(e));
          field_max = std::max(field_max, grid_field.back().norm());
        }
      }
    }
    if (spec.mode == PlotMode::quiver) {
      const double cell = diag / static_cast<double>(g);
      for (std::size_t i = 0; i < grid_points.size(); ++i) {
        const Vector2& e = grid_points[i];
        const Vector2 v = grid_field[i] * (0.45 * cell / field_max);
        const auto [x1, y1] = to_screen(e[0], e[1]);
        const auto [x2, y2] = to_screen(e[0] + v[0], e[1] + v[1]);
        canvas.line(x1, y1, x2, y2, "#333333", 1.2);
        canvas.circle(x2, y2, 1.6, "#333333");
      }
    } else {
      const double step = 0.01 * diag;
      for (const Vector2& seed : grid_points) {
        const auto line = integrate_streamline(field, seed, step, 200, box_min, box_max);
        std::vector<std::pair<double, double>> screen;
        screen.reserve(line.size());
        for (const Vector2& p : line) screen.push_back(to_screen(p[0], p[1]));
        canvas.polyline(screen, "#555555", 1.0);
      }
    }
  }

  write_text(path, canvas.str());
}

/// Heat scatter of a probability vector over dataset positions (first two
/// coordinates), colored on the sequential ramp normalized by the maximum.
inline void render_diffusion_heat_svg(const FlowDataset& ds, const Vector& probabilities,
                                      const PlotSpec& spec, const std::string& path) {
  spec.validate();
  ds.validate();
  require(probabilities.size() == ds.size(),
          "render_diffusion_heat_svg: probability vector size mismatch");
  const double min_x = ds.positions.col(0).minCoeff();
  const double max_x = ds.positions.col(0).maxCoeff();
  const double min_y = ds.positions.col(1).minCoeff();
  const double max_y = ds.positions.col(1).maxCoeff();
  const auto to_screen = detail::fit_box(min_x, max_x, min_y, max_y, spec.canvas);
  const double p_max = std::max(probabilities.maxCoeff(), 1e-300);
  SvgCanvas canvas(spec.canvas, spec.canvas);
  for (Index i = 0; i < ds.size(); ++i) {
    const auto [sx, sy] = to_screen(ds.positions(i, 0), ds.positions(i, 1));
    canvas.circle(sx, sy, 3.0, detail::sequential_color(probabilities[i] / p_max));
  }
  write_text(path, canvas.str());
}

}  // namespace flowartist
