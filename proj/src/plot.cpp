#include "ynet/plot.hpp"

#include <algorithm>
#include <cmath>

namespace ynet {

namespace {

struct Color {
  std::uint8_t r, g, b;
};

// Muted palette for semantic classes, cycled past index 4.
constexpr Color kClassColors[5] = {
    {210, 210, 205},  // pavement
    {168, 194, 160},  // terrain
    {120, 120, 128},  // structure
    {88, 130, 92},    // tree
    {140, 146, 172},  // road
};

constexpr Color kPast{40, 90, 220};
constexpr Color kTruth{40, 170, 60};
constexpr Color kPrediction{220, 50, 40};

void put(RgbImage& img, int x, int y, Color c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  std::uint8_t* p = img.at(y, x);
  p[0] = c.r;
  p[1] = c.g;
  p[2] = c.b;
}

void draw_line(RgbImage& img, const Point& a, const Point& b, Color c) {
  int x0 = static_cast<int>(std::lround(a.x())), y0 = static_cast<int>(std::lround(a.y()));
  const int x1 = static_cast<int>(std::lround(b.x())), y1 = static_cast<int>(std::lround(b.y()));
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    put(img, x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void draw_path(RgbImage& img, const Trajectory& path, Color c) {
  for (std::size_t i = 0; i + 1 < path.size(); ++i) draw_line(img, path[i], path[i + 1], c);
  for (const Point& p : path) {
    const int x = static_cast<int>(std::lround(p.x())), y = static_cast<int>(std::lround(p.y()));
    put(img, x, y, c);
    put(img, x + 1, y, c);
    put(img, x, y + 1, c);
  }
}

}  // namespace

Eigen::Vector2i overlay_argmax(const ProbabilityMap& map) {
  Eigen::Index bi = 0, bj = 0;
  map.grid.maxCoeff(&bi, &bj);
  return {static_cast<int>(bj), static_cast<int>(bi)};
}

RgbImage render_figure(const Scene& scene, const Trajectory& past, const Trajectory& ground_truth,
                       const std::vector<Hypothesis>& predictions,
                       const std::optional<ProbabilityMap>& overlay) {
  RgbImage img;
  img.height = scene.height();
  img.width = scene.width();
  img.pixels.assign(static_cast<std::size_t>(3) * img.height * img.width, 0);
  for (int i = 0; i < img.height; ++i) {
    for (int j = 0; j < img.width; ++j) {
      put(img, j, i, kClassColors[scene.semantic(i, j) % 5]);
    }
  }
  if (overlay) {
    const double peak = std::max(overlay->grid.maxCoeff(), 1e-300);
    for (int i = 0; i < img.height && i < overlay->height(); ++i) {
      for (int j = 0; j < img.width && j < overlay->width(); ++j) {
        const double a = overlay->grid(i, j) / peak;
        if (a <= 0.0) continue;
        std::uint8_t* p = img.at(i, j);
        p[0] = static_cast<std::uint8_t>(p[0] + a * (255 - p[0]));
        p[1] = static_cast<std::uint8_t>(p[1] * (1.0 - 0.8 * a));
        p[2] = static_cast<std::uint8_t>(p[2] * (1.0 - 0.8 * a));
      }
    }
  }
  for (const auto& h : predictions) draw_path(img, h.points, kPrediction);
  draw_path(img, ground_truth, kTruth);
  draw_path(img, past, kPast);
  return img;
}

}  // namespace ynet
