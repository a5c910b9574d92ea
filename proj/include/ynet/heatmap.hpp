#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ynet/geometry.hpp"
#include "ynet/ops.hpp"
#include "ynet/scene.hpp"
#include "ynet/tensor.hpp"

// Spatial grid encodings: past trajectories, semantic one-hots, Gaussian
// supervision targets and goal/waypoint conditioning stacks. All pure.

namespace ynet {

/// How a past position is written onto its channel. kPeak is 1 - d/d_max
/// (maximum 1 at the agent, 0 at the farthest scene pixel). kDistanceRamp is
/// the 2*d/d_max variant kept selectable for fidelity experiments.
enum class PastEncoding { kPeak, kDistanceRamp };

template <typename Scalar>
using HeatmapStack = Tensor<Scalar>;

namespace detail {

inline double max_corner_distance(double x, double y, int h, int w) {
  double worst = 0.0;
  for (const double cy : {0.0, static_cast<double>(h - 1)}) {
    for (const double cx : {0.0, static_cast<double>(w - 1)}) {
      worst = std::max(worst, std::hypot(cx - x, cy - y));
    }
  }
  return worst;
}

}  // namespace detail

/// One channel per past frame (oldest first): a normalized-distance decay map
/// whose shape is set by `encoding`.
template <typename Scalar>
HeatmapStack<Scalar> encode_past(const std::vector<Point>& track, const Scene& scene,
                                 PastEncoding encoding = PastEncoding::kPeak) {
  if (track.empty()) throw std::invalid_argument("encode_past: empty track");
  const int h = scene.height(), w = scene.width();
  Tensor<Scalar> out({static_cast<int>(track.size()), h, w});
  for (std::size_t n = 0; n < track.size(); ++n) {
    const Point& u = track[n];
    if (!scene.contains(u.x(), u.y())) {
      throw std::invalid_argument("encode_past: frame " + std::to_string(n) + " at (" +
                                  std::to_string(u.x()) + "," + std::to_string(u.y()) +
                                  ") is outside the scene");
    }
    const double d_max = detail::max_corner_distance(u.x(), u.y(), h, w);
    auto ch = out.channel(static_cast<int>(n));
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const double d = std::hypot(j - u.x(), i - u.y());
        const double v = (encoding == PastEncoding::kPeak) ? 1.0 - d / d_max : 2.0 * d / d_max;
        ch(i, j) = static_cast<Scalar>(v);
      }
    }
  }
  return out;
}

/// One-hot channel per semantic class; channel order follows the manifest.
template <typename Scalar>
HeatmapStack<Scalar> encode_semantic(const Scene& scene) {
  const int h = scene.height(), w = scene.width();
  Tensor<Scalar> out({scene.class_count, h, w});
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      out.at(scene.semantic(i, j), i, j) = Scalar(1);
    }
  }
  return out;
}

/// Network input: semantic channels first, then past frames oldest-to-newest.
template <typename Scalar>
Tensor<Scalar> build_input(const HeatmapStack<Scalar>& past, const HeatmapStack<Scalar>& semantic) {
  if (!past.valid() || !semantic.valid()) {
    throw std::invalid_argument("build_input: both the past and semantic stacks are required");
  }
  return concat_channels(semantic, past);
}

/// Gaussian supervision map: exp(-d^2 / (2 sigma^2)) around the rounded
/// center, peak value exactly 1 (not mass-normalized; the loss is per-pixel).
template <typename Scalar>
struct TargetHeatmap {
  Tensor<Scalar> grid;  // [1, H, W]
  Eigen::Vector2i center;
  double sigma = 0.0;
};

template <typename Scalar>
TargetHeatmap<Scalar> gaussian_target(const Point& point, double sigma, int h, int w) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_target: sigma must be positive");
  const int cx = static_cast<int>(std::lround(point.x()));
  const int cy = static_cast<int>(std::lround(point.y()));
  if (cx < 0 || cy < 0 || cx >= w || cy >= h) {
    throw std::invalid_argument("gaussian_target: point outside the scene");
  }
  TargetHeatmap<Scalar> t;
  t.grid = Tensor<Scalar>({1, h, w});
  t.center = {cx, cy};
  t.sigma = sigma;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  auto g = t.grid.channel(0);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double d2 = static_cast<double>((i - cy) * (i - cy) + (j - cx) * (j - cx));
      g(i, j) = static_cast<Scalar>(std::exp(-d2 * inv));
    }
  }
  return t;
}

template <typename Scalar>
TargetHeatmap<Scalar> gaussian_target(const Point& point, double sigma, const Scene& scene) {
  return gaussian_target<Scalar>(point, sigma, scene.height(), scene.width());
}

/// Conditioning stack for the trajectory decoder: one Gaussian channel per
/// waypoint (earliest first) and one for the goal, rendered like the targets.
template <typename Scalar>
HeatmapStack<Scalar> encode_conditioning(const Point& goal, const std::vector<Point>& waypoints,
                                         double sigma, int h, int w) {
  Tensor<Scalar> out({static_cast<int>(waypoints.size()) + 1, h, w});
  int c = 0;
  for (const Point& p : waypoints) {
    out.channel(c++) = gaussian_target<Scalar>(p, sigma, h, w).grid.channel(0);
  }
  out.channel(c) = gaussian_target<Scalar>(goal, sigma, h, w).grid.channel(0);
  return out;
}

/// Downsampled copies at every decoder block resolution via a chain of 2x2
/// average pooling. Index k holds the stack at scale 1/2^k, k = 0..levels.
template <typename Scalar>
std::vector<HeatmapStack<Scalar>> conditioning_pyramid(const HeatmapStack<Scalar>& full,
                                                       int levels) {
  std::vector<Tensor<Scalar>> out;
  out.reserve(static_cast<std::size_t>(levels) + 1);
  out.push_back(full);
  for (int k = 0; k < levels; ++k) out.push_back(avgpool2(out.back()));
  return out;
}

}  // namespace ynet
