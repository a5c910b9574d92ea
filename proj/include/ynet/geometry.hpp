#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ynet/errors.hpp"

namespace ynet {

/// Pixel-space point: x is the column coordinate, y the row coordinate.
using Point = Eigen::Vector2d;
using Trajectory = std::vector<Point>;

inline void require_invertible(const Eigen::Matrix3d& h) {
  if (std::abs(h.determinant()) <= 1e-12) {
    throw DataError("homography is singular (|det| <= 1e-12)");
  }
}

/// Homogeneous transform with perspective division.
inline Point apply_homography(const Eigen::Matrix3d& h, const Point& p) {
  const Eigen::Vector3d q = h * Eigen::Vector3d(p.x(), p.y(), 1.0);
  return Point(q.x() / q.z(), q.y() / q.z());
}

/// World meters -> pixels, given the world->pixel homography.
inline Trajectory world_to_pixel(const Trajectory& pts, const Eigen::Matrix3d& h) {
  require_invertible(h);
  Trajectory out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(apply_homography(h, p));
  return out;
}

/// Pixels -> world meters via the inverse homography.
inline Trajectory pixel_to_world(const Trajectory& pts, const Eigen::Matrix3d& h) {
  require_invertible(h);
  const Eigen::Matrix3d inv = h.inverse();
  Trajectory out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(apply_homography(inv, p));
  return out;
}

/// Divides coordinates by the downsample factor (ingest direction).
inline Trajectory rescale_points(const Trajectory& pts, double factor) {
  if (!(factor > 0.0)) throw ConfigError("rescale factor must be positive");
  Trajectory out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(p / factor);
  return out;
}

// ---------------------------------------------------------------------------
// Dihedral group of the rectangle, used for the x8 spatial augmentation.
// A variant v in 0..7 means: horizontal flip if (v & 1), then (v >> 2 ? ... )
// (v >> 1) quarter turns counter-clockwise. Grids and coordinates transform
// consistently; 90/270-degree turns swap height and width.
// ---------------------------------------------------------------------------

inline int dihedral_inverse(int variant) {
  if (variant < 0 || variant > 7) throw std::invalid_argument("dihedral variant must be in 0..7");
  if (variant & 1) return variant;  // flip-then-rotate elements are involutions
  const int r = variant >> 1;
  return ((4 - r) % 4) << 1;
}

/// Transforms a point living on an h x w grid; returns the point on the
/// transformed grid (whose dims are swapped when the turn count is odd).
inline Point dihedral_point(Point p, int variant, int h, int w) {
  if (variant < 0 || variant > 7) throw std::invalid_argument("dihedral variant must be in 0..7");
  if (variant & 1) p.x() = static_cast<double>(w - 1) - p.x();
  int turns = variant >> 1;
  while (turns-- > 0) {
    // CCW quarter turn: (x, y) -> (y, W-1-x), grid becomes w x h.
    const double nx = p.y();
    const double ny = static_cast<double>(w - 1) - p.x();
    p = Point(nx, ny);
    std::swap(h, w);
  }
  return p;
}

inline void dihedral_dims(int variant, int h, int w, int* out_h, int* out_w) {
  const bool swap = ((variant >> 1) & 1) != 0;
  *out_h = swap ? w : h;
  *out_w = swap ? h : w;
}

}  // namespace ynet
