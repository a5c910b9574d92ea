#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ynet/png_io.hpp"

namespace ynet {

/// Semantic class grid plus the metadata needed to move between coordinate
/// spaces. The grid lives in the downsampled working resolution; the optional
/// homography maps world meters to original (pre-downsampling) pixels.
struct Scene {
  std::string id;
  GrayImage semantic;  // H x W class indices
  int class_count = 0;
  std::vector<std::string> class_names;
  double downsample_factor = 1.0;
  std::optional<Eigen::Matrix3d> homography;
  std::string units = "pixels";  // evaluation space: "pixels" | "meters"

  int height() const { return static_cast<int>(semantic.rows()); }
  int width() const { return static_cast<int>(semantic.cols()); }

  bool contains(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x <= width() - 1 && y <= height() - 1;
  }

  /// Checks the class-index and homography invariants; throws DataError.
  void validate() const;
};

/// Zero-pads (class 0) on the bottom/right so both extents divide `multiple`.
Scene pad_to_multiple(const Scene& scene, int multiple);

/// Loads the 8-bit class-index PNG plus its JSON side-car manifest, then pads
/// to the divisible-by-32 grid the network requires.
Scene load_scene(const std::string& png_path, const std::string& manifest_path);

/// Writes <dir>/<id>.png and <dir>/<id>.json.
void save_scene(const Scene& scene, const std::string& dir);

}  // namespace ynet
