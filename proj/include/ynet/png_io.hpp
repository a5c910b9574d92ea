#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace ynet {

using GrayImage = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Interleaved RGB, row-major, 3 bytes per pixel.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t* at(int i, int j) { return pixels.data() + 3 * (i * width + j); }
  const std::uint8_t* at(int i, int j) const { return pixels.data() + 3 * (i * width + j); }
};

GrayImage read_gray_png(const std::string& path);
void write_gray_png(const std::string& path, const GrayImage& img);
void write_rgb_png(const std::string& path, const RgbImage& img);

}  // namespace ynet
