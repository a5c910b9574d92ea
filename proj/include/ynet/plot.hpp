#pragma once

#include <optional>
#include <vector>

#include "ynet/evaluation.hpp"
#include "ynet/png_io.hpp"
#include "ynet/sampling.hpp"
#include "ynet/scene.hpp"

namespace ynet {

/// Rasterizes the semantic mask with the past track in blue, the ground truth
/// in green, predictions in red, and an optional probability-map overlay
/// rendered as red-hot intensity. Output dimensions equal the scene's.
RgbImage render_figure(const Scene& scene, const Trajectory& past, const Trajectory& ground_truth,
                       const std::vector<Hypothesis>& predictions,
                       const std::optional<ProbabilityMap>& overlay = std::nullopt);

/// Peak pixel (x, y) of an overlay rendered by render_figure.
Eigen::Vector2i overlay_argmax(const ProbabilityMap& map);

}  // namespace ynet
