#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ynet/heatmap.hpp"
#include "ynet/model.hpp"

namespace ynet {

/// One configuration object shared by every subcommand. Precedence is
/// command-line overrides > config file > these defaults.
struct RunConfig {
  ModelConfig model;

  // Supervision / conditioning heatmaps.
  double sigma = 4.0;  // target Gaussian width, pixels
  std::string past_encoding = "peak";  // "peak" (1 - d/dmax) or "ramp" (2 d/dmax, as printed)

  // Optimization.
  double lr = 1e-4;
  int batch_size = 8;
  int epochs = 100;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double global_scale = 1000.0;
  bool augment = true;
  double val_fraction = 0.1;

  // Sampling.
  int k_goals = 20;
  int k_paths = 1;
  int monte_carlo = 10000;
  double alpha = 6.0;
  double beta = 0.5;
  bool use_ttst = true;
  bool use_cws = true;

  std::uint64_t seed = 0;

  PastEncoding encoding() const {
    return past_encoding == "ramp" ? PastEncoding::kDistanceRamp : PastEncoding::kPeak;
  }

  void validate() const;
  std::string to_json_string() const;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_string(const std::string& text, const std::string& origin);
};

/// Values given on the command line; applied on top of the config file.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> k_goals;
  std::optional<int> k_paths;
  std::optional<double> temperature;
  std::optional<std::vector<int>> waypoint_frames;
  std::optional<bool> use_ttst;
  std::optional<bool> use_cws;
  std::optional<int> epochs;
};

RunConfig apply_overrides(RunConfig config, const ConfigOverrides& overrides);

}  // namespace ynet
