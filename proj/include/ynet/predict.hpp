#pragma once

#include <vector>

#include "ynet/evaluation.hpp"
#include "ynet/heatmap.hpp"
#include "ynet/model.hpp"
#include "ynet/sampling.hpp"

namespace ynet {

struct PredictOptions {
  bool use_ttst = true;  // off: plain categorical top-K_e goal draws
  bool use_cws = true;   // off: unconditioned waypoint softargmax/samples
  double alpha = 6.0;
  double beta = 0.5;
  double sigma = 4.0;  // conditioning heatmap width
  PastEncoding encoding = PastEncoding::kPeak;
};

/// Full single-agent inference: encode, decode the goal/waypoint maps (with
/// temperature), sample K_e goals, sample K_a waypoint tuples per goal, then
/// decode and read off one trajectory per (goal, tuple). Deterministic given
/// budget.seed; goal sampling consumes a seed stream independent of K_a.
template <typename Scalar>
std::vector<Hypothesis> predict_window(const YNet<Scalar>& model, const Scene& scene,
                                       const std::vector<Point>& past, const SampleBudget& budget,
                                       const PredictOptions& options) {
  const ModelConfig& cfg = model.config();
  const int n_w = cfg.waypoint_count();
  const Tensor<Scalar> input =
      build_input(encode_past<Scalar>(past, scene, options.encoding), encode_semantic<Scalar>(scene));
  const FeaturePyramid<Scalar> pyramid = model.encode(input);
  const GoalMaps<Scalar> maps = model.decode_goal(pyramid, RunMode::kInfer);

  const ProbabilityMap goal_map = to_probability_map(maps.waypoints_goal, n_w);
  std::vector<ProbabilityMap> waypoint_maps;
  for (int i = 0; i < n_w; ++i) waypoint_maps.push_back(to_probability_map(maps.waypoints_goal, i));

  SampleBudget goal_budget = budget;
  goal_budget.seed = derive_seed(budget.seed, 0x676f616c);
  std::vector<Point> goals;
  if (options.use_ttst) {
    goals = ttst(goal_map, goal_budget);
  } else {
    Rng rng(goal_budget.seed);
    goals = categorical_sample(goal_map, budget.goal_count, rng);
  }

  std::vector<Hypothesis> out;
  out.reserve(static_cast<std::size_t>(budget.goal_count) * budget.path_count);
  for (int g = 0; g < static_cast<int>(goals.size()); ++g) {
    std::vector<std::vector<Point>> tuples;
    if (options.use_cws || n_w == 0) {
      tuples = conditioned_waypoint_sampling(
          waypoint_maps, goals[static_cast<std::size_t>(g)], past.back(), cfg.past_frames,
          cfg.future_frames, cfg.waypoint_frames, budget.path_count,
          derive_seed(budget.seed, 0x637773, static_cast<std::uint64_t>(g)), options.alpha,
          options.beta);
    } else {
      // Unconditioned fallback: softargmax tuple first, categorical draws after.
      tuples.assign(static_cast<std::size_t>(budget.path_count),
                    std::vector<Point>(static_cast<std::size_t>(n_w)));
      Rng rng(derive_seed(budget.seed, 0x756e63, static_cast<std::uint64_t>(g)));
      for (int a = 0; a < budget.path_count; ++a) {
        for (int i = 0; i < n_w; ++i) {
          tuples[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] =
              (a == 0) ? distribution_mean(waypoint_maps[static_cast<std::size_t>(i)])
                       : categorical_sample(waypoint_maps[static_cast<std::size_t>(i)], 1, rng)[0];
        }
      }
    }
    for (int a = 0; a < static_cast<int>(tuples.size()); ++a) {
      const std::vector<Point>& waypoints = tuples[static_cast<std::size_t>(a)];
      const Tensor<Scalar> conditioning = encode_conditioning<Scalar>(
          goals[static_cast<std::size_t>(g)], waypoints, options.sigma, scene.height(),
          scene.width());
      const auto levels = conditioning_pyramid(conditioning, cfg.block_count());
      const Tensor<Scalar> traj_maps = model.decode_trajectory(pyramid, levels);
      std::vector<ProbabilityMap> step_maps;
      for (int k = 0; k < cfg.future_frames; ++k) {
        step_maps.push_back(to_probability_map(traj_maps, k));
      }
      Hypothesis h;
      h.goal_index = g;
      h.path_index = a;
      h.goal = goals[static_cast<std::size_t>(g)];
      h.waypoints = waypoints;
      h.points = trajectory_from_maps(step_maps, cfg.waypoint_frames, waypoints,
                                      goals[static_cast<std::size_t>(g)], cfg.past_frames);
      out.push_back(std::move(h));
    }
  }
  return out;
}

}  // namespace ynet
