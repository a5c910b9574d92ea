#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ynet/adam.hpp"
#include "ynet/errors.hpp"
#include "ynet/heatmap.hpp"
#include "ynet/model.hpp"
#include "ynet/rng.hpp"

namespace ynet {

/// One supervised window: the network input plus Gaussian targets for the
/// goal, each waypoint, and every future step (the step targets supervise
/// both the auxiliary maps and the trajectory maps).
template <typename Scalar>
struct TrainSample {
  std::string scene_id;
  std::string agent_id;
  int window_index = 0;
  int variant = 0;  // dihedral augmentation variant, 0 = original

  Tensor<Scalar> input;
  TargetHeatmap<Scalar> goal_target;
  std::vector<TargetHeatmap<Scalar>> waypoint_targets;
  std::vector<TargetHeatmap<Scalar>> step_targets;
  std::vector<Point> past;
  std::vector<Point> future;

  int target_count() const {
    return 1 + static_cast<int>(waypoint_targets.size()) +
           2 * static_cast<int>(step_targets.size());
  }
};

template <typename Scalar>
TrainSample<Scalar> make_train_sample(std::string scene_id, std::string agent_id, int window_index,
                                      const std::vector<Point>& past,
                                      const std::vector<Point>& future, const Scene& scene,
                                      const ModelConfig& cfg, double sigma,
                                      PastEncoding encoding = PastEncoding::kPeak) {
  if (static_cast<int>(past.size()) != cfg.past_frames ||
      static_cast<int>(future.size()) != cfg.future_frames) {
    throw DataError("window of " + std::to_string(past.size()) + "+" +
                    std::to_string(future.size()) + " points does not match n_p=" +
                    std::to_string(cfg.past_frames) + ", n_f=" + std::to_string(cfg.future_frames));
  }
  TrainSample<Scalar> s;
  s.scene_id = std::move(scene_id);
  s.agent_id = std::move(agent_id);
  s.window_index = window_index;
  s.past = past;
  s.future = future;
  s.input = build_input(encode_past<Scalar>(past, scene, encoding), encode_semantic<Scalar>(scene));
  const int h = scene.height(), w = scene.width();
  s.goal_target = gaussian_target<Scalar>(future.back(), sigma, h, w);
  for (int wf : cfg.waypoint_frames) {
    s.waypoint_targets.push_back(
        gaussian_target<Scalar>(future[static_cast<std::size_t>(wf - cfg.past_frames - 1)], sigma, h, w));
  }
  for (const Point& p : future) {
    s.step_targets.push_back(gaussian_target<Scalar>(p, sigma, h, w));
  }
  return s;
}

/// Applies one dihedral-group element to every channel of a rank-3 tensor
/// (pure permutation of entries, hence bit-exact under round trips).
template <typename Scalar>
Tensor<Scalar> dihedral_heatmap(const Tensor<Scalar>& t, int variant) {
  if (variant < 0 || variant > 7) throw std::invalid_argument("dihedral variant must be in 0..7");
  Tensor<Scalar> cur = t;
  if (variant & 1) {
    Tensor<Scalar> next(cur.shape());
    const int c_n = cur.extent(0), h = cur.extent(1), w = cur.extent(2);
    for (int c = 0; c < c_n; ++c) {
      for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) next.at(c, i, j) = cur.at(c, i, w - 1 - j);
      }
    }
    cur = next;
  }
  for (int r = 0; r < (variant >> 1); ++r) {
    const int c_n = cur.extent(0), h = cur.extent(1), w = cur.extent(2);
    Tensor<Scalar> next({c_n, w, h});
    // CCW quarter turn: out(i', j') = in(j', w - 1 - i').
    for (int c = 0; c < c_n; ++c) {
      for (int i = 0; i < w; ++i) {
        for (int j = 0; j < h; ++j) next.at(c, i, j) = cur.at(c, j, w - 1 - i);
      }
    }
    cur = next;
  }
  return cur;
}

/// Applies the variant consistently to the input channels, every target
/// heatmap, and the raw coordinates.
template <typename Scalar>
TrainSample<Scalar> augment(const TrainSample<Scalar>& sample, int variant) {
  if (variant < 0 || variant > 7) throw std::invalid_argument("augment variant must be in 0..7");
  const int h = sample.input.extent(1), w = sample.input.extent(2);
  TrainSample<Scalar> out = sample;
  out.variant = variant;
  out.input = dihedral_heatmap(sample.input, variant);
  auto move_target = [&](const TargetHeatmap<Scalar>& t) {
    TargetHeatmap<Scalar> r;
    r.grid = dihedral_heatmap(t.grid, variant);
    const Point c = dihedral_point(Point(t.center.x(), t.center.y()), variant, h, w);
    r.center = {static_cast<int>(std::lround(c.x())), static_cast<int>(std::lround(c.y()))};
    r.sigma = t.sigma;
    return r;
  };
  out.goal_target = move_target(sample.goal_target);
  for (std::size_t i = 0; i < sample.waypoint_targets.size(); ++i) {
    out.waypoint_targets[i] = move_target(sample.waypoint_targets[i]);
  }
  for (std::size_t i = 0; i < sample.step_targets.size(); ++i) {
    out.step_targets[i] = move_target(sample.step_targets[i]);
  }
  for (std::size_t i = 0; i < sample.past.size(); ++i) {
    out.past[i] = dihedral_point(sample.past[i], variant, h, w);
  }
  for (std::size_t i = 0; i < sample.future.size(); ++i) {
    out.future[i] = dihedral_point(sample.future[i], variant, h, w);
  }
  return out;
}

/// Ground-truth conditioning for the trajectory decoder (teacher forcing):
/// the true goal and waypoints rendered exactly like inference conditioning.
template <typename Scalar>
std::vector<Tensor<Scalar>> teacher_condition(const TrainSample<Scalar>& sample,
                                              const ModelConfig& cfg) {
  std::vector<Point> waypoints;
  for (int wf : cfg.waypoint_frames) {
    waypoints.push_back(sample.future[static_cast<std::size_t>(wf - cfg.past_frames - 1)]);
  }
  const Tensor<Scalar> full =
      encode_conditioning<Scalar>(sample.future.back(), waypoints, sample.goal_target.sigma,
                                  sample.input.extent(1), sample.input.extent(2));
  return conditioning_pyramid(full, cfg.block_count());
}

struct LossWeights {
  double lambda1 = 1.0;      // waypoint term
  double lambda2 = 1.0;      // trajectory term
  double global_scale = 1000.0;
};

template <typename Scalar>
struct LossBreakdown {
  double goal = 0.0;
  double waypoint = 0.0;
  double trajectory = 0.0;
  double total = 0.0;
  Tensor<Scalar> total_node;  // scalar on the tape; seed its grad to backprop
};

/// Per-map mean BCE, summed within each term; auxiliary maps fold into the
/// waypoint term. total = global_scale * (goal + l1 * waypoint + l2 * traj).
template <typename Scalar>
LossBreakdown<Scalar> compute_loss(const Tensor<Scalar>& goal_wp_maps, const Tensor<Scalar>& aux_maps,
                                   const Tensor<Scalar>& traj_maps, const TrainSample<Scalar>& sample,
                                   const LossWeights& weights, Tape<Scalar>* tape = nullptr) {
  const int n_w = static_cast<int>(sample.waypoint_targets.size());
  const int n_f = static_cast<int>(sample.step_targets.size());
  if (goal_wp_maps.extent(0) != n_w + 1) {
    throw std::invalid_argument("loss: goal/waypoint maps have " +
                                std::to_string(goal_wp_maps.extent(0)) + " channels, expected " +
                                std::to_string(n_w + 1));
  }
  if (!aux_maps.valid() || aux_maps.extent(0) != n_f) {
    throw std::invalid_argument("loss: auxiliary maps must provide one channel per future step");
  }
  if (traj_maps.extent(0) != n_f) {
    throw std::invalid_argument("loss: trajectory maps have " + std::to_string(traj_maps.extent(0)) +
                                " channels, expected " + std::to_string(n_f));
  }

  std::vector<Tensor<Scalar>> terms;
  std::vector<double> factors;
  LossBreakdown<Scalar> out;

  const Tensor<Scalar> goal_term =
      bce_loss(slice_channels(goal_wp_maps, n_w, 1, tape), sample.goal_target.grid, tape);
  out.goal = static_cast<double>(goal_term.values()[0]);
  terms.push_back(goal_term);
  factors.push_back(weights.global_scale);

  for (int i = 0; i < n_w; ++i) {
    const Tensor<Scalar> t = bce_loss(slice_channels(goal_wp_maps, i, 1, tape),
                                      sample.waypoint_targets[static_cast<std::size_t>(i)].grid, tape);
    out.waypoint += static_cast<double>(t.values()[0]);
    terms.push_back(t);
    factors.push_back(weights.global_scale * weights.lambda1);
  }
  for (int k = 0; k < n_f; ++k) {
    const Tensor<Scalar> t = bce_loss(slice_channels(aux_maps, k, 1, tape),
                                      sample.step_targets[static_cast<std::size_t>(k)].grid, tape);
    out.waypoint += static_cast<double>(t.values()[0]);
    terms.push_back(t);
    factors.push_back(weights.global_scale * weights.lambda1);
  }
  for (int k = 0; k < n_f; ++k) {
    const Tensor<Scalar> t = bce_loss(slice_channels(traj_maps, k, 1, tape),
                                      sample.step_targets[static_cast<std::size_t>(k)].grid, tape);
    out.trajectory += static_cast<double>(t.values()[0]);
    terms.push_back(t);
    factors.push_back(weights.global_scale * weights.lambda2);
  }
  out.total_node = weighted_sum(terms, factors, tape);
  out.total = static_cast<double>(out.total_node.values()[0]);
  return out;
}

template <typename Scalar>
void require_scene_homogeneous(const std::vector<const TrainSample<Scalar>*>& batch) {
  for (const auto* s : batch) {
    if (s->scene_id != batch.front()->scene_id || s->variant != batch.front()->variant) {
      throw DataError("batch mixes scenes: '" + batch.front()->scene_id + "' variant " +
                      std::to_string(batch.front()->variant) + " with '" + s->scene_id +
                      "' variant " + std::to_string(s->variant));
    }
  }
}

/// One optimizer step on a scene-homogeneous batch; returns the mean loss.
template <typename Scalar>
LossBreakdown<Scalar> train_on_batch(YNet<Scalar>& model,
                                     const std::vector<const TrainSample<Scalar>*>& batch,
                                     const LossWeights& weights, const AdamConfig& adam) {
  if (batch.empty()) throw DataError("empty batch");
  require_scene_homogeneous(batch);
  Tape<Scalar> tape;
  LossBreakdown<Scalar> mean;
  std::vector<Tensor<Scalar>> totals;
  for (const TrainSample<Scalar>* s : batch) {
    const auto conditioning = teacher_condition(*s, model.config());
    const auto fwd = model.forward(s->input, conditioning, RunMode::kTrain, &tape);
    auto loss = compute_loss(fwd.goal.waypoints_goal, fwd.goal.auxiliary, fwd.trajectory, *s,
                             weights, &tape);
    mean.goal += loss.goal;
    mean.waypoint += loss.waypoint;
    mean.trajectory += loss.trajectory;
    mean.total += loss.total;
    totals.push_back(loss.total_node);
  }
  const Scalar inv = Scalar(1) / static_cast<Scalar>(batch.size());
  for (auto& t : totals) t.grad()[0] = inv;
  tape.backward();
  auto params = model.parameters();
  adam_step(params, adam);
  model.zero_grad();
  const double n = static_cast<double>(batch.size());
  mean.goal /= n;
  mean.waypoint /= n;
  mean.trajectory /= n;
  mean.total /= n;
  return mean;
}

struct TrainOptions {
  double lr = 1e-4;
  int batch_size = 8;
  int epochs = 100;
  std::uint64_t seed = 0;
  bool augment = true;
  LossWeights weights;
};

struct EpochStats {
  int epoch = 0;
  double goal = 0.0;
  double waypoint = 0.0;
  double trajectory = 0.0;
  double total = 0.0;
};

struct FitResult {
  std::vector<EpochStats> curve;
};

/// Shuffled, scene-homogeneous mini-batch training. Augmentation expands the
/// dataset eightfold up front; batches group by (scene, variant). Fully
/// deterministic given the seed.
template <typename Scalar>
FitResult fit(YNet<Scalar>& model, const std::vector<TrainSample<Scalar>>& dataset,
              const TrainOptions& options,
              const std::function<void(const EpochStats&)>& on_epoch = nullptr) {
  if (dataset.empty()) throw DataError("fit: empty dataset");
  std::vector<TrainSample<Scalar>> working;
  if (options.augment) {
    working.reserve(dataset.size() * 8);
    for (const auto& s : dataset) {
      for (int v = 0; v < 8; ++v) working.push_back(augment(s, v));
    }
  } else {
    working = dataset;
  }

  std::map<std::pair<std::string, int>, std::vector<int>> groups;
  for (int i = 0; i < static_cast<int>(working.size()); ++i) {
    groups[{working[static_cast<std::size_t>(i)].scene_id,
            working[static_cast<std::size_t>(i)].variant}]
        .push_back(i);
  }

  AdamConfig adam;
  adam.lr = options.lr;
  Rng rng(derive_seed(options.seed, 0x7261696e));
  FitResult result;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::vector<std::vector<int>> batches;
    for (auto& [key, idx] : groups) {
      rng.shuffle(idx);
      for (std::size_t at = 0; at < idx.size(); at += static_cast<std::size_t>(options.batch_size)) {
        const std::size_t end = std::min(idx.size(), at + static_cast<std::size_t>(options.batch_size));
        batches.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(at),
                             idx.begin() + static_cast<std::ptrdiff_t>(end));
      }
    }
    rng.shuffle(batches);

    EpochStats stats;
    stats.epoch = epoch;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::vector<const TrainSample<Scalar>*> batch;
      for (int i : batches[b]) batch.push_back(&working[static_cast<std::size_t>(i)]);
      const auto loss = train_on_batch(model, batch, options.weights, adam);
      if (!std::isfinite(loss.total)) {
        throw NumericalError("fit: non-finite loss in epoch " + std::to_string(epoch) + " batch " +
                             std::to_string(b) + " (scene '" + batch.front()->scene_id + "')");
      }
      stats.goal += loss.goal;
      stats.waypoint += loss.waypoint;
      stats.trajectory += loss.trajectory;
      stats.total += loss.total;
    }
    const double nb = static_cast<double>(batches.size());
    stats.goal /= nb;
    stats.waypoint /= nb;
    stats.trajectory /= nb;
    stats.total /= nb;
    result.curve.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

}  // namespace ynet
