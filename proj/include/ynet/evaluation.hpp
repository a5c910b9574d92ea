#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ynet/errors.hpp"
#include "ynet/geometry.hpp"

namespace ynet {

/// One predicted future with its provenance in the K_e x K_a hypothesis grid.
struct Hypothesis {
  int goal_index = 0;
  int path_index = 0;
  Trajectory points;
  Point goal = Point::Zero();
  std::vector<Point> waypoints;
};

/// Mean Euclidean displacement over the whole trajectory.
inline double ade(const Trajectory& pred, const Trajectory& truth) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("ade: length mismatch (" + std::to_string(pred.size()) + " vs " +
                                std::to_string(truth.size()) + ")");
  }
  if (pred.empty()) throw std::invalid_argument("ade: empty trajectory");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += (pred[i] - truth[i]).norm();
  return acc / static_cast<double>(pred.size());
}

/// Euclidean displacement at the final point only.
inline double fde(const Trajectory& pred, const Trajectory& truth) {
  if (pred.empty() || truth.empty()) throw std::invalid_argument("fde: empty trajectory");
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("fde: length mismatch (" + std::to_string(pred.size()) + " vs " +
                                std::to_string(truth.size()) + ")");
  }
  return (pred.back() - truth.back()).norm();
}

struct EvalRecord {
  std::string scene_id;
  std::string agent_id;
  int window_index = 0;
  Trajectory ground_truth;
  std::vector<Hypothesis> hypotheses;

  // Filled by evaluate_record / evaluate_min_of_k.
  std::vector<double> ade_per_hypothesis;
  std::vector<double> fde_per_hypothesis;
  std::vector<double> fde_per_goal;  // FDE depends only on the goal hypothesis
  double min_ade = 0.0;
  double min_fde = 0.0;
  int best_ade_index = 0;  // ties broken by lowest hypothesis index
  int best_fde_index = 0;
};

inline void evaluate_record(EvalRecord& rec) {
  if (rec.hypotheses.empty()) throw DataError("record '" + rec.agent_id + "' has no hypotheses");
  rec.ade_per_hypothesis.clear();
  rec.fde_per_hypothesis.clear();
  rec.fde_per_goal.clear();
  rec.min_ade = std::numeric_limits<double>::max();
  rec.min_fde = std::numeric_limits<double>::max();
  int goal_count = 0;
  for (const auto& h : rec.hypotheses) goal_count = std::max(goal_count, h.goal_index + 1);
  rec.fde_per_goal.assign(static_cast<std::size_t>(goal_count), -1.0);
  for (std::size_t i = 0; i < rec.hypotheses.size(); ++i) {
    const auto& h = rec.hypotheses[i];
    const double a = ade(h.points, rec.ground_truth);
    const double f = fde(h.points, rec.ground_truth);
    rec.ade_per_hypothesis.push_back(a);
    rec.fde_per_hypothesis.push_back(f);
    if (a < rec.min_ade) {
      rec.min_ade = a;
      rec.best_ade_index = static_cast<int>(i);
    }
    if (f < rec.min_fde) {
      rec.min_fde = f;
      rec.best_fde_index = static_cast<int>(i);
    }
    if (rec.fde_per_goal[static_cast<std::size_t>(h.goal_index)] < 0.0) {
      rec.fde_per_goal[static_cast<std::size_t>(h.goal_index)] = f;
    }
  }
}

struct EvalSummary {
  std::string dataset;
  int agent_count = 0;
  int goal_count = 0;  // K_e
  int path_count = 0;  // K_a
  double min_ade = 0.0;
  double min_fde = 0.0;
  std::string units = "pixels";
};

/// Per agent, the min over all hypotheses of ADE and (independently) FDE;
/// the summary is the mean of those minima over agents.
inline EvalSummary evaluate_min_of_k(std::vector<EvalRecord>& records) {
  if (records.empty()) throw DataError("evaluate_min_of_k: no records");
  EvalSummary s;
  for (auto& rec : records) {
    evaluate_record(rec);
    s.min_ade += rec.min_ade;
    s.min_fde += rec.min_fde;
    for (const auto& h : rec.hypotheses) {
      s.goal_count = std::max(s.goal_count, h.goal_index + 1);
      s.path_count = std::max(s.path_count, h.path_index + 1);
    }
  }
  s.agent_count = static_cast<int>(records.size());
  s.min_ade /= s.agent_count;
  s.min_fde /= s.agent_count;
  return s;
}

/// Extrapolates the last observed displacement linearly.
inline Trajectory constant_velocity_baseline(const std::vector<Point>& past, int n_future) {
  if (past.size() < 2) {
    throw std::invalid_argument("constant_velocity_baseline needs at least 2 past points");
  }
  const Point v = past.back() - past[past.size() - 2];
  Trajectory out;
  out.reserve(static_cast<std::size_t>(n_future));
  for (int k = 1; k <= n_future; ++k) out.push_back(past.back() + static_cast<double>(k) * v);
  return out;
}

/// Scales a trajectory back to original-resolution pixels.
inline Trajectory upscale(const Trajectory& t, double downsample_factor) {
  Trajectory out;
  out.reserve(t.size());
  for (const auto& p : t) out.push_back(p * downsample_factor);
  return out;
}

}  // namespace ynet
