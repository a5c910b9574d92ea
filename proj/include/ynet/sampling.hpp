#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ynet/errors.hpp"
#include "ynet/geometry.hpp"
#include "ynet/rng.hpp"
#include "ynet/tensor.hpp"

// Turns estimated probability maps into discrete goal / waypoint / path
// hypotheses. All functions are pure given an explicit seed.

namespace ynet {

/// Non-negative H x W grid treated as an unnormalized spatial distribution.
struct ProbabilityMap {
  Eigen::ArrayXXd grid;  // (row i = y, col j = x)
  bool normalized = false;

  int height() const { return static_cast<int>(grid.rows()); }
  int width() const { return static_cast<int>(grid.cols()); }

  void validate() const {
    if (!grid.isFinite().all()) throw NumericalError("probability map contains NaN/inf");
    if ((grid < 0.0).any()) throw NumericalError("probability map has negative entries");
  }
};

template <typename Scalar>
ProbabilityMap to_probability_map(const Tensor<Scalar>& maps, int channel) {
  ProbabilityMap m;
  m.grid = maps.channel(channel).template cast<double>();
  return m;
}

/// The softmax-weighted coordinate expectation, exactly as the displayed
/// formula: the grid values are exponentiated directly, i.e. treated as
/// logits. Max-subtraction keeps the exponentials finite. Returns (x, y).
inline Point softargmax(const Eigen::ArrayXXd& values) {
  const double m = values.maxCoeff();
  const Eigen::ArrayXXd e = (values - m).exp();
  const double total = e.sum();
  double ey = 0.0, ex = 0.0;
  for (Eigen::Index i = 0; i < e.rows(); ++i) ey += static_cast<double>(i) * e.row(i).sum();
  for (Eigen::Index j = 0; j < e.cols(); ++j) ex += static_cast<double>(j) * e.col(j).sum();
  return Point(ex / total, ey / total);
}

/// softargmax applied in the log domain of a probability-valued map, which
/// reduces to the mass-weighted coordinate mean. This is the form the
/// sampling pipeline uses on sigmoid/fused maps: exponentiating values that
/// live in (0, 1) directly would flatten them towards the grid centroid.
inline Point distribution_mean(const ProbabilityMap& map) {
  const double total = map.grid.sum();
  if (!(total > 0.0)) throw NumericalError("distribution_mean: zero-mass map");
  double ey = 0.0, ex = 0.0;
  for (Eigen::Index i = 0; i < map.grid.rows(); ++i) {
    ey += static_cast<double>(i) * map.grid.row(i).sum();
  }
  for (Eigen::Index j = 0; j < map.grid.cols(); ++j) {
    ex += static_cast<double>(j) * map.grid.col(j).sum();
  }
  return Point(ex / total, ey / total);
}

/// Zeroes every entry below max(X) * 0.01; the arg-max cell always survives.
inline ProbabilityMap relative_threshold(const ProbabilityMap& map) {
  const double peak = map.grid.maxCoeff();
  if (!(peak > 0.0)) throw NumericalError("relative_threshold: all-zero map");
  const double thr = 0.01 * peak;
  ProbabilityMap out;
  out.grid = (map.grid < thr).select(0.0, map.grid);
  return out;
}

/// i.i.d. draws with replacement, P(i, j) proportional to the map values.
inline std::vector<Point> categorical_sample(const ProbabilityMap& map, int n, Rng& rng) {
  const int h = map.height(), w = map.width();
  std::vector<double> cumulative(static_cast<std::size_t>(h) * w);
  double acc = 0.0;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      acc += map.grid(i, j);
      cumulative[static_cast<std::size_t>(i) * w + j] = acc;
    }
  }
  if (!(acc > 0.0)) throw NumericalError("categorical_sample: zero-mass map");
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const int idx = static_cast<int>(std::min<std::ptrdiff_t>(
        it - cumulative.begin(), static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
    out.emplace_back(idx % w, idx / w);
  }
  return out;
}

/// Lloyd's algorithm with k-means++ seeding. Assignment ties go to the lowest
/// center index; an emptied cluster is reseeded at the point farthest from
/// its current center. Terminates when assignments stop changing or after
/// max_iterations. The per-assignment objective trace is non-increasing.
inline std::vector<Point> kmeans_centers(const std::vector<Point>& points, int k, Rng& rng,
                                         int max_iterations = 50,
                                         std::vector<double>* objective_trace = nullptr) {
  const int n = static_cast<int>(points.size());
  if (k <= 0) return {};
  if (n == 0) throw std::invalid_argument("kmeans_centers: no points");

  std::vector<Point> centers;
  centers.reserve(static_cast<std::size_t>(k));
  centers.push_back(points[static_cast<std::size_t>(rng.below(n))]);
  std::vector<double> d2(static_cast<std::size_t>(n));
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (const Point& c : centers) best = std::min(best, (points[static_cast<std::size_t>(i)] - c).squaredNorm());
      d2[static_cast<std::size_t>(i)] = best;
      total += best;
    }
    if (total <= 0.0) {
      centers.push_back(points[0]);  // all points coincide with a center
      continue;
    }
    double u = rng.uniform() * total;
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      u -= d2[static_cast<std::size_t>(i)];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(points[static_cast<std::size_t>(pick)]);
  }

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (points[static_cast<std::size_t>(i)] - centers[0]).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (points[static_cast<std::size_t>(i)] - centers[static_cast<std::size_t>(c)]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      objective += best_d;
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (objective_trace) objective_trace->push_back(objective);
    if (!changed) break;

    std::vector<Point> sums(static_cast<std::size_t>(k), Point::Zero());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] += points[static_cast<std::size_t>(i)];
      counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] += 1;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers[static_cast<std::size_t>(c)] = sums[static_cast<std::size_t>(c)] / counts[static_cast<std::size_t>(c)];
      } else {
        // Reseed at the point farthest from its assigned center.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d = (points[static_cast<std::size_t>(i)] -
                            centers[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])])
                               .squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers[static_cast<std::size_t>(c)] = points[static_cast<std::size_t>(far)];
      }
    }
  }
  return centers;
}

struct SampleBudget {
  int goal_count = 20;     // K_e
  int path_count = 1;      // K_a
  int monte_carlo = 10000; // draws before clustering
  std::uint64_t seed = 0;
};

/// Test-time sampling: threshold, Monte-Carlo draws, K-means down to
/// goal_count - 1 centers, plus the softargmax point of the thresholded map
/// (log-domain, see distribution_mean) at index 0.
inline std::vector<Point> ttst(const ProbabilityMap& map, const SampleBudget& budget) {
  if (budget.goal_count < 1) throw std::invalid_argument("ttst: goal count must be >= 1");
  if (budget.monte_carlo < budget.goal_count) {
    throw std::invalid_argument("ttst: Monte-Carlo draw count below goal count");
  }
  const ProbabilityMap kept = relative_threshold(map);
  std::vector<Point> out{distribution_mean(kept)};
  if (budget.goal_count == 1) return out;
  Rng rng(budget.seed);
  const std::vector<Point> draws = categorical_sample(kept, budget.monte_carlo, rng);
  const std::vector<Point> centers = kmeans_centers(draws, budget.goal_count - 1, rng);
  out.insert(out.end(), centers.begin(), centers.end());
  return out;
}

/// Anisotropic Gaussian prior anchored on the segment between the last
/// observation and the anchor (goal or already-fixed waypoint). Degenerate
/// segments fall back to an isotropic one-pixel prior.
struct WaypointPrior {
  Point mean;
  Eigen::Vector2d axis_parallel;  // unit vector along the segment
  double sigma_parallel = 0.0;
  double sigma_perp = 0.0;
};

inline WaypointPrior waypoint_prior(const Point& last_observed, const Point& anchor,
                                    double fraction, double alpha, double beta) {
  WaypointPrior prior;
  const Eigen::Vector2d delta = anchor - last_observed;
  const double dist = delta.norm();
  prior.mean = last_observed + fraction * delta;
  if (dist < 1e-9) {
    prior.axis_parallel = Eigen::Vector2d(1.0, 0.0);
    prior.sigma_perp = 1.0;
    prior.sigma_parallel = 1.0;
    return prior;
  }
  prior.axis_parallel = delta / dist;
  prior.sigma_perp = dist / alpha;
  prior.sigma_parallel = beta * prior.sigma_perp;
  return prior;
}

/// Pixel-wise product of the map with the unnormalized prior density,
/// renormalized to sum 1. Rejects when the remaining relative mass is below
/// exp(-18), i.e. all mass sits beyond the prior's 6-sigma box.
inline ProbabilityMap fuse_prior(const ProbabilityMap& map, const WaypointPrior& prior) {
  const Eigen::Vector2d perp(-prior.axis_parallel.y(), prior.axis_parallel.x());
  ProbabilityMap out;
  out.grid.resize(map.grid.rows(), map.grid.cols());
  for (Eigen::Index i = 0; i < map.grid.rows(); ++i) {
    for (Eigen::Index j = 0; j < map.grid.cols(); ++j) {
      const Eigen::Vector2d v(static_cast<double>(j) - prior.mean.x(),
                              static_cast<double>(i) - prior.mean.y());
      const double t_par = v.dot(prior.axis_parallel) / prior.sigma_parallel;
      const double t_perp = v.dot(perp) / prior.sigma_perp;
      out.grid(i, j) = map.grid(i, j) * std::exp(-0.5 * (t_par * t_par + t_perp * t_perp));
    }
  }
  const double mass = out.grid.sum();
  const double original = map.grid.sum();
  if (!(mass > original * std::exp(-18.0))) {
    throw NumericalError("fuse_prior: prior and prediction are disjoint (no mass within 6 sigma)");
  }
  out.grid /= mass;
  out.normalized = true;
  return out;
}

/// Conditioned waypoint sampling. Waypoints are fixed from the latest
/// (anchored on the goal) backwards; each hypothesis chain conditions on its
/// own previously fixed point. Hypothesis 0 takes the softargmax (log-domain)
/// of every fused map, the remaining path_count - 1 sample categorically.
/// Returned tuples are ordered earliest waypoint first.
inline std::vector<std::vector<Point>> conditioned_waypoint_sampling(
    const std::vector<ProbabilityMap>& waypoint_maps, const Point& goal, const Point& last_observed,
    int past_frames, int future_frames, const std::vector<int>& waypoint_frames, int path_count,
    std::uint64_t seed, double alpha = 6.0, double beta = 0.5) {
  if (waypoint_maps.size() != waypoint_frames.size()) {
    throw std::invalid_argument("conditioned_waypoint_sampling: map/frame count mismatch");
  }
  const int n_w = static_cast<int>(waypoint_maps.size());
  std::vector<std::vector<Point>> tuples(static_cast<std::size_t>(path_count),
                                         std::vector<Point>(static_cast<std::size_t>(n_w)));
  if (n_w == 0) return tuples;
  Rng rng(seed);
  const int goal_frame = past_frames + future_frames;
  for (int a = 0; a < path_count; ++a) {
    Point anchor = goal;
    int anchor_frame = goal_frame;
    for (int i = n_w - 1; i >= 0; --i) {
      const int frame = waypoint_frames[static_cast<std::size_t>(i)];
      // Time-proportional position along the segment to the current anchor;
      // equals (w_i - n_p) / n_f when the anchor is the goal.
      const double fraction = static_cast<double>(frame - past_frames) /
                              static_cast<double>(anchor_frame - past_frames);
      const WaypointPrior prior = waypoint_prior(last_observed, anchor, fraction, alpha, beta);
      const ProbabilityMap fused = fuse_prior(waypoint_maps[static_cast<std::size_t>(i)], prior);
      Point pick;
      if (a == 0) {
        pick = distribution_mean(fused);
      } else {
        pick = categorical_sample(fused, 1, rng)[0];
      }
      tuples[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = pick;
      anchor = pick;
      anchor_frame = frame;
    }
  }
  return tuples;
}

/// Per-timestep softargmax (log-domain) over the trajectory maps; the
/// conditioned waypoint steps and the final step are overwritten with the
/// sampled conditioning points themselves.
inline Trajectory trajectory_from_maps(const std::vector<ProbabilityMap>& maps,
                                       const std::vector<int>& waypoint_frames,
                                       const std::vector<Point>& waypoints, const Point& goal,
                                       int past_frames) {
  const int n_f = static_cast<int>(maps.size());
  Trajectory out(static_cast<std::size_t>(n_f));
  for (int k = 0; k < n_f; ++k) {
    out[static_cast<std::size_t>(k)] = distribution_mean(maps[static_cast<std::size_t>(k)]);
  }
  for (std::size_t i = 0; i < waypoint_frames.size(); ++i) {
    const int idx = waypoint_frames[i] - past_frames - 1;
    if (idx >= 0 && idx < n_f) out[static_cast<std::size_t>(idx)] = waypoints[i];
  }
  if (n_f > 0) out[static_cast<std::size_t>(n_f - 1)] = goal;
  return out;
}

/// sigmoid(logits / T) as an unnormalized probability map.
inline ProbabilityMap sigmoid_map(const Eigen::ArrayXXd& logits, double temperature) {
  ProbabilityMap out;
  out.grid = 1.0 / (1.0 + (-logits / temperature).exp());
  return out;
}

/// Shannon entropy (nats) of the renormalized map.
inline double map_entropy(const ProbabilityMap& map) {
  const double total = map.grid.sum();
  if (!(total > 0.0)) throw NumericalError("map_entropy: zero-mass map");
  double h = 0.0;
  for (Eigen::Index i = 0; i < map.grid.rows(); ++i) {
    for (Eigen::Index j = 0; j < map.grid.cols(); ++j) {
      const double p = map.grid(i, j) / total;
      if (p > 0.0) h -= p * std::log(p);
    }
  }
  return h;
}

}  // namespace ynet
