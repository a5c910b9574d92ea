#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "ynet/rng.hpp"
#include "ynet/tensor.hpp"

// Central finite-difference oracle for the hand-written backward passes.
// The scalar probe is L = sum(f() .* R) for a fixed random R; the analytic
// gradient comes from seeding the output gradient with R and replaying the
// tape, the reference from (L(x+h) - L(x-h)) / 2h entry by entry.

namespace oracle {

using ynet::Tape;
using ynet::Tensor;

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

/// Max relative error over all entries of `wrt`. `forward` must reuse the
/// same underlying tensors on every call (shared storage makes perturbations
/// visible to it).
inline double max_grad_error(Tensor<double>& wrt,
                             const std::function<Tensor<double>(Tape<double>*)>& forward,
                             std::uint64_t seed, double h = 1e-5) {
  wrt.ensure_grad();
  wrt.zero_grad();
  Tape<double> tape;
  Tensor<double> out = forward(&tape);
  ynet::Rng rng(seed);
  Tensor<double>::Array probe(out.size());
  for (int i = 0; i < out.size(); ++i) probe[i] = rng.uniform(-1.0, 1.0);
  out.ensure_grad();
  out.grad() = probe;
  tape.backward();
  const Tensor<double>::Array analytic = wrt.grad();

  auto loss = [&]() {
    const Tensor<double> y = forward(nullptr);
    return (y.values() * probe).sum();
  };
  double worst = 0.0;
  for (int k = 0; k < wrt.size(); ++k) {
    const double v = wrt.values()[k];
    wrt.values()[k] = v + h;
    const double lp = loss();
    wrt.values()[k] = v - h;
    const double lm = loss();
    wrt.values()[k] = v;
    worst = std::max(worst, rel_error(analytic[k], (lp - lm) / (2.0 * h)));
  }
  return worst;
}

/// Shuffled, evenly spaced values with a guaranteed pairwise gap, for ops with
/// kinks (max pooling) where near-ties would break finite differences.
inline void fill_separated(Tensor<double>& t, ynet::Rng& rng, double lo = 0.0, double hi = 1.0) {
  const int n = t.size();
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  for (int i = 0; i < n; ++i) {
    t.values()[order[static_cast<std::size_t>(i)]] = lo + (hi - lo) * (i + 0.5) / n;
  }
}

inline void fill_uniform(Tensor<double>& t, ynet::Rng& rng, double lo = -1.0, double hi = 1.0) {
  for (int i = 0; i < t.size(); ++i) t.values()[i] = rng.uniform(lo, hi);
}

}  // namespace oracle
