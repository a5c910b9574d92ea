#pragma once

#include <cmath>
#include <vector>

#include "ynet/tensor.hpp"

namespace ynet {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update over the given parameters. Deterministic:
/// no state beyond the per-parameter moments and step counters.
template <typename Scalar>
void adam_step(std::vector<Parameter<Scalar>*>& params, const AdamConfig& cfg) {
  for (Parameter<Scalar>* p : params) {
    if (!p->value.has_grad()) {
      throw std::invalid_argument("adam_step: parameter '" + p->name + "' has no gradient");
    }
    p->step += 1;
    const auto& g = p->value.grad();
    const Scalar b1 = static_cast<Scalar>(cfg.beta1);
    const Scalar b2 = static_cast<Scalar>(cfg.beta2);
    p->moment1 = b1 * p->moment1 + (Scalar(1) - b1) * g;
    p->moment2 = b2 * p->moment2 + (Scalar(1) - b2) * g * g;
    const Scalar c1 = static_cast<Scalar>(1.0 - std::pow(cfg.beta1, static_cast<double>(p->step)));
    const Scalar c2 = static_cast<Scalar>(1.0 - std::pow(cfg.beta2, static_cast<double>(p->step)));
    p->value.values() -= static_cast<Scalar>(cfg.lr) * (p->moment1 / c1) /
                         ((p->moment2 / c2).sqrt() + static_cast<Scalar>(cfg.eps));
  }
}

}  // namespace ynet
