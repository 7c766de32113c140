#pragma once

// Central-difference check of nncore's analytic cross-entropy gradients.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rads/nncore.hpp"

namespace oracle {

inline double loss_with_seed(const rads::nn::Mlp& net, const Eigen::MatrixXd& x,
                             const std::vector<int>& y, const std::vector<double>& w,
                             rads::nn::ForwardMode mode, std::uint64_t seed) {
  rads::nn::Rng rng(seed);
  return rads::nn::cross_entropy_gradients(net, x, y, w, mode, rng).loss;
}

// Largest relative deviation between analytic and central-difference
// gradients over every parameter. The dropout mask is pinned by the seed.
inline double gradient_check(rads::nn::Mlp net, const Eigen::MatrixXd& x,
                             const std::vector<int>& y, const std::vector<double>& w,
                             rads::nn::ForwardMode mode, std::uint64_t seed) {
  rads::nn::Rng rng(seed);
  const auto analytic = rads::nn::cross_entropy_gradients(net, x, y, w, mode, rng).grads;
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto check = [&](double& param, double grad) {
      const double saved = param;
      param = saved + h;
      const double up = loss_with_seed(net, x, y, w, mode, seed);
      param = saved - h;
      const double down = loss_with_seed(net, x, y, w, mode, seed);
      param = saved;
      const double numeric = (up - down) / (2 * h);
      const double rel =
          std::abs(numeric - grad) / std::max(std::abs(numeric) + std::abs(grad), 1e-7);
      worst = std::max(worst, rel);
    };
    auto& layer = net.layers()[l];
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      check(layer.weight.data()[i], analytic[l].weight.data()[i]);
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      check(layer.bias.data()[i], analytic[l].bias.data()[i]);
    }
  }
  return worst;
}

}  // namespace oracle
