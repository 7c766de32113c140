#pragma once

// Prior-aware utility and redundancy scoring.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rads/signals.hpp"

namespace rads {

struct UtilityParams {
  double rho = 0.9;
  double clip_lo = 0.01;  // clip_hi is always 1 - clip_lo

  double clip_hi() const { return 1.0 - clip_lo; }
};

// Throws ParameterError unless 0 < rho < 1 and 0 < clip_lo < 0.5.
void validate(const UtilityParams& params);

struct ClassWeights {
  double w_plus = 1.0;
  double w_minus = 1.0;
};

ClassWeights class_weights(const PriorEstimate& prior, const UtilityParams& params);

double utility(const SignalRecord& record, const ClassWeights& weights);

// Distance to the nearest selected vector. std::nullopt stands for +infinity
// (nothing selected yet).
using NeighborDistance = std::optional<double>;

NeighborDistance nn_distance(const Eigen::VectorXd& l_bar,
                             std::span<const Eigen::VectorXd> selected);

// 0 for an empty selected set, otherwise 1 / (1 + nearest distance).
double redundancy(const Eigen::VectorXd& l_bar,
                  std::span<const Eigen::VectorXd> selected);

}  // namespace rads
