#include "rads/acquisition.hpp"

#include <algorithm>
#include <cmath>

#include "rads/error.hpp"

namespace rads {

void validate(const UtilityParams& params) {
  if (!(params.rho > 0.0 && params.rho < 1.0)) {
    throw ParameterError("rho must lie in (0, 1)");
  }
  if (!(params.clip_lo > 0.0 && params.clip_lo < 0.5)) {
    throw ParameterError("clip_lo must lie in (0, 0.5)");
  }
}

ClassWeights class_weights(const PriorEstimate& prior, const UtilityParams& params) {
  validate(params);
  const double c = std::clamp(prior.pi_plus, params.clip_lo, params.clip_hi());
  return {params.rho / c, (1.0 - params.rho) / (1.0 - c)};
}

double utility(const SignalRecord& record, const ClassWeights& weights) {
  return record.mi_norm * (record.pseudo_label == 1 ? weights.w_plus : weights.w_minus);
}

NeighborDistance nn_distance(const Eigen::VectorXd& l_bar,
                             std::span<const Eigen::VectorXd> selected) {
  if (selected.empty()) return std::nullopt;
  double best = INFINITY;
  for (const auto& s : selected) {
    if (s.size() != l_bar.size()) {
      throw ParameterError("nn_distance: vectors differ in dimension");
    }
    best = std::min(best, (l_bar - s).norm());
  }
  return best;
}

double redundancy(const Eigen::VectorXd& l_bar,
                  std::span<const Eigen::VectorXd> selected) {
  const NeighborDistance d = nn_distance(l_bar, selected);
  return d ? 1.0 / (1.0 + *d) : 0.0;
}

}  // namespace rads
