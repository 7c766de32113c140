#pragma once

// Reference selectors: random, lowest-confidence, MI top-k, and greedy
// utility-with-redundancy (the no-RL ablation; lambda = 0 gives utility top-k).
// Every selector rejects budget < 1 or budget > pool size with ParameterError
// and breaks score ties by ascending id.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "rads/acquisition.hpp"
#include "rads/selection.hpp"
#include "rads/signals.hpp"

namespace rads::baselines {

enum class Kind { kRandom, kUncertainty, kMiOnly, kGreedyUtility };

std::string_view name(Kind kind);
std::optional<Kind> parse_kind(std::string_view text);

struct BaselineSpec {
  Kind kind = Kind::kRandom;
  int budget = 1;
  std::uint64_t seed = 0;
};

SelectionResult select_random(std::span<const SignalRecord> pool, int budget,
                              std::uint64_t seed);

SelectionResult select_uncertainty(std::span<const SignalRecord> pool, int budget);

SelectionResult select_mi(std::span<const SignalRecord> pool, int budget);

// rewards[i] is the objective u - lambda * Red of the i-th pick.
SelectionResult select_greedy_utility(std::span<const SignalRecord> pool,
                                      const ClassWeights& weights, int budget,
                                      double lambda);

SelectionResult run(const BaselineSpec& spec, std::span<const SignalRecord> pool,
                    const ClassWeights& weights, double lambda);

}  // namespace rads::baselines
