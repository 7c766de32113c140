#include "rads/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "rads/error.hpp"

namespace rads::baselines {

namespace {

void check_budget(std::span<const SignalRecord> pool, int budget) {
  if (budget < 1) throw ParameterError("budget must be at least 1");
  if (static_cast<std::size_t>(budget) > pool.size()) {
    throw ParameterError("budget " + std::to_string(budget) + " exceeds pool size " +
                         std::to_string(pool.size()));
  }
}

// Top-`budget` indices under `before` (strict weak order), ties by id.
template <typename Before>
SelectionResult top_k(std::span<const SignalRecord> pool, int budget, std::string policy,
                      Before before) {
  check_budget(pool, budget);
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (before(pool[a], pool[b])) return true;
    if (before(pool[b], pool[a])) return false;
    return pool[a].id < pool[b].id;
  });
  SelectionResult out;
  out.policy = std::move(policy);
  out.budget = budget;
  for (int i = 0; i < budget; ++i) out.selected.push_back(pool[idx[i]].id);
  return out;
}

}  // namespace

std::string_view name(Kind kind) {
  switch (kind) {
    case Kind::kRandom: return "random";
    case Kind::kUncertainty: return "uncertainty";
    case Kind::kMiOnly: return "mi_only";
    case Kind::kGreedyUtility: return "greedy_utility";
  }
  return "unknown";
}

std::optional<Kind> parse_kind(std::string_view text) {
  for (Kind k : {Kind::kRandom, Kind::kUncertainty, Kind::kMiOnly, Kind::kGreedyUtility}) {
    if (name(k) == text) return k;
  }
  return std::nullopt;
}

SelectionResult select_random(std::span<const SignalRecord> pool, int budget,
                              std::uint64_t seed) {
  check_budget(pool, budget);
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  SelectionResult out;
  out.policy = "random";
  out.budget = budget;
  for (int i = 0; i < budget; ++i) out.selected.push_back(pool[idx[i]].id);
  return out;
}

SelectionResult select_uncertainty(std::span<const SignalRecord> pool, int budget) {
  return top_k(pool, budget, "uncertainty", [](const SignalRecord& a, const SignalRecord& b) {
    return a.p_bar.maxCoeff() < b.p_bar.maxCoeff();
  });
}

SelectionResult select_mi(std::span<const SignalRecord> pool, int budget) {
  return top_k(pool, budget, "mi_only",
               [](const SignalRecord& a, const SignalRecord& b) { return a.mi > b.mi; });
}

SelectionResult select_greedy_utility(std::span<const SignalRecord> pool,
                                      const ClassWeights& weights, int budget,
                                      double lambda) {
  check_budget(pool, budget);
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be non-negative");
  std::vector<double> u(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) u[i] = utility(pool[i], weights);

  std::vector<bool> taken(pool.size(), false);
  std::vector<Eigen::VectorXd> chosen;
  SelectionResult out;
  out.policy = "greedy_utility";
  out.budget = budget;
  for (int step = 0; step < budget; ++step) {
    std::size_t best = pool.size();
    double best_score = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      const double score = u[i] - lambda * redundancy(pool[i].l_bar, chosen);
      if (best == pool.size() || score > best_score ||
          (score == best_score && pool[i].id < pool[best].id)) {
        best = i;
        best_score = score;
      }
    }
    taken[best] = true;
    chosen.push_back(pool[best].l_bar);
    out.selected.push_back(pool[best].id);
    out.rewards.push_back(best_score);
  }
  return out;
}

SelectionResult run(const BaselineSpec& spec, std::span<const SignalRecord> pool,
                    const ClassWeights& weights, double lambda) {
  switch (spec.kind) {
    case Kind::kRandom: return select_random(pool, spec.budget, spec.seed);
    case Kind::kUncertainty: return select_uncertainty(pool, spec.budget);
    case Kind::kMiOnly: return select_mi(pool, spec.budget);
    case Kind::kGreedyUtility: return select_greedy_utility(pool, weights, spec.budget, lambda);
  }
  throw ParameterError("unknown baseline kind");
}

}  // namespace rads::baselines
