// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. `--only <name>` runs a single criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "rads/acquisition.hpp"
#include "rads/baselines.hpp"
#include "rads/cli.hpp"
#include "rads/corpusgap.hpp"
#include "rads/harness.hpp"
#include "rads/rlsampler.hpp"
#include "rads/signals.hpp"

using namespace rads;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Verdict signal_oracle() {
  Verdict v;
  const auto t0 = Clock::now();
  oracle::Rng rng(101);
  std::uniform_int_distribution<int> size(1, 50), passes(1, 10);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto pool = oracle::random_pool(rng, size(rng), passes(rng));
    const auto recs = build_signals(pool);
    const auto ref = oracle::signals(pool);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      worst = std::max({worst, std::abs(recs[i].pe - ref.pe[i]), std::abs(recs[i].ee - ref.ee[i]),
                        std::abs(recs[i].mi - ref.mi[i]),
                        std::abs(recs[i].mi_norm - ref.mi_norm[i])});
      v.require(recs[i].pseudo_label == ref.pseudo[i], "pseudo label mismatch");
    }
    worst = std::max(worst, std::abs(estimate_priors(recs).pi_plus - ref.pi_plus));
  }
  const double secs = seconds_since(t0);
  v.require(worst <= 1e-9, fmt::format("max deviation {:.3g} > 1e-9", worst));
  v.require(secs < 5.0, fmt::format("runtime {:.2f}s >= 5s", secs));
  if (v.pass) v.detail = fmt::format("max deviation {:.3g}, {:.2f}s", worst, secs);
  return v;
}

Verdict entropy_identities() {
  Verdict v;
  const auto t0 = Clock::now();
  const double ln2 = std::log(2.0);
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> passes(1, 10);
  double worst_identical = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int k = passes(rng);
    Eigen::MatrixXd probs(k, 2);
    for (int r = 0; r < k; ++r) {
      double p = u(rng);
      if (trial % 10 == 0) p = std::round(p);
      probs(r, 0) = p;
      probs(r, 1) = 1.0 - p;
    }
    const auto e = entropies(probs);
    v.require(e.mi >= 0.0, fmt::format("trial {}: MI < 0", trial));
    v.require(e.mi <= e.pe + 1e-12, fmt::format("trial {}: MI > PE", trial));
    v.require(e.pe <= ln2 + 1e-12, fmt::format("trial {}: PE > ln 2", trial));

    Eigen::MatrixXd same(k, 2);
    for (int r = 0; r < k; ++r) same.row(r) = probs.row(0);
    worst_identical = std::max(worst_identical, entropies(same).mi);
  }
  const double secs = seconds_since(t0);
  v.require(worst_identical <= 1e-12,
            fmt::format("MI of identical rows {:.3g} > 1e-12", worst_identical));
  v.require(secs < 5.0, fmt::format("runtime {:.2f}s >= 5s", secs));
  if (v.pass) {
    v.detail = fmt::format("10000 pools, identical-row MI <= {:.3g}, {:.2f}s", worst_identical, secs);
  }
  return v;
}

Verdict utility_arithmetic() {
  Verdict v;
  const UtilityParams params{0.9, 0.01};
  const auto w = class_weights({0.5, 0.5, 10}, params);
  v.require(w.w_plus == 0.9 / 0.5, "w+ != rho / pi+");
  v.require(w.w_minus == (1.0 - 0.9) / (1.0 - 0.5), "w- != (1 - rho) / (1 - pi+)");
  v.require(std::abs(w.w_plus - 1.8) <= 1e-15 && std::abs(w.w_minus - 0.2) <= 1e-15,
            fmt::format("weights {} / {} differ from 1.8 / 0.2", w.w_plus, w.w_minus));

  SignalRecord pos, neg;
  pos.mi_norm = neg.mi_norm = 0.625;
  pos.pseudo_label = 1;
  neg.pseudo_label = 0;
  v.require(utility(pos, w) == 0.625 * w.w_plus, "u != mi_norm * w+ for a pseudo positive");
  v.require(utility(neg, w) == 0.625 * w.w_minus, "u != mi_norm * w- for a pseudo negative");

  const auto at0 = class_weights({0.0, 1.0, 10}, params);
  const auto at1 = class_weights({1.0, 0.0, 10}, params);
  v.require(std::abs(at0.w_plus - 0.9 / 0.01) <= 1e-12 &&
                std::abs(at0.w_minus - (1.0 - 0.9) / 0.99) <= 1e-15,
            "clip does not engage at pi+ = 0");
  v.require(std::abs(at1.w_plus - 0.9 / 0.99) <= 1e-15 &&
                std::abs(at1.w_minus - (1.0 - 0.9) / 0.01) <= 1e-12,
            "clip does not engage at pi+ = 1");
  v.require(std::isfinite(at0.w_plus) && std::isfinite(at1.w_minus), "non-finite clipped weight");
  if (v.pass) {
    v.detail = fmt::format("w+={} w-={}, clipped w+(0)={} w-(1)={}", w.w_plus, w.w_minus,
                           at0.w_plus, at1.w_minus);
  }
  return v;
}

Verdict reward_accounting() {
  Verdict v;
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> coin(0, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    oracle::Rng prng(1000 + static_cast<std::uint64_t>(trial));
    const int n = 2 + trial % 30;
    const auto pool = build_signals(oracle::random_pool(prng, n, 1 + trial % 10));
    const auto w = class_weights(estimate_priors(pool), {});
    const double lambda = 0.01 * (1 + trial % 5);
    const int budget = 1 + trial % n;
    rl::SelectionEnv env(pool, w, {budget, lambda, static_cast<std::uint64_t>(trial)});
    env.reset(static_cast<std::uint64_t>(trial));
    double total = 0.0;
    while (!env.done()) {
      const int a = coin(rng);
      const auto step = env.step(a);
      if (a == 0) v.require(step.reward == 0.0, "reject earned a nonzero reward");
      total += step.reward;
    }
    const double ref =
        oracle::episode_return(pool, env.state().selected, w.w_plus, w.w_minus, lambda);
    worst = std::max(worst, std::abs(total - ref));
  }
  v.require(worst <= 1e-9, fmt::format("return deviation {:.3g} > 1e-9", worst));

  Eigen::VectorXd x(2);
  x << -0.4, -1.1;
  const std::vector<Eigen::VectorXd> none;
  const std::vector<Eigen::VectorXd> same{x};
  v.require(redundancy(x, none) == 0.0, "Red(x, {}) != 0");
  v.require(redundancy(x, same) == 1.0, "Red at distance 0 != 1");
  if (v.pass) v.detail = fmt::format("100 traces, max deviation {:.3g}", worst);
  return v;
}

Verdict gradients_and_dueling() {
  Verdict v;
  nn::Rng rng(505);
  std::uniform_int_distribution<int> width(1, 6);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int in = width(rng);
    std::vector<int> dims{in, width(rng) + 1};
    if (trial % 2 == 0) dims.push_back(width(rng) + 1);
    dims.push_back(2 + trial % 2);
    const double rate = trial % 3 == 0 ? 0.0 : 0.3;
    nn::Mlp net(dims, rate, 300 + static_cast<std::uint64_t>(trial));
    for (auto& layer : net.layers()) layer.bias.setRandom();
    const int n = 1 + trial % 6;
    Eigen::MatrixXd x(in, n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    std::vector<int> y;
    for (int i = 0; i < n; ++i) y.push_back(i % dims.back());
    std::vector<double> w;
    if (trial % 4 == 1) {
      for (int c = 0; c < dims.back(); ++c) w.push_back(0.5 + c);
    }
    const auto mode = rate > 0 ? nn::ForwardMode::kDropout : nn::ForwardMode::kDeterministic;
    worst = std::max(worst, oracle::gradient_check(net, x, y, w, mode,
                                                   11 + static_cast<std::uint64_t>(trial)));
  }
  v.require(worst < 1e-4, fmt::format("max relative gradient error {:.3g}", worst));

  // Dyadic values keep every operation exact.
  std::uniform_int_distribution<int> q(-64, 64);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::RowVectorXd value(3);
    Eigen::MatrixXd adv(2, 3);
    for (int j = 0; j < 3; ++j) {
      value(j) = q(rng) / 8.0;
      adv(0, j) = q(rng) / 8.0;
      adv(1, j) = q(rng) / 8.0;
    }
    const Eigen::MatrixXd qv = rl::dueling_combine(value, adv);
    for (int j = 0; j < 3; ++j) {
      const double mean = (adv(0, j) + adv(1, j)) / 2.0;
      v.require(qv(0, j) == value(j) + adv(0, j) - mean &&
                    qv(1, j) == value(j) + adv(1, j) - mean,
                "dueling combine differs from V + A - mean(A)");
    }
    const double shift = q(rng) / 4.0;
    const Eigen::MatrixXd shifted = rl::dueling_combine(value, adv.array() + shift);
    v.require(shifted == qv, "constant advantage shift changed Q");
    for (int j = 0; j < 3; ++j) {
      v.require(rl::greedy_action(qv.col(j)) == rl::greedy_action(shifted.col(j)),
                "constant advantage shift changed the greedy action");
    }
  }
  if (v.pass) v.detail = fmt::format("50 nets, max relative error {:.3g}", worst);
  return v;
}

Verdict td_sanity() {
  Verdict v;
  using rl::StateVector;
  using rl::Transition;
  const StateVector s0{1, 0, 0, 0, 0}, s1{0, 1, 0, 0, 0};
  const std::vector<Transition> batch{{s0, 1, 1.0, s0, true},
                                      {s0, 0, 0.0, s1, false},
                                      {s1, 1, 0.5, s1, true},
                                      {s1, 0, 0.0, s0, false}};
  // Indexed [reject, accept]: Q*(s0) = [0.95 * 0.95, 1], Q*(s1) = [0.95, 0.5].
  const double gamma = 0.95;
  rl::DuelingQNet online(16, 9);
  rl::DuelingQNet target = online;
  rl::QOptimizer opt(online, 3e-3);
  const Eigen::VectorXd y0 = rl::td_targets(target, batch, gamma);
  v.require(y0(0) == 1.0 && y0(2) == 0.5, "terminal target differs from the reward");
  int updates = 0;
  for (; updates < 20000; ++updates) {
    rl::td_update(online, target, batch, gamma, opt);
    if ((updates + 1) % 50 == 0) target = online;
  }
  const auto q0 = rl::q_forward(online, s0);
  const auto q1 = rl::q_forward(online, s1);
  const double err = std::max({std::abs(q0(0) - 0.9025), std::abs(q0(1) - 1.0),
                               std::abs(q1(0) - 0.95), std::abs(q1(1) - 0.5)});
  v.require(err < 0.05, fmt::format("max |Q - Q*| {:.4f} >= 0.05", err));
  if (v.pass) v.detail = fmt::format("max |Q - Q*| {:.4f} after {} updates", err, updates);
  return v;
}

Verdict greedy_vs_brute_force() {
  Verdict v;
  const auto t0 = Clock::now();
  for (int trial = 0; trial < 200; ++trial) {
    oracle::Rng prng(700 + static_cast<std::uint64_t>(trial));
    const int n = 1 + trial % 12;
    const int budget = std::min(n, 1 + trial % 3);
    const auto pool = build_signals(oracle::random_pool(prng, n, 1 + trial % 8));
    const auto w = class_weights(estimate_priors(pool), {});
    const double lambda = std::array{0.0, 0.01, 0.5, 2.0}[trial % 4];
    const auto got = baselines::select_greedy_utility(pool, w, budget, lambda);
    const auto ref = oracle::brute_force_greedy(pool, budget, w.w_plus, w.w_minus, lambda);
    bool same = got.budget_used() == budget;
    for (int k = 0; same && k < budget; ++k) {
      const auto i = static_cast<std::size_t>(k);
      same = got.selected[i] == pool[ref.picks[i]].id && got.rewards[i] == ref.objectives[i];
    }
    v.require(same, fmt::format("trial {} (N={}, B={}) differs from the exhaustive trace", trial,
                                n, budget));
  }
  const double secs = seconds_since(t0);
  v.require(secs < 10.0, fmt::format("runtime {:.2f}s >= 10s", secs));
  if (v.pass) v.detail = fmt::format("200 pools, {:.2f}s", secs);
  return v;
}

// ---------------------------------------------------------------------------
// Synthetic transfer experiments

const harness::Domains& domains() {
  static const harness::Domains d =
      harness::generate_domains(harness::default_source_spec(0), harness::default_target_spec(0));
  return d;
}

struct PolicyMeans {
  double target_f1 = 0.0;
  double zero_shot_f1 = 0.0;
};

std::map<harness::Policy, PolicyMeans>& transfer_cache() {
  static std::map<harness::Policy, PolicyMeans> cache;
  return cache;
}

double transfer_seconds = 0.0;

const PolicyMeans& transfer_means(harness::Policy policy) {
  auto& cache = transfer_cache();
  if (auto it = cache.find(policy); it != cache.end()) return it->second;
  const auto t0 = Clock::now();
  PolicyMeans m;
  const harness::TransferConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    harness::TransferTrace trace;
    m.target_f1 += harness::run_transfer(domains(), policy, 5, cfg, seed, &trace).target.f1 / 5.0;
    m.zero_shot_f1 += trace.zero_shot_target_f1 / 5.0;
  }
  transfer_seconds += seconds_since(t0);
  return cache[policy] = m;
}

Verdict budget_properties() {
  Verdict v;
  std::vector<int> budgets;
  for (int b = 1; b <= 16; ++b) budgets.push_back(b);
  const std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  harness::TransferConfig cfg;
  cfg.bootstrap_resamples = 1;
  const auto rows = harness::sweep(domains(), harness::Policy::kRads, budgets, seeds, cfg);
  int short_cells = 0;
  int large_short = 0;
  for (const auto& r : rows) {
    v.require(r.budget_used <= r.budget,
              fmt::format("budget {} seed {}: used {}", r.budget, r.seed, r.budget_used));
    if (r.budget_used < r.budget) {
      ++short_cells;
      if (r.budget >= 8) ++large_short;
    }
  }
  v.require(large_short > 0, "every cell with budget >= 8 consumed its full budget");
  if (v.pass) {
    v.detail = fmt::format("{} cells, {} under budget ({} with budget >= 8)", rows.size(),
                           short_cells, large_short);
  }
  return v;
}

Verdict transfer_direction() {
  Verdict v;
  const auto& rads = transfer_means(harness::Policy::kRads);
  const auto& random = transfer_means(harness::Policy::kRandom);
  const double zero = rads.zero_shot_f1;
  v.require(rads.target_f1 - random.target_f1 >= 0.03,
            fmt::format("rads - random = {:.4f} < 0.03", rads.target_f1 - random.target_f1));
  v.require(rads.target_f1 > zero && random.target_f1 > zero, "a policy does not beat zero-shot");
  v.require(transfer_seconds < 300.0, fmt::format("runtime {:.1f}s >= 300s", transfer_seconds));
  const std::string numbers =
      fmt::format("target F1 rads {:.4f}, random {:.4f}, zero-shot {:.4f}", rads.target_f1,
                  random.target_f1, zero);
  v.detail = v.pass ? numbers : v.detail + "; " + numbers;
  return v;
}

Verdict ablation_ordering() {
  Verdict v;
  const double rads = transfer_means(harness::Policy::kRads).target_f1;
  const double greedy = transfer_means(harness::Policy::kGreedyUtility).target_f1;
  const double mi = transfer_means(harness::Policy::kMiOnly).target_f1;
  v.require(rads >= greedy, fmt::format("rads {:.4f} < greedy_utility {:.4f}", rads, greedy));
  v.require(greedy > mi, fmt::format("greedy_utility {:.4f} <= mi_only {:.4f}", greedy, mi));
  const std::string numbers = fmt::format("target F1 rads {:.4f}, greedy_utility {:.4f}, mi_only {:.4f}",
                                          rads, greedy, mi);
  v.detail = v.pass ? numbers : v.detail + "; " + numbers;
  return v;
}

Verdict metrics_oracle() {
  Verdict v;
  const std::vector<int> pred{1, 1, 1, 0, 0};
  const std::vector<int> lab{1, 1, 0, 1, 0};
  const std::vector<double> sc{0.9, 0.8, 0.7, 0.2, 0.1};
  const auto m = harness::metrics(pred, sc, lab);
  const double third2 = 2.0 / 3.0;
  v.require(std::abs(m.precision - third2) <= 1e-12 && std::abs(m.recall - third2) <= 1e-12 &&
                std::abs(m.f1 - third2) <= 1e-12,
            "P/R/F1 hand case differs from 2/3");
  const std::vector<double> s4{0.9, 0.8, 0.3, 0.2};
  v.require(std::abs(harness::roc_auc(s4, std::vector<int>{1, 1, 0, 0}) - 1.0) <= 1e-12,
            "AUC of a perfect ranking != 1");
  v.require(std::abs(harness::roc_auc(s4, std::vector<int>{1, 0, 1, 0}) - 0.75) <= 1e-12,
            "AUC hand case != 0.75");

  const auto& d = domains();
  const auto net = harness::train_learner(d.source.train, d.source.dev, {}, 0);
  const auto a = harness::bootstrap_ci(d.source.test, d.target.test, net, 1000, 17);
  const auto b = harness::bootstrap_ci(d.source.test, d.target.test, net, 1000, 17);
  v.require(a.ci_low == b.ci_low && a.ci_high == b.ci_high && a.delta_f1 == b.delta_f1,
            "bootstrap interval differs between identical calls");
  v.require(a.ci_low <= a.ci_high, "ci_low > ci_high");
  if (v.pass) {
    v.detail = fmt::format("delta F1 {:.4f} CI [{:.4f}, {:.4f}]", a.delta_f1, a.ci_low, a.ci_high);
  }
  return v;
}

Verdict corpus_gap_math() {
  Verdict v;
  using namespace corpusgap;
  NgramVocab ab, bc;
  ab.counts = {{"a", 1}, {"b", 1}};
  bc.counts = {{"b", 1}, {"c", 1}};
  v.require(jaccard(ab, bc) == 1.0 / 3.0, "Jaccard({a,b},{b,c}) != 1/3");
  NgramVocab p;
  p.counts = {{"x", 3}, {"y", 1}, {"z y", 5}};
  v.require(kl_divergence(p, p) == 0.0, "KL(P||P) != 0");

  std::mt19937_64 rng(1212);
  std::uniform_int_distribution<int> size(1, 10), count(0, 30);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    NgramVocab a, b;
    const int n = size(rng);
    for (int i = 0; i < n; ++i) {
      const std::string key = "t" + std::to_string(i);
      if (const int c = count(rng); c > 0) a.counts[key] = c;
      if (const int c = count(rng); c > 0) b.counts[key] = c;
    }
    if (a.empty()) a.counts["t0"] = 1;
    const double eps = std::pow(10.0, -1.0 - t % 11);
    const double kl = kl_divergence(a, b, {eps});
    v.require(kl >= 0.0, fmt::format("table {}: KL < 0", t));

    std::map<std::string, long> oa, ob;
    for (const auto& [k, c] : a.counts) oa[k] = static_cast<long>(c);
    for (const auto& [k, c] : b.counts) ob[k] = static_cast<long>(c);
    worst = std::max({worst, std::abs(kl - oracle::kl(oa, ob, eps)),
                      std::abs(jaccard(a, b) - oracle::jaccard(oa, ob)),
                      std::abs(coverage(a, b) - oracle::coverage(oa, ob))});
  }
  v.require(worst <= 1e-12, fmt::format("oracle deviation {:.3g} > 1e-12", worst));
  if (v.pass) v.detail = fmt::format("1000 tables, max oracle deviation {:.3g}", worst);
  return v;
}

// ---------------------------------------------------------------------------
// CLI determinism

struct CliRun {
  int code = 0;
  std::string out;
  std::map<std::string, std::string> files;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CliRun cli_run(const std::vector<std::string>& args, const std::vector<fs::path>& outputs) {
  for (const auto& p : outputs) fs::remove(p);
  std::vector<const char*> argv{"rads"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  for (const auto& p : outputs) r.files[p.filename().string()] = slurp(p);
  return r;
}

Verdict cli_determinism() {
  Verdict v;
  const fs::path dir =
      fs::temp_directory_path() / ("rads_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir / "corpus_a");
  std::ofstream(dir / "corpus_a" / "1.txt") << "Right upper lobe nodule, 2 cm.";
  std::ofstream(dir / "corpus_a" / "2.txt") << "No acute cardiopulmonary finding.";
  std::ofstream(dir / "corpus_b.jsonl") << "{\"id\":\"1\",\"text\":\"Spiculated nodule in the right lobe\"}\n"
                                        << "{\"id\":\"2\",\"text\":\"Stable pulmonary nodule\"}\n";
  const std::string scores = (dir / "scores.jsonl").string();
  std::ofstream(dir / "cfg.json") << "{\"budget\": 4, \"seed\": 9}";

  struct Command {
    std::string name;
    std::vector<std::string> args;
    std::vector<fs::path> outputs;
  };
  const std::vector<Command> commands{
      {"score", {"score", "--seed", "4", "-o", scores}, {scores}},
      {"validate", {"validate", scores}, {}},
      {"select rads", {"select", scores, "--policy", "rads", "--seed", "7", "--trace"}, {}},
      {"select random", {"select", scores, "--policy", "random", "--seed", "7"}, {}},
      {"select uncertainty", {"select", scores, "--policy", "uncertainty"}, {}},
      {"select mi_only", {"select", scores, "--policy", "mi_only"}, {}},
      {"select greedy_utility", {"select", scores, "--policy", "greedy_utility"}, {}},
      {"select via config", {"--config", (dir / "cfg.json").string(), "select", scores}, {}},
      {"experiment",
       {"experiment", "--policy", "rads", "--runs", "2", "-o", (dir / "e.csv").string(),
        "--json-output", (dir / "e.json").string()},
       {dir / "e.csv", dir / "e.json"}},
      {"sweep",
       {"sweep", "--policy", "greedy_utility", "--budgets", "0,1,4", "--runs", "2"},
       {}},
      {"corpusgap",
       {"corpusgap", (dir / "corpus_a").string(), (dir / "corpus_b.jsonl").string()},
       {}},
  };
  int checked = 0;
  for (const auto& c : commands) {
    const CliRun first = cli_run(c.args, c.outputs);
    const CliRun second = cli_run(c.args, c.outputs);
    v.require(first.code == 0, fmt::format("{}: exit code {}", c.name, first.code));
    v.require(first.out == second.out && first.files == second.files,
              fmt::format("{}: outputs differ between runs", c.name));
    ++checked;
  }
  fs::remove_all(dir);
  if (v.pass) v.detail = fmt::format("{} commands byte-identical across two runs", checked);
  return v;
}

struct Criterion {
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0) only = argv[i + 1];
  }
  const std::vector<Criterion> criteria{
      {"signal-formula-oracle", signal_oracle},
      {"entropy-mi-identities", entropy_identities},
      {"utility-arithmetic", utility_arithmetic},
      {"reward-accounting", reward_accounting},
      {"gradient-correctness", gradients_and_dueling},
      {"td-sanity", td_sanity},
      {"greedy-vs-brute-force", greedy_vs_brute_force},
      {"budget-properties", budget_properties},
      {"transfer-direction", transfer_direction},
      {"ablation-ordering", ablation_ordering},
      {"metrics-oracle", metrics_oracle},
      {"corpus-gap-math", corpus_gap_math},
      {"cli-determinism", cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && only != c.name) continue;
    Verdict v;
    const auto t0 = Clock::now();
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    if (!v.pass) ++failures;
    std::cout << fmt::format("{} {} ({}) [{:.1f}s]\n", v.pass ? "PASS" : "FAIL", c.name, v.detail,
                             seconds_since(t0))
              << std::flush;
  }
  return failures == 0 ? 0 : 1;
}
