#include "rads/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "rads/baselines.hpp"
#include "rads/error.hpp"
#include "rads/seeding.hpp"

namespace rads::harness {

// ---------------------------------------------------------------------------
// Synthetic domains

void validate(const SyntheticDomainSpec& spec) {
  if (spec.n_train < 1 || spec.n_dev < 1 || spec.n_test < 1) {
    throw ParameterError("domain spec: split sizes must be at least 1");
  }
  if (!(spec.positive_rate > 0.0 && spec.positive_rate < 1.0)) {
    throw ParameterError("domain spec: positive_rate must lie in (0, 1)");
  }
  if (!(spec.class_separation > 0.0) || !(spec.noise_scale > 0.0)) {
    throw ParameterError("domain spec: separation and noise scale must be positive");
  }
  if (!std::isfinite(spec.mean_shift[0]) || !std::isfinite(spec.mean_shift[1])) {
    throw ParameterError("domain spec: mean_shift must be finite");
  }
}

SyntheticDomainSpec default_source_spec(std::uint64_t seed) {
  SyntheticDomainSpec s;
  s.n_train = 196;
  s.n_dev = 35;
  s.n_test = 52;
  s.positive_rate = 0.14;
  s.mean_shift = {0.0, 0.0};
  s.class_separation = 2.5;
  s.noise_scale = 1.0;
  s.seed = seed;
  return s;
}

SyntheticDomainSpec default_target_spec(std::uint64_t seed) {
  SyntheticDomainSpec s;
  s.n_train = 135;
  s.n_dev = 24;
  s.n_test = 42;
  s.positive_rate = 0.69;
  // Orthogonal to the class axis, |shift| = 2.0.
  s.mean_shift = {0.0, 2.0};
  s.class_separation = 2.5;
  s.noise_scale = 1.0;
  s.seed = derive_seed(seed, 0x7a);
  return s;
}

int LabeledSet::positives() const {
  return static_cast<int>(std::count(labels.begin(), labels.end(), 1));
}

void validate(const LabeledSet& set) {
  if (set.labels.size() != set.ids.size() ||
      static_cast<std::size_t>(set.features.cols()) != set.ids.size()) {
    throw ValidationError("labeled set: features, labels and ids differ in length");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : set.ids) {
    if (!seen.insert(id).second) throw ValidationError("labeled set: duplicate id '" + id + "'");
  }
  for (int y : set.labels) {
    if (y != 0 && y != 1) throw LabelError("labeled set: labels must be 0 or 1");
  }
}

UnlabeledPool strip_labels(const LabeledSet& set) { return {set.features, set.ids}; }

namespace {

LabeledSet generate_split(const SyntheticDomainSpec& spec, int n, std::string_view prefix,
                          std::string_view split, nn::Rng& rng) {
  const int positives = static_cast<int>(std::lround(spec.positive_rate * n));
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::fill(labels.begin(), labels.begin() + positives, 1);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::normal_distribution<double> noise(0.0, spec.noise_scale);
  LabeledSet out;
  out.features.resize(2, n);
  out.labels = labels;
  out.ids.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double cx = spec.mean_shift[0] + (labels[i] == 1 ? spec.class_separation : 0.0);
    const double cy = spec.mean_shift[1];
    out.features(0, i) = cx + noise(rng);
    out.features(1, i) = cy + noise(rng);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d", i);
    out.ids.push_back(std::string(prefix) + std::string(split) + "-" + buf);
  }
  return out;
}

}  // namespace

DomainSplits generate_splits(const SyntheticDomainSpec& spec, std::string_view prefix) {
  validate(spec);
  nn::Rng rng(spec.seed);
  DomainSplits out;
  out.train = generate_split(spec, spec.n_train, prefix, "train", rng);
  out.dev = generate_split(spec, spec.n_dev, prefix, "dev", rng);
  out.test = generate_split(spec, spec.n_test, prefix, "test", rng);
  return out;
}

Domains generate_domains(const SyntheticDomainSpec& source, const SyntheticDomainSpec& target) {
  return {generate_splits(source, "s-"), generate_splits(target, "t-")};
}

// ---------------------------------------------------------------------------
// Active learner

void validate(const LearnerConfig& cfg) {
  if (cfg.hidden < 1) throw ParameterError("learner: hidden width must be positive");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) {
    throw ParameterError("learner: dropout must lie in [0, 1)");
  }
  if (!(cfg.learning_rate > 0.0)) throw ParameterError("learner: learning rate must be positive");
  if (cfg.max_epochs < 0) throw ParameterError("learner: max_epochs must be non-negative");
  if (cfg.batch_size < 1) throw ParameterError("learner: batch size must be positive");
  if (cfg.patience < 1) throw ParameterError("learner: patience must be positive");
}

namespace {

std::vector<double> balanced_weights(std::span<const int> labels) {
  const double n = static_cast<double>(labels.size());
  const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double neg = n - pos;
  if (pos == 0.0 || neg == 0.0) return {1.0, 1.0};
  return {n / (2.0 * neg), n / (2.0 * pos)};
}

double dev_loss(const nn::Mlp& net, const LabeledSet& dev, std::span<const double> weights) {
  nn::Rng unused(0);
  const auto lg = nn::cross_entropy_gradients(net, dev.features, dev.labels, weights,
                                              nn::ForwardMode::kDeterministic, unused);
  return lg.loss;
}

}  // namespace

nn::Mlp train_learner(const LabeledSet& train, const LabeledSet& dev, const LearnerConfig& cfg,
                      std::uint64_t seed) {
  validate(cfg);
  validate(train);
  validate(dev);
  if (train.size() == 0 || dev.size() == 0) {
    throw ParameterError("train_learner: train and dev sets must be non-empty");
  }
  const int dim = static_cast<int>(train.features.rows());
  nn::Mlp net({dim, cfg.hidden, 2}, cfg.dropout, derive_seed(seed, 21));
  if (cfg.max_epochs == 0) return net;

  const std::vector<double> weights =
      cfg.balanced_loss ? balanced_weights(train.labels) : std::vector<double>{};
  nn::OptimizerState opt(net, {cfg.learning_rate});
  nn::Rng rng(derive_seed(seed, 22));

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  nn::Mlp best = net;
  double best_loss = dev_loss(net, dev, weights);
  int stale = 0;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(end - start));
      std::vector<int> y;
      y.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        x.col(static_cast<Eigen::Index>(i - start)) = train.features.col(order[i]);
        y.push_back(train.labels[order[i]]);
      }
      nn::train_step(net, opt, x, y, weights, rng);
    }
    const double loss = dev_loss(net, dev, weights);
    if (loss < best_loss) {
      best_loss = loss;
      best = net;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  return best;
}

ScorePool score_pool(const nn::Mlp& net, const UnlabeledPool& pool, int passes,
                     std::uint64_t seed) {
  if (passes < 1) throw ParameterError("score_pool: K must be at least 1");
  if (static_cast<std::size_t>(pool.features.cols()) != pool.ids.size()) {
    throw ValidationError("score_pool: features and ids differ in length");
  }
  nn::Rng rng(derive_seed(seed, 31));
  ScorePool out;
  out.entries.reserve(pool.ids.size());
  std::vector<double> x(static_cast<std::size_t>(pool.features.rows()));
  for (std::size_t i = 0; i < pool.ids.size(); ++i) {
    for (std::size_t d = 0; d < x.size(); ++d) {
      x[d] = pool.features(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i));
    }
    out.entries.push_back({pool.ids[i], nn::mc_passes(net, x, passes, rng)});
  }
  validate(out);
  return out;
}

AnnotationOracle::AnnotationOracle(const LabeledSet& pool) : pool_(pool) {}

std::vector<int> AnnotationOracle::reveal(std::span<const std::string> ids) {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < pool_.ids.size(); ++i) index.emplace(pool_.ids[i], i);
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) throw ValidationError("annotation: unknown id '" + id + "'");
    revealed_.push_back(id);
    out.push_back(pool_.labels[it->second]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InputShapeError("roc_auc: length mismatch");
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == 1 ? pos : neg).push_back(scores[i]);
  }
  if (pos.empty() || neg.empty()) {
    throw ParameterError("roc_auc: undefined when labels contain a single class");
  }
  double concordant = 0.0;
  for (double p : pos) {
    for (double n : neg) {
      if (p > n) {
        concordant += 1.0;
      } else if (p == n) {
        concordant += 0.5;
      }
    }
  }
  return concordant / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

namespace {

struct Confusion {
  double tp = 0, fp = 0, fn = 0, tn = 0;
};

Confusion confusion(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw InputShapeError("metrics: length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] == 1;
    const bool y = labels[i] == 1;
    if (p && y) c.tp += 1;
    else if (p) c.fp += 1;
    else if (y) c.fn += 1;
    else c.tn += 1;
  }
  return c;
}

double f1_from(const Confusion& c) {
  const double precision = c.tp + c.fp > 0 ? c.tp / (c.tp + c.fp) : 0.0;
  const double recall = c.tp + c.fn > 0 ? c.tp / (c.tp + c.fn) : 0.0;
  return precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

}  // namespace

double f1_score(std::span<const int> predictions, std::span<const int> labels) {
  return f1_from(confusion(predictions, labels));
}

MetricRecord metrics(std::span<const int> predictions, std::span<const double> scores,
                     std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InputShapeError("metrics: length mismatch");
  const Confusion c = confusion(predictions, labels);
  MetricRecord m;
  const double n = c.tp + c.fp + c.fn + c.tn;
  m.accuracy = n > 0 ? (c.tp + c.tn) / n : 0.0;
  m.precision = c.tp + c.fp > 0 ? c.tp / (c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn > 0 ? c.tp / (c.tp + c.fn) : 0.0;
  m.f1 = f1_from(c);
  const bool both = c.tp + c.fn > 0 && c.fp + c.tn > 0;
  if (both) m.roc_auc = roc_auc(scores, labels);
  return m;
}

Predictions predict(const nn::Mlp& net, const Eigen::MatrixXd& features) {
  nn::Rng unused(0);
  const auto fwd = nn::forward(net, features, nn::ForwardMode::kDeterministic, unused);
  const Eigen::MatrixXd probs = nn::softmax(fwd.logits);
  Predictions out;
  out.labels.reserve(static_cast<std::size_t>(probs.cols()));
  out.positive_scores.reserve(static_cast<std::size_t>(probs.cols()));
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    out.labels.push_back(probs(1, c) > probs(0, c) ? 1 : 0);
    out.positive_scores.push_back(probs(1, c));
  }
  return out;
}

MetricRecord evaluate(const nn::Mlp& net, const LabeledSet& set) {
  const Predictions p = predict(net, set.features);
  return metrics(p.labels, p.positive_scores, set.labels);
}

namespace {

double percentile(std::vector<double> sorted, double q) {
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double resampled_f1(const std::vector<int>& pred, const std::vector<int>& labels,
                    nn::Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t j = pick(rng);
    const bool p = pred[j] == 1;
    const bool y = labels[j] == 1;
    if (p && y) c.tp += 1;
    else if (p) c.fp += 1;
    else if (y) c.fn += 1;
    else c.tn += 1;
  }
  return f1_from(c);
}

}  // namespace

GapInterval bootstrap_ci(const LabeledSet& source_test, const LabeledSet& target_test,
                         const nn::Mlp& model, int n_resamples, std::uint64_t seed) {
  if (n_resamples < 1) throw ParameterError("bootstrap_ci: need at least one resample");
  if (source_test.size() == 0 || target_test.size() == 0) {
    throw ParameterError("bootstrap_ci: empty test set");
  }
  const Predictions ps = predict(model, source_test.features);
  const Predictions pt = predict(model, target_test.features);
  GapInterval out;
  out.delta_f1 = f1_score(ps.labels, source_test.labels) - f1_score(pt.labels, target_test.labels);

  nn::Rng rng(derive_seed(seed, 41));
  std::vector<double> deltas;
  deltas.reserve(static_cast<std::size_t>(n_resamples));
  for (int b = 0; b < n_resamples; ++b) {
    const double fs = resampled_f1(ps.labels, source_test.labels, rng);
    const double ft = resampled_f1(pt.labels, target_test.labels, rng);
    deltas.push_back(fs - ft);
  }
  out.ci_low = percentile(deltas, 0.025);
  out.ci_high = percentile(deltas, 0.975);
  return out;
}

// ---------------------------------------------------------------------------
// Transfer runs

std::string_view name(Policy policy) {
  switch (policy) {
    case Policy::kRads: return "rads";
    case Policy::kRandom: return "random";
    case Policy::kUncertainty: return "uncertainty";
    case Policy::kMiOnly: return "mi_only";
    case Policy::kGreedyUtility: return "greedy_utility";
  }
  return "unknown";
}

std::optional<Policy> parse_policy(std::string_view text) {
  for (Policy p : {Policy::kRads, Policy::kRandom, Policy::kUncertainty, Policy::kMiOnly,
                   Policy::kGreedyUtility}) {
    if (name(p) == text) return p;
  }
  return std::nullopt;
}

SelectionResult run_policy(Policy policy, std::span<const SignalRecord> signals,
                           const ClassWeights& weights, int budget, const TransferConfig& cfg,
                           std::uint64_t seed) {
  rl::EnvConfig env = cfg.env;
  env.budget = budget;
  switch (policy) {
    case Policy::kRads:
      env.shuffle_seed = derive_seed(seed, 51);
      return rl::select_rads(signals, weights, env, cfg.agent, derive_seed(seed, 52));
    case Policy::kRandom:
      return baselines::select_random(signals, budget, derive_seed(seed, 53));
    case Policy::kUncertainty:
      return baselines::select_uncertainty(signals, budget);
    case Policy::kMiOnly:
      return baselines::select_mi(signals, budget);
    case Policy::kGreedyUtility:
      return baselines::select_greedy_utility(signals, weights, budget, env.lambda);
  }
  throw ParameterError("unknown policy");
}

namespace {

LabeledSet join(const LabeledSet& source, const Eigen::MatrixXd& target_features,
                const std::vector<std::string>& target_ids,
                std::span<const std::string> selected, std::span<const int> labels) {
  std::unordered_map<std::string_view, Eigen::Index> col;
  for (std::size_t i = 0; i < target_ids.size(); ++i) {
    col.emplace(target_ids[i], static_cast<Eigen::Index>(i));
  }
  LabeledSet out;
  const auto n = source.features.cols() + static_cast<Eigen::Index>(selected.size());
  out.features.resize(source.features.rows(), n);
  out.features.leftCols(source.features.cols()) = source.features;
  out.labels = source.labels;
  out.ids = source.ids;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    out.features.col(source.features.cols() + static_cast<Eigen::Index>(i)) =
        target_features.col(col.at(selected[i]));
    out.labels.push_back(labels[i]);
    out.ids.push_back(selected[i]);
  }
  return out;
}

}  // namespace

TransferReport run_transfer(const Domains& domains, Policy policy, int budget,
                            const TransferConfig& cfg, std::uint64_t seed, TransferTrace* trace) {
  const LabeledSet& pool_set = domains.target.train;
  if (budget < 0 || static_cast<std::size_t>(budget) > pool_set.size()) {
    throw ParameterError("run_transfer: budget " + std::to_string(budget) + " outside [0, " +
                         std::to_string(pool_set.size()) + "]");
  }
  const std::uint64_t init_seed = derive_seed(seed, 61);
  const nn::Mlp learner =
      train_learner(domains.source.train, domains.source.dev, cfg.learner, init_seed);

  // Selection sees features and ids only.
  const UnlabeledPool pool = strip_labels(pool_set);
  AnnotationOracle oracle(pool_set);

  SelectionResult selection;
  selection.policy = std::string(name(policy));
  selection.budget = budget;
  if (budget > 0) {
    const ScorePool scores = score_pool(learner, pool, cfg.passes, derive_seed(seed, 62));
    const auto signals = build_signals(scores);
    const ClassWeights weights = class_weights(estimate_priors(signals), cfg.utility);
    selection = run_policy(policy, signals, weights, budget, cfg, seed);
  }

  const std::vector<int> revealed = oracle.reveal(selection.selected);
  const LabeledSet joint =
      join(domains.source.train, pool.features, pool.ids, selection.selected, revealed);
  const nn::Mlp model = budget > 0 && !selection.selected.empty()
                            ? train_learner(joint, domains.source.dev, cfg.learner, init_seed)
                            : learner;

  TransferReport r;
  r.policy = std::string(name(policy));
  r.budget = budget;
  r.budget_used = selection.budget_used();
  r.seed = seed;
  r.source = evaluate(model, domains.source.test);
  r.target = evaluate(model, domains.target.test);
  const GapInterval gap = bootstrap_ci(domains.source.test, domains.target.test, model,
                                       cfg.bootstrap_resamples, derive_seed(seed, 63));
  r.delta_f1 = gap.delta_f1;
  r.ci_low = gap.ci_low;
  r.ci_high = gap.ci_high;
  r.selected = selection.selected;

  if (trace != nullptr) {
    trace->selection = selection;
    trace->revealed_ids = oracle.revealed_ids();
    trace->reveal_count = oracle.reveal_count();
    trace->zero_shot_target_f1 = evaluate(learner, domains.target.test).f1;
  }
  return r;
}

std::vector<TransferReport> sweep(const Domains& domains, Policy policy,
                                  std::span<const int> budgets,
                                  std::span<const std::uint64_t> seeds,
                                  const TransferConfig& cfg) {
  if (budgets.empty()) throw ParameterError("sweep: empty budget list");
  if (seeds.empty()) throw ParameterError("sweep: empty seed list");
  if (!std::is_sorted(budgets.begin(), budgets.end())) {
    throw ParameterError("sweep: budgets must be sorted ascending");
  }
  std::vector<TransferReport> out;
  out.reserve(budgets.size() * seeds.size());
  for (int b : budgets) {
    for (std::uint64_t s : seeds) out.push_back(run_transfer(domains, policy, b, cfg, s));
  }
  return out;
}

TransferReport mean_report(std::span<const TransferReport> reports) {
  if (reports.empty()) throw ParameterError("mean_report: no reports");
  TransferReport m;
  m.policy = reports.front().policy;
  m.budget = reports.front().budget;
  m.seed = reports.front().seed;
  const double n = static_cast<double>(reports.size());
  auto avg = [&](auto field) {
    double s = 0.0;
    for (const auto& r : reports) s += field(r);
    return s / n;
  };
  auto avg_metrics = [&](auto pick) {
    MetricRecord out;
    out.accuracy = avg([&](const TransferReport& r) { return pick(r).accuracy; });
    out.f1 = avg([&](const TransferReport& r) { return pick(r).f1; });
    out.precision = avg([&](const TransferReport& r) { return pick(r).precision; });
    out.recall = avg([&](const TransferReport& r) { return pick(r).recall; });
    double auc = 0.0;
    int k = 0;
    for (const auto& r : reports) {
      if (pick(r).roc_auc) {
        auc += *pick(r).roc_auc;
        ++k;
      }
    }
    if (k > 0) out.roc_auc = auc / k;
    return out;
  };
  m.source = avg_metrics([](const TransferReport& r) -> const MetricRecord& { return r.source; });
  m.target = avg_metrics([](const TransferReport& r) -> const MetricRecord& { return r.target; });
  m.budget_used = static_cast<int>(std::lround(avg([](const TransferReport& r) {
    return static_cast<double>(r.budget_used);
  })));
  m.delta_f1 = avg([](const TransferReport& r) { return r.delta_f1; });
  m.ci_low = avg([](const TransferReport& r) { return r.ci_low; });
  m.ci_high = avg([](const TransferReport& r) { return r.ci_high; });
  return m;
}

}  // namespace rads::harness
