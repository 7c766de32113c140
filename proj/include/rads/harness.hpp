#pragma once

// Synthetic transfer-learning harness: shifted, class-imbalanced Gaussian
// source/target domains, an MC-dropout active learner trained on the source,
// selection over the target training pool, simulated annotation of the
// selected ids, joint retraining, and two-domain evaluation with a bootstrap
// interval on the F1 gap.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rads/acquisition.hpp"
#include "rads/nncore.hpp"
#include "rads/rlsampler.hpp"
#include "rads/selection.hpp"
#include "rads/signals.hpp"

namespace rads::harness {

struct SyntheticDomainSpec {
  int n_train = 100;
  int n_dev = 20;
  int n_test = 40;
  double positive_rate = 0.5;
  std::array<double, 2> mean_shift{0.0, 0.0};
  double class_separation = 2.5;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
};

void validate(const SyntheticDomainSpec& spec);

// Split sizes and class rates of the imbalanced source (14% positive).
SyntheticDomainSpec default_source_spec(std::uint64_t seed = 0);
// Shifted target (69% positive).
SyntheticDomainSpec default_target_spec(std::uint64_t seed = 0);

struct LabeledSet {
  Eigen::MatrixXd features;  // dim x n
  std::vector<int> labels;
  std::vector<std::string> ids;

  std::size_t size() const { return ids.size(); }
  int positives() const;
};

void validate(const LabeledSet& set);

// Features and ids only. Everything a selection policy may see.
struct UnlabeledPool {
  Eigen::MatrixXd features;
  std::vector<std::string> ids;
};

UnlabeledPool strip_labels(const LabeledSet& set);

struct DomainSplits {
  LabeledSet train;
  LabeledSet dev;
  LabeledSet test;
};

struct Domains {
  DomainSplits source;
  DomainSplits target;
};

// Negatives centred at mean_shift, positives at mean_shift + (separation, 0),
// isotropic noise. round(rate * n) positives per split, the rest negative.
// Source ids are prefixed "s-", target ids "t-".
Domains generate_domains(const SyntheticDomainSpec& source,
                         const SyntheticDomainSpec& target);

DomainSplits generate_splits(const SyntheticDomainSpec& spec, std::string_view prefix);

struct LearnerConfig {
  int hidden = 16;
  double dropout = 0.3;
  double learning_rate = 0.01;
  int max_epochs = 200;
  int batch_size = 16;
  int patience = 3;
  // Inverse-frequency class weights in the loss.
  bool balanced_loss = false;
};

void validate(const LearnerConfig& cfg);

// Minibatch Adam with dropout; after each epoch the dev loss is evaluated in
// deterministic mode and training stops after `patience` epochs without
// improvement. The best-dev-loss parameters are returned.
nn::Mlp train_learner(const LabeledSet& train, const LabeledSet& dev,
                      const LearnerConfig& cfg, std::uint64_t seed);

ScorePool score_pool(const nn::Mlp& net, const UnlabeledPool& pool, int passes,
                     std::uint64_t seed);

// Holds the target labels; the only route by which a run learns the label of
// a target training sample.
class AnnotationOracle {
 public:
  explicit AnnotationOracle(const LabeledSet& pool);

  std::vector<int> reveal(std::span<const std::string> ids);

  std::size_t reveal_count() const { return revealed_.size(); }
  const std::vector<std::string>& revealed_ids() const { return revealed_; }

 private:
  const LabeledSet& pool_;
  std::vector<std::string> revealed_;
};

struct MetricRecord {
  double accuracy = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::optional<double> roc_auc;  // absent when labels hold a single class
};

// Mann-Whitney form; tied scores count one half. Throws ParameterError when
// labels contain a single class.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

double f1_score(std::span<const int> predictions, std::span<const int> labels);

MetricRecord metrics(std::span<const int> predictions, std::span<const double> scores,
                     std::span<const int> labels);

struct Predictions {
  std::vector<int> labels;
  std::vector<double> positive_scores;
};

Predictions predict(const nn::Mlp& net, const Eigen::MatrixXd& features);

MetricRecord evaluate(const nn::Mlp& net, const LabeledSet& set);

struct GapInterval {
  double delta_f1 = 0.0;  // F1(source) - F1(target)
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Percentile bootstrap (2.5 / 97.5, linear interpolation) resampling each
// test set independently with replacement.
GapInterval bootstrap_ci(const LabeledSet& source_test, const LabeledSet& target_test,
                         const nn::Mlp& model, int n_resamples, std::uint64_t seed);

enum class Policy { kRads, kRandom, kUncertainty, kMiOnly, kGreedyUtility };

std::string_view name(Policy policy);
std::optional<Policy> parse_policy(std::string_view text);

struct TransferConfig {
  LearnerConfig learner;
  int passes = 10;
  UtilityParams utility;
  rl::EnvConfig env;  // budget is overwritten per run
  rl::AgentConfig agent;
  int bootstrap_resamples = 1000;
};

// Runs `policy` over scored signals with the seed streams run_transfer uses.
SelectionResult run_policy(Policy policy, std::span<const SignalRecord> signals,
                           const ClassWeights& weights, int budget, const TransferConfig& cfg,
                           std::uint64_t seed);

struct TransferReport {
  std::string policy;
  int budget = 0;
  int budget_used = 0;
  std::uint64_t seed = 0;
  MetricRecord source;
  MetricRecord target;
  double delta_f1 = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<std::string> selected;
};

// Side channel for instrumentation tests.
struct TransferTrace {
  SelectionResult selection;
  std::vector<std::string> revealed_ids;
  std::size_t reveal_count = 0;
  double zero_shot_target_f1 = 0.0;
};

// Budget 0 reproduces zero-shot transfer: the retrained model and the source
// learner share data and initialisation, so they coincide.
TransferReport run_transfer(const Domains& domains, Policy policy, int budget,
                            const TransferConfig& cfg, std::uint64_t seed,
                            TransferTrace* trace = nullptr);

std::vector<TransferReport> sweep(const Domains& domains, Policy policy,
                                  std::span<const int> budgets,
                                  std::span<const std::uint64_t> seeds,
                                  const TransferConfig& cfg);

// Field-wise mean of the reports (roc_auc averaged over rows that have it).
TransferReport mean_report(std::span<const TransferReport> reports);

}  // namespace rads::harness
