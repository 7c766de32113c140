#pragma once

// Per-sample informativeness signals derived from MC-dropout probability
// matrices: predictive mean, log-mean vector, predictive / expected entropy,
// BALD mutual information, pool-normalized MI, pseudo labels and the
// pseudo-label class prior. All logarithms are natural (nats).

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rads {

// Floor applied to every probability before a logarithm.
inline constexpr double kProbFloor = 1e-12;
// Allowed deviation of a score-file row sum from 1.
inline constexpr double kRowSumTolerance = 1e-6;

struct ScoreEntry {
  std::string id;
  Eigen::MatrixXd probs;  // K passes x C classes
};

struct ScorePool {
  std::vector<ScoreEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  int passes() const { return empty() ? 0 : static_cast<int>(entries[0].probs.rows()); }
  int classes() const { return empty() ? 0 : static_cast<int>(entries[0].probs.cols()); }
};

// Throws ValidationError naming the offending entry when K or C differ
// across entries, a row leaves [0,1] or does not sum to 1, or ids repeat.
void validate(const ScorePool& pool);

struct SignalRecord {
  std::string id;
  Eigen::VectorXd p_bar;
  Eigen::VectorXd l_bar;  // log(p_bar), floored at log(kProbFloor)
  double pe = 0.0;
  double ee = 0.0;
  double mi = 0.0;
  double mi_norm = 0.0;
  int pseudo_label = 0;
};

struct MeanPrediction {
  Eigen::VectorXd p_bar;
  Eigen::VectorXd l_bar;
};

struct Entropies {
  double pe = 0.0;
  double ee = 0.0;
  double mi = 0.0;
};

struct PriorEstimate {
  double pi_plus = 0.0;
  double pi_minus = 1.0;
  std::size_t n_pool = 0;
};

// Shannon entropy in nats; p = 0 terms contribute 0.
double entropy(const Eigen::Ref<const Eigen::VectorXd>& p);

MeanPrediction aggregate(const Eigen::MatrixXd& probs);

// mi is clamped at 0 (it can dip below by rounding).
Entropies entropies(const Eigen::MatrixXd& probs);

// Min-max over the pool. A range below 1e-12 maps everything to 0.
std::vector<double> normalize_mi(std::span<const double> mis);

PriorEstimate estimate_priors(std::span<const SignalRecord> records);

// argmax with ties resolved to the lower class index.
int pseudo_label(const Eigen::VectorXd& p_bar);

// Validates the pool, then one record per entry in pool order.
std::vector<SignalRecord> build_signals(const ScorePool& pool);

}  // namespace rads
