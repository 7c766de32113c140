#pragma once

// RL sample selector: a sequential accept/reject environment over the
// candidate pool, a dueling Q-network trained with experience replay and a
// periodically synced target network, and the greedy selection rollout.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rads/acquisition.hpp"
#include "rads/nncore.hpp"
#include "rads/selection.hpp"
#include "rads/signals.hpp"

namespace rads::rl {

// [l_bar(0), l_bar(1), PE, MI, |S|/B]
inline constexpr int kStateDim = 5;
inline constexpr int kActions = 2;
using StateVector = std::array<double, kStateDim>;

enum class CandidateOrder {
  kShuffled,      // fresh permutation per episode seed
  kDescendingMi,  // mi_norm high to low, pool index breaks ties
  kPoolOrder,
};

struct EnvConfig {
  int budget = 5;
  double lambda = 0.01;
  std::uint64_t shuffle_seed = 0;
  CandidateOrder train_order = CandidateOrder::kShuffled;
  CandidateOrder select_order = CandidateOrder::kDescendingMi;
  // Feed mi_norm instead of raw MI into the state.
  bool normalized_mi_state = false;
};

struct EnvState {
  std::size_t cursor = 0;
  std::vector<std::size_t> selected;  // pool indices, in acceptance order
  bool done = false;
};

struct StepResult {
  StateVector next{};
  double reward = 0.0;
  bool done = false;
};

class SelectionEnv {
 public:
  // The pool must outlive the environment. Throws ParameterError for an
  // empty pool, non-2-class records, or a budget outside [1, pool size].
  SelectionEnv(std::span<const SignalRecord> pool, ClassWeights weights,
               EnvConfig cfg);

  // Training episode: ordering from cfg.train_order seeded by episode_seed
  // (mixed with cfg.shuffle_seed).
  StateVector reset(std::uint64_t episode_seed);
  // Selection rollout: ordering from cfg.select_order.
  StateVector reset_for_selection();
  StateVector reset_with_order(std::vector<std::size_t> order);

  StepResult step(int action);

  const EnvState& state() const { return state_; }
  bool done() const { return state_.done; }
  const std::vector<std::size_t>& order() const { return order_; }
  std::size_t current_index() const;
  const std::string& current_id() const;
  const EnvConfig& config() const { return cfg_; }
  double utility_at(std::size_t pool_index) const { return utilities_[pool_index]; }

  StateVector state_vector(std::size_t pool_index) const;

 private:
  StateVector emit() const;

  std::span<const SignalRecord> pool_;
  ClassWeights weights_;
  EnvConfig cfg_;
  std::vector<double> utilities_;
  std::vector<std::size_t> order_;
  std::vector<Eigen::VectorXd> selected_lbar_;
  EnvState state_;
  bool started_ = false;
};

// Q(s, a) = V(s) + A(s, a) - mean_a' A(s, a')
Eigen::MatrixXd dueling_combine(const Eigen::RowVectorXd& value,
                                const Eigen::MatrixXd& advantage);

class DuelingQNet {
 public:
  // Shared ReLU trunk, then linear value (1) and advantage (kActions) heads.
  DuelingQNet(int hidden, std::uint64_t seed, int state_dim = kStateDim);

  struct Pass {
    Eigen::MatrixXd q;  // kActions x n
    nn::ForwardResult trunk;
    nn::ForwardResult value;
    nn::ForwardResult advantage;
  };

  Pass forward(const Eigen::MatrixXd& states) const;

  nn::Mlp& trunk() { return trunk_; }
  nn::Mlp& value_head() { return value_; }
  nn::Mlp& advantage_head() { return advantage_; }
  const nn::Mlp& trunk() const { return trunk_; }
  const nn::Mlp& value_head() const { return value_; }
  const nn::Mlp& advantage_head() const { return advantage_; }
  int state_dim() const { return trunk_.input_dim(); }

 private:
  nn::Mlp trunk_;
  nn::Mlp value_;
  nn::Mlp advantage_;
};

Eigen::Vector2d q_forward(const DuelingQNet& net, std::span<const double> state);

// Index of the larger Q-value; ties go to action 0 (reject).
int greedy_action(const Eigen::Vector2d& q);

class QOptimizer {
 public:
  QOptimizer(const DuelingQNet& net, double learning_rate);
  void apply(DuelingQNet& net, const nn::LayerSet& trunk_grad,
             const nn::LayerSet& value_grad, const nn::LayerSet& adv_grad);
  std::uint64_t step_count() const { return trunk_.step_count(); }

 private:
  nn::OptimizerState trunk_;
  nn::OptimizerState value_;
  nn::OptimizerState advantage_;
};

struct Transition {
  StateVector state{};
  int action = 0;
  double reward = 0.0;
  StateVector next{};
  bool done = false;
};

// Fixed-capacity ring; the oldest transition is overwritten when full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return data_[i]; }

  // Uniform sample of `count` distinct transitions.
  std::vector<Transition> sample(std::size_t count, nn::Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

// TD targets y = r + gamma * (1 - d) * max_a' Q_target(s', a').
Eigen::VectorXd td_targets(const DuelingQNet& target,
                           std::span<const Transition> batch, double gamma);

// Mean squared TD error before the step; one Adam step on `online` only.
double td_update(DuelingQNet& online, const DuelingQNet& target,
                 std::span<const Transition> batch, double gamma,
                 QOptimizer& opt);

struct AgentConfig {
  int episodes = 300;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay = 0.995;
  std::size_t buffer_capacity = 10000;
  std::size_t batch_size = 64;
  double learning_rate = 1e-4;
  double gamma = 0.95;
  int target_sync_every = 10;
  int hidden = 64;
};

void validate(const AgentConfig& cfg);

struct TrainResult {
  DuelingQNet net;
  std::vector<double> episode_returns;
  double final_epsilon = 0.0;
  std::uint64_t updates = 0;
};

TrainResult train(std::span<const SignalRecord> pool, const ClassWeights& weights,
                  const EnvConfig& env_cfg, const AgentConfig& agent_cfg,
                  std::uint64_t seed);

// Greedy rollout with cfg.select_order; rewards are those of accepted steps.
SelectionResult select(const DuelingQNet& net, std::span<const SignalRecord> pool,
                       const ClassWeights& weights, const EnvConfig& env_cfg);

// train + select; the result carries the training return trace.
SelectionResult select_rads(std::span<const SignalRecord> pool,
                            const ClassWeights& weights, const EnvConfig& env_cfg,
                            const AgentConfig& agent_cfg, std::uint64_t seed);

}  // namespace rads::rl
