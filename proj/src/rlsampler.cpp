#include "rads/rlsampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "rads/error.hpp"
#include "rads/seeding.hpp"

namespace rads::rl {

// ---------------------------------------------------------------------------
// Environment

SelectionEnv::SelectionEnv(std::span<const SignalRecord> pool, ClassWeights weights,
                           EnvConfig cfg)
    : pool_(pool), weights_(weights), cfg_(cfg) {
  if (pool_.empty()) throw ParameterError("selection env: empty pool");
  if (cfg_.budget < 1 || static_cast<std::size_t>(cfg_.budget) > pool_.size()) {
    throw ParameterError("selection env: budget " + std::to_string(cfg_.budget) +
                         " outside [1, " + std::to_string(pool_.size()) + "]");
  }
  if (!(cfg_.lambda >= 0.0) || !std::isfinite(cfg_.lambda)) {
    throw ParameterError("selection env: lambda must be a non-negative real");
  }
  utilities_.reserve(pool_.size());
  for (const auto& r : pool_) {
    if (r.l_bar.size() != 2) {
      throw ParameterError("selection env: state vector requires 2-class records");
    }
    utilities_.push_back(utility(r, weights_));
  }
}

StateVector SelectionEnv::reset(std::uint64_t episode_seed) {
  std::vector<std::size_t> order(pool_.size());
  std::iota(order.begin(), order.end(), 0);
  switch (cfg_.train_order) {
    case CandidateOrder::kShuffled: {
      nn::Rng rng(derive_seed(cfg_.shuffle_seed, episode_seed));
      std::shuffle(order.begin(), order.end(), rng);
      break;
    }
    case CandidateOrder::kDescendingMi:
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pool_[a].mi_norm > pool_[b].mi_norm;
      });
      break;
    case CandidateOrder::kPoolOrder:
      break;
  }
  return reset_with_order(std::move(order));
}

StateVector SelectionEnv::reset_for_selection() {
  std::vector<std::size_t> order(pool_.size());
  std::iota(order.begin(), order.end(), 0);
  switch (cfg_.select_order) {
    case CandidateOrder::kShuffled: {
      nn::Rng rng(derive_seed(cfg_.shuffle_seed, 0xc0ffeeULL));
      std::shuffle(order.begin(), order.end(), rng);
      break;
    }
    case CandidateOrder::kDescendingMi:
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pool_[a].mi_norm > pool_[b].mi_norm;
      });
      break;
    case CandidateOrder::kPoolOrder:
      break;
  }
  return reset_with_order(std::move(order));
}

StateVector SelectionEnv::reset_with_order(std::vector<std::size_t> order) {
  if (order.size() != pool_.size()) {
    throw ParameterError("selection env: ordering must cover the pool");
  }
  order_ = std::move(order);
  state_ = EnvState{};
  selected_lbar_.clear();
  started_ = true;
  return emit();
}

std::size_t SelectionEnv::current_index() const {
  if (!started_ || state_.done) throw ProtocolError("selection env: no current candidate");
  return order_[state_.cursor];
}

const std::string& SelectionEnv::current_id() const {
  return pool_[current_index()].id;
}

StateVector SelectionEnv::state_vector(std::size_t pool_index) const {
  const SignalRecord& r = pool_[pool_index];
  return {r.l_bar(0), r.l_bar(1), r.pe, cfg_.normalized_mi_state ? r.mi_norm : r.mi,
          static_cast<double>(state_.selected.size()) / cfg_.budget};
}

StateVector SelectionEnv::emit() const { return state_vector(order_[state_.cursor]); }

StepResult SelectionEnv::step(int action) {
  if (!started_) throw ProtocolError("selection env: step before reset");
  if (state_.done) throw ProtocolError("selection env: step after episode end");
  if (action != 0 && action != 1) throw ParameterError("selection env: action must be 0 or 1");

  const StateVector current = emit();
  const std::size_t idx = order_[state_.cursor];
  StepResult out;
  if (action == 1 && state_.selected.size() < static_cast<std::size_t>(cfg_.budget)) {
    // Redundancy against the set as it was before this candidate joins.
    out.reward = utilities_[idx] - cfg_.lambda * redundancy(pool_[idx].l_bar, selected_lbar_);
    state_.selected.push_back(idx);
    selected_lbar_.push_back(pool_[idx].l_bar);
  }
  ++state_.cursor;
  state_.done = state_.selected.size() == static_cast<std::size_t>(cfg_.budget) ||
                state_.cursor >= order_.size();
  out.done = state_.done;
  out.next = state_.done ? current : emit();
  return out;
}

// ---------------------------------------------------------------------------
// Dueling Q-network

Eigen::MatrixXd dueling_combine(const Eigen::RowVectorXd& value,
                                const Eigen::MatrixXd& advantage) {
  if (value.size() != advantage.cols()) {
    throw InputShapeError("dueling_combine: value/advantage batch mismatch");
  }
  Eigen::MatrixXd q = advantage;
  const Eigen::RowVectorXd mean = advantage.colwise().mean();
  q.rowwise() += value - mean;
  return q;
}

DuelingQNet::DuelingQNet(int hidden, std::uint64_t seed, int state_dim)
    : trunk_({state_dim, hidden}, 0.0, derive_seed(seed, 1), nn::OutputActivation::kRelu),
      value_({hidden, 1}, 0.0, derive_seed(seed, 2)),
      advantage_({hidden, kActions}, 0.0, derive_seed(seed, 3)) {}

DuelingQNet::Pass DuelingQNet::forward(const Eigen::MatrixXd& states) const {
  nn::Rng unused(0);
  Pass p;
  p.trunk = nn::forward(trunk_, states, nn::ForwardMode::kDeterministic, unused);
  p.value = nn::forward(value_, p.trunk.logits, nn::ForwardMode::kDeterministic, unused);
  p.advantage =
      nn::forward(advantage_, p.trunk.logits, nn::ForwardMode::kDeterministic, unused);
  p.q = dueling_combine(p.value.logits.row(0), p.advantage.logits);
  return p;
}

Eigen::Vector2d q_forward(const DuelingQNet& net, std::span<const double> state) {
  if (static_cast<int>(state.size()) != net.state_dim()) {
    throw ParameterError("q_forward: state has " + std::to_string(state.size()) +
                         " components, expected " + std::to_string(net.state_dim()));
  }
  Eigen::MatrixXd column(net.state_dim(), 1);
  for (std::size_t i = 0; i < state.size(); ++i) column(i, 0) = state[i];
  return net.forward(column).q.col(0);
}

int greedy_action(const Eigen::Vector2d& q) { return q(1) > q(0) ? 1 : 0; }

QOptimizer::QOptimizer(const DuelingQNet& net, double learning_rate)
    : trunk_(net.trunk(), {learning_rate}),
      value_(net.value_head(), {learning_rate}),
      advantage_(net.advantage_head(), {learning_rate}) {}

void QOptimizer::apply(DuelingQNet& net, const nn::LayerSet& trunk_grad,
                       const nn::LayerSet& value_grad, const nn::LayerSet& adv_grad) {
  trunk_.apply(net.trunk(), trunk_grad);
  value_.apply(net.value_head(), value_grad);
  advantage_.apply(net.advantage_head(), adv_grad);
}

// ---------------------------------------------------------------------------
// Replay

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ParameterError("replay buffer: capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
  if (data_.size() < capacity_) {
    data_.push_back(t);
  } else {
    data_[next_] = t;
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t count, nn::Rng& rng) const {
  if (count > data_.size()) throw ParameterError("replay buffer: not enough transitions");
  // Floyd's algorithm: `count` distinct indices in O(count^2) worst case.
  std::vector<std::size_t> picked;
  picked.reserve(count);
  const std::size_t n = data_.size();
  for (std::size_t j = n - count; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> dist(0, j);
    const std::size_t t = dist(rng);
    if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
      picked.push_back(t);
    } else {
      picked.push_back(j);
    }
  }
  std::vector<Transition> out;
  out.reserve(count);
  for (std::size_t i : picked) out.push_back(data_[i]);
  return out;
}

// ---------------------------------------------------------------------------
// TD learning

namespace {

Eigen::MatrixXd stack_states(std::span<const Transition> batch, bool next) {
  Eigen::MatrixXd m(kStateDim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t c = 0; c < batch.size(); ++c) {
    const StateVector& s = next ? batch[c].next : batch[c].state;
    for (int r = 0; r < kStateDim; ++r) m(r, static_cast<Eigen::Index>(c)) = s[r];
  }
  return m;
}

}  // namespace

Eigen::VectorXd td_targets(const DuelingQNet& target, std::span<const Transition> batch,
                           double gamma) {
  const Eigen::MatrixXd q_next = target.forward(stack_states(batch, true)).q;
  Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    y(c) = batch[i].reward;
    if (!batch[i].done) y(c) += gamma * q_next.col(c).maxCoeff();
  }
  return y;
}

double td_update(DuelingQNet& online, const DuelingQNet& target,
                 std::span<const Transition> batch, double gamma, QOptimizer& opt) {
  if (batch.empty()) throw ParameterError("td_update: empty batch");
  const Eigen::VectorXd y = td_targets(target, batch, gamma);
  DuelingQNet::Pass p = online.forward(stack_states(batch, false));

  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd grad_q = Eigen::MatrixXd::Zero(kActions, n);
  double loss = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    const int a = batch[static_cast<std::size_t>(c)].action;
    if (a < 0 || a >= kActions) throw ParameterError("td_update: action out of range");
    const double err = p.q(a, c) - y(c);
    loss += err * err;
    grad_q(a, c) = 2.0 * err / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  if (!std::isfinite(loss)) throw NumericError("td_update: non-finite loss");

  // dQ_a/dV = 1, dQ_a/dA_j = [a == j] - 1/|A|
  const Eigen::MatrixXd grad_v = grad_q.colwise().sum();
  Eigen::MatrixXd grad_a = grad_q;
  grad_a.rowwise() -= grad_q.colwise().mean();

  nn::LayerSet gv = nn::zeros_like(online.value_head());
  nn::LayerSet ga = nn::zeros_like(online.advantage_head());
  nn::LayerSet gt = nn::zeros_like(online.trunk());
  const Eigen::MatrixXd dh_v = nn::backward(online.value_head(), p.value.cache, grad_v, gv);
  const Eigen::MatrixXd dh_a =
      nn::backward(online.advantage_head(), p.advantage.cache, grad_a, ga);
  nn::backward(online.trunk(), p.trunk.cache, dh_v + dh_a, gt);
  opt.apply(online, gt, gv, ga);
  return loss;
}

// ---------------------------------------------------------------------------
// Training and selection

void validate(const AgentConfig& cfg) {
  if (cfg.episodes < 0) throw ParameterError("agent: episodes must be non-negative");
  if (!(0.0 <= cfg.eps_end && cfg.eps_end <= cfg.eps_start && cfg.eps_start <= 1.0)) {
    throw ParameterError("agent: need 0 <= eps_end <= eps_start <= 1");
  }
  if (!(cfg.eps_decay > 0.0 && cfg.eps_decay <= 1.0)) {
    throw ParameterError("agent: eps_decay must lie in (0, 1]");
  }
  if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0)) {
    throw ParameterError("agent: gamma must lie in [0, 1)");
  }
  if (cfg.buffer_capacity == 0 || cfg.batch_size == 0) {
    throw ParameterError("agent: buffer capacity and batch size must be positive");
  }
  if (cfg.batch_size > cfg.buffer_capacity) {
    throw ParameterError("agent: batch size exceeds buffer capacity");
  }
  if (!(cfg.learning_rate > 0.0)) throw ParameterError("agent: learning rate must be positive");
  if (cfg.target_sync_every < 1) throw ParameterError("agent: target_sync_every must be >= 1");
  if (cfg.hidden < 1) throw ParameterError("agent: hidden width must be positive");
}

TrainResult train(std::span<const SignalRecord> pool, const ClassWeights& weights,
                  const EnvConfig& env_cfg, const AgentConfig& agent_cfg,
                  std::uint64_t seed) {
  validate(agent_cfg);
  SelectionEnv env(pool, weights, env_cfg);
  TrainResult out{DuelingQNet(agent_cfg.hidden, derive_seed(seed, 11)), {}, agent_cfg.eps_start, 0};
  DuelingQNet target = out.net;
  QOptimizer opt(out.net, agent_cfg.learning_rate);
  ReplayBuffer buffer(agent_cfg.buffer_capacity);
  nn::Rng explore_rng(derive_seed(seed, 12));
  nn::Rng replay_rng(derive_seed(seed, 13));
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  double eps = agent_cfg.eps_start;
  out.episode_returns.reserve(static_cast<std::size_t>(agent_cfg.episodes));
  for (int episode = 1; episode <= agent_cfg.episodes; ++episode) {
    StateVector s = env.reset(derive_seed(seed, 1000 + static_cast<std::uint64_t>(episode)));
    double total = 0.0;
    while (!env.done()) {
      int a = 0;
      if (coin(explore_rng) < eps) {
        a = coin(explore_rng) < 0.5 ? 0 : 1;
      } else {
        a = greedy_action(q_forward(out.net, s));
      }
      const StepResult r = env.step(a);
      buffer.push({s, a, r.reward, r.next, r.done});
      total += r.reward;
      if (buffer.size() >= agent_cfg.batch_size) {
        const auto batch = buffer.sample(agent_cfg.batch_size, replay_rng);
        td_update(out.net, target, batch, agent_cfg.gamma, opt);
        ++out.updates;
      }
      s = r.next;
    }
    out.episode_returns.push_back(total);
    if (episode % agent_cfg.target_sync_every == 0) target = out.net;
    eps = std::max(agent_cfg.eps_end, eps * agent_cfg.eps_decay);
  }
  out.final_epsilon = eps;
  return out;
}

SelectionResult select(const DuelingQNet& net, std::span<const SignalRecord> pool,
                       const ClassWeights& weights, const EnvConfig& env_cfg) {
  SelectionEnv env(pool, weights, env_cfg);
  SelectionResult out;
  out.policy = "rads";
  out.budget = env_cfg.budget;
  StateVector s = env.reset_for_selection();
  while (!env.done()) {
    const std::size_t idx = env.current_index();
    const int a = greedy_action(q_forward(net, s));
    const std::size_t before = env.state().selected.size();
    const StepResult r = env.step(a);
    if (env.state().selected.size() > before) {
      out.selected.push_back(pool[idx].id);
      out.rewards.push_back(r.reward);
    }
    s = r.next;
  }
  return out;
}

SelectionResult select_rads(std::span<const SignalRecord> pool,
                            const ClassWeights& weights, const EnvConfig& env_cfg,
                            const AgentConfig& agent_cfg, std::uint64_t seed) {
  TrainResult trained = train(pool, weights, env_cfg, agent_cfg, seed);
  SelectionResult out = select(trained.net, pool, weights, env_cfg);
  out.episodes_return = std::move(trained.episode_returns);
  return out;
}

}  // namespace rads::rl
