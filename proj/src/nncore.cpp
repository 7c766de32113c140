#include "rads/nncore.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "rads/error.hpp"

namespace rads::nn {

namespace {

bool is_hidden(const Mlp& net, std::size_t layer) {
  return layer + 1 < net.layers().size();
}

bool applies_relu(const Mlp& net, std::size_t layer) {
  return is_hidden(net, layer) ||
         net.output_activation() == OutputActivation::kRelu;
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_dims, double dropout_rate, std::uint64_t seed,
         OutputActivation output)
    : dims_(std::move(layer_dims)), dropout_rate_(dropout_rate), output_(output) {
  if (dims_.size() < 2) {
    throw ParameterError("Mlp needs at least an input and an output dimension");
  }
  for (int d : dims_) {
    if (d <= 0) throw ParameterError("Mlp layer dimensions must be positive");
  }
  if (!(dropout_rate_ >= 0.0 && dropout_rate_ < 1.0)) {
    throw ParameterError("dropout rate must lie in [0, 1)");
  }
  Rng rng(seed);
  layers_.reserve(dims_.size() - 1);
  for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
    const int fan_in = dims_[i];
    const int fan_out = dims_[i + 1];
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in),
                     Eigen::VectorXd::Zero(fan_out)};
    for (int c = 0; c < fan_in; ++c) {
      for (int r = 0; r < fan_out; ++r) layer.weight(r, c) = dist(rng);
    }
    layers_.push_back(std::move(layer));
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

ForwardResult forward(const Mlp& net, const Eigen::MatrixXd& inputs,
                      ForwardMode mode, Rng& rng) {
  if (inputs.rows() != net.input_dim()) {
    throw InputShapeError("forward: input has " + std::to_string(inputs.rows()) +
                          " features, network expects " +
                          std::to_string(net.input_dim()));
  }
  const auto& layers = net.layers();
  ForwardResult out;
  out.cache.inputs.reserve(layers.size());
  out.cache.pre.reserve(layers.size());
  out.cache.masks.resize(layers.size());

  const bool drop = mode == ForwardMode::kDropout && net.dropout_rate() > 0.0;
  const double keep = 1.0 - net.dropout_rate();
  std::bernoulli_distribution survive(keep);

  Eigen::MatrixXd x = inputs;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Eigen::MatrixXd z = layers[i].weight * x;
    z.colwise() += layers[i].bias;
    out.cache.inputs.push_back(std::move(x));
    x = applies_relu(net, i) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
    out.cache.pre.push_back(std::move(z));
    if (drop && is_hidden(net, i)) {
      Eigen::MatrixXd mask(x.rows(), x.cols());
      for (Eigen::Index c = 0; c < mask.cols(); ++c) {
        for (Eigen::Index r = 0; r < mask.rows(); ++r) {
          mask(r, c) = survive(rng) ? 1.0 / keep : 0.0;
        }
      }
      x = x.cwiseProduct(mask);
      out.cache.masks[i] = std::move(mask);
    }
  }
  out.logits = std::move(x);
  return out;
}

ForwardResult forward(const Mlp& net, std::span<const double> input,
                      ForwardMode mode, Rng& rng) {
  Eigen::MatrixXd column(static_cast<Eigen::Index>(input.size()), 1);
  for (std::size_t i = 0; i < input.size(); ++i) column(i, 0) = input[i];
  return forward(net, column, mode, rng);
}

LayerSet zeros_like(const Mlp& net) {
  LayerSet out;
  out.reserve(net.layers().size());
  for (const auto& l : net.layers()) {
    out.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                   Eigen::VectorXd::Zero(l.bias.size())});
  }
  return out;
}

Eigen::MatrixXd backward(const Mlp& net, const Activations& cache,
                         const Eigen::MatrixXd& grad_logits, LayerSet& grads) {
  const auto& layers = net.layers();
  Eigen::MatrixXd g = grad_logits;
  for (std::size_t k = layers.size(); k-- > 0;) {
    if (cache.masks[k].size() > 0) g = g.cwiseProduct(cache.masks[k]);
    if (applies_relu(net, k)) {
      g = g.cwiseProduct(
          (cache.pre[k].array() > 0.0).cast<double>().matrix());
    }
    grads[k].weight.noalias() += g * cache.inputs[k].transpose();
    grads[k].bias += g.rowwise().sum();
    g = layers[k].weight.transpose() * g;
  }
  return g;
}

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    Eigen::VectorXd e = (logits.col(c).array() - m).exp().matrix();
    out.col(c) = e / e.sum();
  }
  return out;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::MatrixXd m = logits;
  return softmax(m).col(0);
}

OptimizerState::OptimizerState(const Mlp& net, AdamParams params)
    : params_(params), m_(zeros_like(net)), v_(zeros_like(net)) {
  if (!(params_.learning_rate > 0.0)) {
    throw ParameterError("learning rate must be positive");
  }
}

void OptimizerState::apply(Mlp& net, const LayerSet& grads) {
  auto& layers = net.layers();
  if (grads.size() != layers.size() || m_.size() != layers.size()) {
    throw InputShapeError("optimizer: gradient layout does not match network");
  }
  ++step_;
  const double b1 = params_.beta1;
  const double b2 = params_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = params_.learning_rate;
  const double eps = params_.epsilon;

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    param.array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weight, grads[i].weight, m_[i].weight, v_[i].weight);
    update(layers[i].bias, grads[i].bias, m_[i].bias, v_[i].bias);
  }
}

LossAndGrad cross_entropy_gradients(const Mlp& net,
                                    const Eigen::MatrixXd& inputs,
                                    std::span<const int> labels,
                                    std::span<const double> class_weights,
                                    ForwardMode mode, Rng& rng) {
  const Eigen::Index n = inputs.cols();
  const int classes = net.output_dim();
  if (n == 0) throw ParameterError("train_step: empty batch");
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw InputShapeError("train_step: label count does not match batch");
  }
  if (!class_weights.empty() &&
      static_cast<int>(class_weights.size()) != classes) {
    throw InputShapeError("train_step: one class weight per class required");
  }
  for (int y : labels) {
    if (y < 0 || y >= classes) {
      throw LabelError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }

  ForwardResult fwd = forward(net, inputs, mode, rng);
  Eigen::MatrixXd probs = softmax(fwd.logits);

  double weight_total = 0.0;
  double loss = 0.0;
  Eigen::MatrixXd grad = probs;
  for (Eigen::Index c = 0; c < n; ++c) {
    const int y = labels[c];
    const double w = class_weights.empty() ? 1.0 : class_weights[y];
    const auto col = fwd.logits.col(c);
    const double m = col.maxCoeff();
    const double lse = m + std::log((col.array() - m).exp().sum());
    loss += w * (lse - col(y));
    weight_total += w;
    grad(y, c) -= 1.0;
    grad.col(c) *= w;
  }
  if (!(weight_total > 0.0)) throw NumericError("train_step: zero total weight");
  loss /= weight_total;
  if (!std::isfinite(loss)) throw NumericError("train_step: non-finite loss");
  grad /= weight_total;

  LossAndGrad out{loss, zeros_like(net)};
  backward(net, fwd.cache, grad, out.grads);
  return out;
}

double train_step(Mlp& net, OptimizerState& opt, const Eigen::MatrixXd& inputs,
                  std::span<const int> labels,
                  std::span<const double> class_weights, Rng& rng,
                  ForwardMode mode) {
  LossAndGrad lg =
      cross_entropy_gradients(net, inputs, labels, class_weights, mode, rng);
  opt.apply(net, lg.grads);
  return lg.loss;
}

Eigen::MatrixXd mc_passes(const Mlp& net, std::span<const double> input, int passes,
                          Rng& rng) {
  if (passes < 1) throw ParameterError("mc_passes: K must be at least 1");
  if (static_cast<int>(input.size()) != net.input_dim()) {
    throw InputShapeError("mc_passes: input has " + std::to_string(input.size()) +
                          " features, network expects " +
                          std::to_string(net.input_dim()));
  }
  // Each column of the replicated batch draws its own dropout mask.
  Eigen::MatrixXd batch(net.input_dim(), passes);
  for (int k = 0; k < passes; ++k) {
    for (std::size_t i = 0; i < input.size(); ++i) batch(i, k) = input[i];
  }
  ForwardResult fwd = forward(net, batch, ForwardMode::kDropout, rng);
  return softmax(fwd.logits).transpose();
}

}  // namespace rads::nn
