#pragma once

// Small feedforward network engine: dense ReLU layers, inverted dropout,
// softmax / cross-entropy, hand-written backprop and Adam.
//
// Batches are column-major: an input batch is an (in_dim x n) matrix, one
// sample per column. Single-sample helpers wrap a span as a 1-column batch.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rads::nn {

using Rng = std::mt19937_64;

enum class ForwardMode { kDeterministic, kDropout };
enum class OutputActivation { kLinear, kRelu };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

// Parameter-shaped container; also used for gradients and Adam moments.
using LayerSet = std::vector<DenseLayer>;

class Mlp {
 public:
  // He-uniform weights, zero biases. Hidden layers use ReLU followed by
  // dropout; the output layer is linear unless `output` says otherwise.
  Mlp(std::vector<int> layer_dims, double dropout_rate, std::uint64_t seed,
      OutputActivation output = OutputActivation::kLinear);

  const std::vector<int>& layer_dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  double dropout_rate() const { return dropout_rate_; }
  OutputActivation output_activation() const { return output_; }

  LayerSet& layers() { return layers_; }
  const LayerSet& layers() const { return layers_; }

  std::size_t parameter_count() const;

 private:
  std::vector<int> dims_;
  double dropout_rate_;
  OutputActivation output_;
  LayerSet layers_;
};

// Everything backward() needs. inputs[i] is what layer i consumed (after the
// previous layer's activation and dropout), pre[i] its pre-activation, and
// masks[i] the inverted-dropout scale applied to layer i's output (empty when
// no mask was drawn).
struct Activations {
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> masks;
};

struct ForwardResult {
  Eigen::MatrixXd logits;  // out_dim x n
  Activations cache;
};

ForwardResult forward(const Mlp& net, const Eigen::MatrixXd& inputs,
                      ForwardMode mode, Rng& rng);
ForwardResult forward(const Mlp& net, std::span<const double> input,
                      ForwardMode mode, Rng& rng);

LayerSet zeros_like(const Mlp& net);

// Adds dL/dparams to `grads` given dL/dlogits; returns dL/dinputs.
Eigen::MatrixXd backward(const Mlp& net, const Activations& cache,
                         const Eigen::MatrixXd& grad_logits, LayerSet& grads);

// Column-wise softmax with max subtraction.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

struct AdamParams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class OptimizerState {
 public:
  OptimizerState(const Mlp& net, AdamParams params = {});

  // One bias-corrected Adam update of `net` from `grads`.
  void apply(Mlp& net, const LayerSet& grads);

  const AdamParams& params() const { return params_; }
  std::uint64_t step_count() const { return step_; }
  const LayerSet& first_moment() const { return m_; }
  const LayerSet& second_moment() const { return v_; }

 private:
  AdamParams params_;
  std::uint64_t step_ = 0;
  LayerSet m_;
  LayerSet v_;
};

struct LossAndGrad {
  double loss = 0.0;
  LayerSet grads;
};

// Mean cross-entropy over the batch and its parameter gradient. With class
// weights the mean is sum(w_y * l) / sum(w_y).
LossAndGrad cross_entropy_gradients(const Mlp& net,
                                    const Eigen::MatrixXd& inputs,
                                    std::span<const int> labels,
                                    std::span<const double> class_weights,
                                    ForwardMode mode, Rng& rng);

// Loss before the update; one Adam step on `net`.
double train_step(Mlp& net, OptimizerState& opt, const Eigen::MatrixXd& inputs,
                  std::span<const int> labels,
                  std::span<const double> class_weights, Rng& rng,
                  ForwardMode mode = ForwardMode::kDropout);

// K x C matrix; row k is softmax of the k-th dropout-mode pass.
Eigen::MatrixXd mc_passes(const Mlp& net, std::span<const double> input, int passes,
                          Rng& rng);

}  // namespace rads::nn
