#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "interbench/data.hpp"
#include "interbench/network.hpp"
#include "interbench/rng.hpp"
#include "interbench/tensor.hpp"

namespace interbench {

enum class LossKind { CrossEntropy, Mse };
enum class OptimizerKind { Sgd, Adam };

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-2;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  LossKind loss = LossKind::CrossEntropy;
  std::uint64_t seed = 0;
};

struct LayerGrads {
  Tensor weight;
  Tensor bias;
};

struct Gradients {
  double loss = 0.0;
  std::vector<LayerGrads> params;
  Tensor input;  // n x d, gradient of the mean loss w.r.t. X
};

// Logits, n x c. Deterministic given (net, X).
Tensor forward(const Network& net, const Tensor& X);

// n x c row-wise stable softmax of the logits.
Tensor softmax(const Tensor& logits);

// Mean cross-entropy over the batch plus gradients of the mean loss.
Gradients loss_and_grads(const Network& net, const Tensor& X,
                         std::span<const int> labels);

// Mean squared error: mean over samples of the squared L2 distance between
// logits and targets. Used by model extraction against target logits.
Gradients loss_and_grads_mse(const Network& net, const Tensor& X,
                             const Tensor& targets);

// Per-sample gradients of the per-sample loss; their mean equals the batch
// gradient. Backbone for DPSGD clipping.
std::vector<std::vector<LayerGrads>> per_sample_grads(const Network& net,
                                                      const Tensor& X,
                                                      std::span<const int> labels);

struct EpochStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  Network net;
  std::vector<EpochStats> history;
};

// Maps a shuffled batch to the inputs actually used for the step. Hook for
// adversarial training; identity when absent.
using BatchHook =
    std::function<Tensor(const Network& current, const Tensor& batch_x,
                         std::span<const int> batch_y)>;

TrainResult train(const Network& net, const LabeledDataset& data,
                  const TrainConfig& cfg, const BatchHook& hook = nullptr);

// Regression on dense targets (mse), same loop/shuffle scheme as train.
TrainResult train_regression(const Network& net, const Tensor& X,
                             const Tensor& targets, const TrainConfig& cfg);

// Fraction of argmax(logits) == label; ties broken by lowest class index.
double accuracy(const Network& net, const LabeledDataset& data);

std::vector<int> predict(const Network& net, const Tensor& X);

// Internals shared with the alternating-update trainers (debiasing, dpsgd).
struct ForwardCache {
  std::vector<Tensor> pre;   // pre-activation per layer, n x out
  std::vector<Tensor> post;  // post-activation per layer, n x out
};

ForwardCache forward_cached(const Network& net, const Tensor& X);

// Backprop an arbitrary d(loss)/d(logits) (n x c) through the net.
Gradients backward(const Network& net, const Tensor& X, const ForwardCache& cache,
                   const Tensor& dlogits);

class Optimizer {
 public:
  Optimizer(const Network& net, const TrainConfig& cfg);
  void step(Network& net, const std::vector<LayerGrads>& grads);

 private:
  TrainConfig cfg_;
  std::size_t t_ = 0;
  std::vector<LayerGrads> m_, v_;
};

std::vector<LayerGrads> zero_grads(const Network& net);

}  // namespace interbench
