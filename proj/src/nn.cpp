#include "interbench/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace interbench {

namespace {

// out = X (n x in) * W^T (in x out) + b
Tensor affine(const Tensor& X, const Layer& l) {
  const std::size_t n = X.rows(), in = l.in_dim(), out = l.out_dim();
  Tensor r({n, out});
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = X.row(i);
    double* o = r.row(i);
    for (std::size_t j = 0; j < out; ++j) {
      const double* w = l.weight.row(j);
      double acc = l.bias.data[j];
      for (std::size_t k = 0; k < in; ++k) acc += w[k] * x[k];
      o[j] = acc;
    }
  }
  return r;
}

void apply_activation(Tensor& t, Activation act) {
  if (act == Activation::Relu)
    for (double& v : t.data) v = v > 0.0 ? v : 0.0;
}

void check_input(const Network& net, const Tensor& X) {
  if (X.shape.size() != 2)
    throw std::invalid_argument("forward: X must be 2-d");
  if (X.cols() != net.input_dim())
    throw std::invalid_argument("forward: input dim mismatch");
}

}  // namespace

ForwardCache forward_cached(const Network& net, const Tensor& X) {
  check_input(net, X);
  ForwardCache cache;
  const Tensor* cur = &X;
  for (const auto& l : net.layers) {
    Tensor pre = affine(*cur, l);
    Tensor post = pre;
    apply_activation(post, l.act);
    cache.pre.push_back(std::move(pre));
    cache.post.push_back(std::move(post));
    cur = &cache.post.back();
  }
  return cache;
}

Tensor forward(const Network& net, const Tensor& X) {
  auto cache = forward_cached(net, X);
  Tensor logits = std::move(cache.post.back());
  require_finite(logits, "forward");
  return logits;
}

Tensor softmax(const Tensor& logits) {
  const std::size_t n = logits.rows(), c = logits.cols();
  Tensor p({n, c});
  for (std::size_t i = 0; i < n; ++i) {
    const double* z = logits.row(i);
    double mx = z[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, z[j]);
    double sum = 0.0;
    double* out = p.row(i);
    for (std::size_t j = 0; j < c; ++j) {
      out[j] = std::exp(z[j] - mx);
      sum += out[j];
    }
    for (std::size_t j = 0; j < c; ++j) out[j] /= sum;
  }
  return p;
}

Gradients backward(const Network& net, const Tensor& X, const ForwardCache& cache,
                   const Tensor& dlogits) {
  const std::size_t n = X.rows();
  const std::size_t L = net.layers.size();
  Gradients g;
  g.params.resize(L);
  Tensor delta = dlogits;
  for (std::size_t kk = L; kk-- > 0;) {
    const Layer& l = net.layers[kk];
    const Tensor& input = kk == 0 ? X : cache.post[kk - 1];
    const std::size_t in = l.in_dim(), out = l.out_dim();
    LayerGrads lg;
    lg.weight = Tensor({out, in});
    lg.bias = Tensor({out});
    for (std::size_t i = 0; i < n; ++i) {
      const double* d = delta.row(i);
      const double* x = input.row(i);
      for (std::size_t j = 0; j < out; ++j) {
        double dj = d[j];
        if (dj == 0.0) continue;
        lg.bias.data[j] += dj;
        double* wrow = lg.weight.row(j);
        for (std::size_t k = 0; k < in; ++k) wrow[k] += dj * x[k];
      }
    }
    Tensor dinput({n, in});
    for (std::size_t i = 0; i < n; ++i) {
      const double* d = delta.row(i);
      double* di = dinput.row(i);
      for (std::size_t j = 0; j < out; ++j) {
        double dj = d[j];
        if (dj == 0.0) continue;
        const double* wrow = l.weight.row(j);
        for (std::size_t k = 0; k < in; ++k) di[k] += dj * wrow[k];
      }
    }
    if (kk > 0 && net.layers[kk - 1].act == Activation::Relu) {
      const Tensor& pre = cache.pre[kk - 1];
      for (std::size_t i = 0; i < dinput.size(); ++i)
        if (pre.data[i] <= 0.0) dinput.data[i] = 0.0;
    }
    g.params[kk] = std::move(lg);
    delta = std::move(dinput);
  }
  g.input = std::move(delta);
  return g;
}

namespace {

// (loss sum, per-sample dlogits without the 1/n factor)
std::pair<double, Tensor> ce_dlogits(const Tensor& logits,
                                     std::span<const int> labels) {
  const std::size_t n = logits.rows(), c = logits.cols();
  Tensor probs = softmax(logits);
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= c)
      throw std::invalid_argument("cross_entropy: label out of range");
    double p = std::max(probs.at(i, static_cast<std::size_t>(y)), 1e-300);
    loss_sum += -std::log(p);
    probs.at(i, static_cast<std::size_t>(y)) -= 1.0;
  }
  return {loss_sum, std::move(probs)};
}

std::pair<double, Tensor> mse_dlogits(const Tensor& logits, const Tensor& targets) {
  if (logits.shape != targets.shape)
    throw std::invalid_argument("mse: target shape mismatch");
  Tensor d = logits;
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double r = logits.data[i] - targets.data[i];
    loss_sum += r * r;
    d.data[i] = 2.0 * r;
  }
  return {loss_sum, std::move(d)};
}

}  // namespace

Gradients loss_and_grads(const Network& net, const Tensor& X,
                         std::span<const int> labels) {
  if (X.rows() == 0) throw std::invalid_argument("loss_and_grads: empty batch");
  if (labels.size() != X.rows())
    throw std::invalid_argument("loss_and_grads: label count mismatch");
  auto cache = forward_cached(net, X);
  auto [loss_sum, dlogits] = ce_dlogits(cache.post.back(), labels);
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  for (double& v : dlogits.data) v *= inv_n;
  Gradients g = backward(net, X, cache, dlogits);
  g.loss = loss_sum * inv_n;
  return g;
}

Gradients loss_and_grads_mse(const Network& net, const Tensor& X,
                             const Tensor& targets) {
  if (X.rows() == 0) throw std::invalid_argument("loss_and_grads: empty batch");
  auto cache = forward_cached(net, X);
  auto [loss_sum, dlogits] = mse_dlogits(cache.post.back(), targets);
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  for (double& v : dlogits.data) v *= inv_n;
  Gradients g = backward(net, X, cache, dlogits);
  g.loss = loss_sum * inv_n;
  return g;
}

std::vector<std::vector<LayerGrads>> per_sample_grads(const Network& net,
                                                      const Tensor& X,
                                                      std::span<const int> labels) {
  if (X.rows() == 0) throw std::invalid_argument("per_sample_grads: empty batch");
  const std::size_t n = X.rows(), d = X.cols();
  auto cache = forward_cached(net, X);
  auto [loss_sum, dlogits] = ce_dlogits(cache.post.back(), labels);
  (void)loss_sum;
  std::vector<std::vector<LayerGrads>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Single-row backward pass reusing the batch cache.
    Tensor xi({1, d});
    std::copy(X.row(i), X.row(i) + d, xi.row(0));
    ForwardCache ci;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
      std::size_t w = net.layers[k].out_dim();
      Tensor pre({1, w}), post({1, w});
      std::copy(cache.pre[k].row(i), cache.pre[k].row(i) + w, pre.row(0));
      std::copy(cache.post[k].row(i), cache.post[k].row(i) + w, post.row(0));
      ci.pre.push_back(std::move(pre));
      ci.post.push_back(std::move(post));
    }
    Tensor di({1, dlogits.cols()});
    std::copy(dlogits.row(i), dlogits.row(i) + dlogits.cols(), di.row(0));
    out.push_back(backward(net, xi, ci, di).params);
  }
  return out;
}

std::vector<LayerGrads> zero_grads(const Network& net) {
  std::vector<LayerGrads> g;
  for (const auto& l : net.layers)
    g.push_back({zeros_like(l.weight), zeros_like(l.bias)});
  return g;
}

Optimizer::Optimizer(const Network& net, const TrainConfig& cfg) : cfg_(cfg) {
  if (cfg.optimizer == OptimizerKind::Adam) {
    m_ = zero_grads(net);
    v_ = zero_grads(net);
  }
}

void Optimizer::step(Network& net, const std::vector<LayerGrads>& grads) {
  const double lr = cfg_.learning_rate;
  if (cfg_.optimizer == OptimizerKind::Sgd) {
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
      auto& l = net.layers[k];
      for (std::size_t i = 0; i < l.weight.size(); ++i)
        l.weight.data[i] -= lr * grads[k].weight.data[i];
      for (std::size_t i = 0; i < l.bias.size(); ++i)
        l.bias.data[i] -= lr * grads[k].bias.data[i];
    }
    return;
  }
  ++t_;
  const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2, eps = cfg_.adam_eps;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  auto update = [&](std::vector<double>& p, std::vector<double>& m,
                    std::vector<double>& v, const std::vector<double>& g) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  };
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    update(net.layers[k].weight.data, m_[k].weight.data, v_[k].weight.data,
           grads[k].weight.data);
    update(net.layers[k].bias.data, m_[k].bias.data, v_[k].bias.data,
           grads[k].bias.data);
  }
}

namespace {

void check_train_cfg(const TrainConfig& cfg, std::size_t n) {
  if (n == 0) throw std::invalid_argument("train: empty dataset");
  if (cfg.learning_rate <= 0.0)
    throw std::invalid_argument("train: learning_rate must be positive");
  if (cfg.batch_size == 0 || cfg.batch_size > n)
    throw std::invalid_argument("train: batch_size must be in [1, n]");
}

Tensor gather_rows(const Tensor& X, std::span<const std::size_t> idx) {
  const std::size_t d = X.cols();
  Tensor b({idx.size(), d});
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy(X.row(idx[i]), X.row(idx[i]) + d, b.row(i));
  return b;
}

}  // namespace

TrainResult train(const Network& net, const LabeledDataset& data,
                  const TrainConfig& cfg, const BatchHook& hook) {
  check_train_cfg(cfg, data.size());
  TrainResult res{net, {}};
  if (cfg.epochs == 0) return res;
  Rng shuffle_rng = Rng(cfg.seed).substream("train.shuffle");
  Optimizer opt(res.net, cfg);
  const std::size_t n = data.size();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto perm = shuffle_rng.permutation(n);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, n);
      std::span<const std::size_t> idx(perm.data() + start, end - start);
      Tensor bx = gather_rows(data.X, idx);
      std::vector<int> by(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) by[i] = data.y[idx[i]];
      if (hook) bx = hook(res.net, bx, by);
      Gradients g = loss_and_grads(res.net, bx, by);
      loss_sum += g.loss * static_cast<double>(idx.size());
      opt.step(res.net, g.params);
    }
    res.history.push_back(
        {loss_sum / static_cast<double>(n), accuracy(res.net, data)});
  }
  return res;
}

TrainResult train_regression(const Network& net, const Tensor& X,
                             const Tensor& targets, const TrainConfig& cfg) {
  check_train_cfg(cfg, X.rows());
  TrainResult res{net, {}};
  if (cfg.epochs == 0) return res;
  Rng shuffle_rng = Rng(cfg.seed).substream("train.shuffle");
  Optimizer opt(res.net, cfg);
  const std::size_t n = X.rows(), c = targets.cols();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto perm = shuffle_rng.permutation(n);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, n);
      std::span<const std::size_t> idx(perm.data() + start, end - start);
      Tensor bx = gather_rows(X, idx);
      Tensor bt({idx.size(), c});
      for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy(targets.row(idx[i]), targets.row(idx[i]) + c, bt.row(i));
      Gradients g = loss_and_grads_mse(res.net, bx, bt);
      loss_sum += g.loss * static_cast<double>(idx.size());
      opt.step(res.net, g.params);
    }
    res.history.push_back({loss_sum / static_cast<double>(n), 0.0});
  }
  return res;
}

std::vector<int> predict(const Network& net, const Tensor& X) {
  Tensor logits = forward(net, X);
  const std::size_t n = logits.rows(), c = logits.cols();
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* z = logits.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (z[j] > z[best]) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

double accuracy(const Network& net, const LabeledDataset& data) {
  if (data.size() == 0) throw std::invalid_argument("accuracy: empty dataset");
  auto preds = predict(net, data.X);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == data.y[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

}  // namespace interbench
