#include "interbench/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace interbench {

FairnessMetrics fairness_metrics(std::span<const int> preds,
                                 std::span<const int> labels,
                                 std::span<const int> groups,
                                 int positive_class) {
  const std::size_t n = preds.size();
  if (n == 0 || labels.size() != n || groups.size() != n)
    throw std::invalid_argument("fairness_metrics: length mismatch");
  int gmax = 0;
  for (int g : groups) {
    if (g < 0) throw std::invalid_argument("fairness_metrics: negative group id");
    gmax = std::max(gmax, g);
  }
  const std::size_t ng = static_cast<std::size_t>(gmax) + 1;

  struct Counts {
    std::size_t n = 0, pos_pred = 0;
    std::size_t tp = 0, p = 0;  // true positives / actual positives
    std::size_t fp = 0, neg = 0;
  };
  std::vector<Counts> c(ng);
  for (std::size_t i = 0; i < n; ++i) {
    const bool pred_pos = preds[i] == positive_class;
    const bool actual_pos = labels[i] == positive_class;
    auto& g = c[static_cast<std::size_t>(groups[i])];
    ++g.n;
    if (pred_pos) ++g.pos_pred;
    if (actual_pos) {
      ++g.p;
      if (pred_pos) ++g.tp;
    } else {
      ++g.neg;
      if (pred_pos) ++g.fp;
    }
  }
  std::size_t present = 0;
  for (const auto& g : c)
    if (g.n > 0) ++present;
  if (present < 2)
    throw std::invalid_argument("fairness_metrics: need >= 2 groups present");

  auto gap = [&](auto num, auto den) {
    double lo = 2.0, hi = -1.0;
    for (const auto& g : c) {
      if (g.n == 0 || den(g) == 0) continue;
      const double rate = static_cast<double>(num(g)) / static_cast<double>(den(g));
      lo = std::min(lo, rate);
      hi = std::max(hi, rate);
    }
    return hi < lo ? 0.0 : hi - lo;
  };

  FairnessMetrics m;
  m.demographic_parity_gap =
      gap([](const Counts& g) { return g.pos_pred; }, [](const Counts& g) { return g.n; });
  m.tp_parity_gap =
      gap([](const Counts& g) { return g.tp; }, [](const Counts& g) { return g.p; });
  m.fp_parity_gap =
      gap([](const Counts& g) { return g.fp; }, [](const Counts& g) { return g.neg; });
  m.equalized_odds_gap = std::max(m.tp_parity_gap, m.fp_parity_gap);

  double lo = 2.0, hi = -1.0;
  for (const auto& g : c) {
    if (g.n == 0) continue;
    const double rate = static_cast<double>(g.pos_pred) / static_cast<double>(g.n);
    lo = std::min(lo, rate);
    hi = std::max(hi, rate);
  }
  if (hi > 0.0) m.p_rule = 100.0 * lo / hi;
  return m;
}

Network adversarial_debiasing_train(const Network& predictor_template,
                                    const Network& adversary_template,
                                    const LabeledDataset& data_with_z,
                                    const DebiasConfig& cfg) {
  if (!data_with_z.z)
    throw std::invalid_argument("adversarial_debiasing: sensitive attribute missing");
  if (adversary_template.input_dim() != predictor_template.output_dim())
    throw std::invalid_argument(
        "adversarial_debiasing: adversary input must match predictor output dim");
  const std::size_t n = data_with_z.size();
  if (cfg.batch_size == 0 || cfg.batch_size > n)
    throw std::invalid_argument("adversarial_debiasing: bad batch size");

  Network predictor = predictor_template;
  Network adversary = adversary_template;
  TrainConfig pred_cfg;
  pred_cfg.learning_rate = cfg.predictor_rate;
  TrainConfig adv_cfg;
  adv_cfg.learning_rate = cfg.adversary_rate;
  Optimizer pred_opt(predictor, pred_cfg);
  Optimizer adv_opt(adversary, adv_cfg);

  // Same shuffle stream as plain train, so lambda = 0 reproduces it exactly.
  Rng shuffle_rng = Rng(cfg.seed).substream("train.shuffle");
  const std::size_t d = data_with_z.dim();
  const std::size_t classes = predictor.output_dim();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto perm = shuffle_rng.permutation(n);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, n);
      const std::size_t bn = end - start;
      Tensor bx({bn, d});
      std::vector<int> by(bn), bz(bn);
      for (std::size_t i = 0; i < bn; ++i) {
        const std::size_t src = perm[start + i];
        std::copy(data_with_z.X.row(src), data_with_z.X.row(src) + d, bx.row(i));
        by[i] = data_with_z.y[src];
        bz[i] = (*data_with_z.z)[src];
      }

      // (1) adversary step on the current predictor's output probabilities
      auto pred_cache = forward_cached(predictor, bx);
      Tensor probs = softmax(pred_cache.post.back());
      Gradients adv_g = loss_and_grads(adversary, probs, bz);
      adv_opt.step(adversary, adv_g.params);

      // (2) predictor step: task CE minus lambda * adversary CE, adversary frozen
      Tensor task_probs = probs;
      Tensor dlogits({bn, classes});
      const double inv_n = 1.0 / static_cast<double>(bn);
      for (std::size_t i = 0; i < bn; ++i)
        for (std::size_t j = 0; j < classes; ++j) {
          double v = task_probs.at(i, j);
          if (static_cast<int>(j) == by[i]) v -= 1.0;
          dlogits.at(i, j) = v * inv_n;
        }
      if (cfg.lambda != 0.0) {
        // d(adversary CE)/d(probs), then through the softmax Jacobian
        Gradients pen = loss_and_grads(adversary, probs, bz);
        Tensor adv_dlogits({bn, classes});
        for (std::size_t i = 0; i < bn; ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < classes; ++j)
            dot += pen.input.at(i, j) * probs.at(i, j);
          for (std::size_t j = 0; j < classes; ++j)
            adv_dlogits.at(i, j) = probs.at(i, j) * (pen.input.at(i, j) - dot);
        }
        // Remove the task gradient's component along the adversary gradient
        // before subtracting it; this keeps the update from helping the
        // adversary and stabilizes the alternating optimization.
        double aa = 0.0, ta = 0.0;
        for (std::size_t k = 0; k < dlogits.data.size(); ++k) {
          aa += adv_dlogits.data[k] * adv_dlogits.data[k];
          ta += dlogits.data[k] * adv_dlogits.data[k];
        }
        const double proj = aa > 1e-24 ? ta / aa : 0.0;
        for (std::size_t k = 0; k < dlogits.data.size(); ++k)
          dlogits.data[k] -= (proj + cfg.lambda) * adv_dlogits.data[k];
      }
      Gradients pred_g = backward(predictor, bx, pred_cache, dlogits);
      pred_opt.step(predictor, pred_g.params);
    }
  }
  return predictor;
}

}  // namespace interbench
