#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "interbench/data.hpp"
#include "interbench/nn.hpp"

namespace interbench {

struct FairnessMetrics {
  double demographic_parity_gap = 0.0;
  double tp_parity_gap = 0.0;
  double fp_parity_gap = 0.0;
  double equalized_odds_gap = 0.0;
  std::optional<double> p_rule;  // 100 * min_g P_g / max_g P_g; absent if max is 0
};

// Group-conditional rate gaps for a binary prediction task. Multi-class
// predictions reduce one-vs-rest on `positive_class`.
FairnessMetrics fairness_metrics(std::span<const int> preds,
                                 std::span<const int> labels,
                                 std::span<const int> groups,
                                 int positive_class = 1);

struct DebiasConfig {
  double lambda = 1.0;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double predictor_rate = 1e-2;
  double adversary_rate = 1e-2;
  std::uint64_t seed = 0;
};

// GAN-style alternating updates: the adversary learns to predict z from the
// predictor's output probabilities; the predictor maximizes task accuracy
// while defeating the adversary. lambda = 0 reproduces plain training of the
// predictor bit for bit.
Network adversarial_debiasing_train(const Network& predictor_template,
                                    const Network& adversary_template,
                                    const LabeledDataset& data_with_z,
                                    const DebiasConfig& cfg);

}  // namespace interbench
