#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "interbench/data.hpp"
#include "interbench/nn.hpp"

namespace interbench {

struct PgdConfig {
  double epsilon = 0.03;     // L-inf budget in normalized feature units
  double step = 0.0;         // 0: defaults to epsilon / 4
  std::size_t steps = 10;
  bool random_start = true;
  std::uint64_t seed = 0;
  double step_or_default() const { return step > 0.0 ? step : epsilon / 4.0; }
};

// Projected gradient descent in the L-inf ball, clipped to [0,1].
// Labels are unchanged; requires features already in [0,1].
LabeledDataset pgd_attack(const Network& net, const LabeledDataset& ds,
                          const PgdConfig& cfg);

// accuracy(net, pgd_attack(net, ds, cfg)); epsilon=0 reduces to accuracy.
double robust_accuracy(const Network& net, const LabeledDataset& ds,
                       const PgdConfig& cfg);

// Each batch is replaced by its PGD perturbation against the current
// parameters before the gradient step. PGD noise comes from a dedicated
// substream, so epsilon=0 reproduces plain train bit for bit.
TrainResult adversarial_training(const Network& net, const LabeledDataset& ds,
                                 const TrainConfig& train_cfg,
                                 const PgdConfig& pgd_cfg);

struct TriggerSpec {
  std::vector<std::size_t> indices;
  std::vector<double> values;  // in [0,1], same length as indices
  int target_class = 0;
  double poison_rate = 0.1;  // in (0, 1]
};

// 3x3 corner patch of value 1.0 for grid datasets.
TriggerSpec corner_patch_trigger(const LabeledDataset& ds, std::size_t patch = 3,
                                 double value = 1.0, int target_class = 0);

struct PoisonResult {
  LabeledDataset poisoned_train;
  LabeledDataset triggered_eval;  // every test row triggered, labeled target
  std::vector<std::size_t> poisoned_rows;
};

// BadNets: write the trigger into ceil(p*n) random train rows and set their
// label to the target class.
PoisonResult badnets_poison(const LabeledDataset& train, const LabeledDataset& test,
                            const TriggerSpec& trig, std::uint64_t seed);

// Closed-form Shapley values of training records under the K-NN utility,
// averaged over validation points. Ties in distance broken by index.
std::vector<double> knn_shapley(const LabeledDataset& train,
                                const LabeledDataset& valid, std::size_t K);

struct OutlierRemovalResult {
  LabeledDataset reduced_train;
  Network model;
  std::vector<std::size_t> removed;  // indices into the original train set
};

// Removes the ceil(fraction*n) records with the highest (default) Shapley
// values, ties by index, then retrains the template from scratch.
OutlierRemovalResult outlier_removal(const LabeledDataset& train,
                                     const LabeledDataset& valid, std::size_t K,
                                     double fraction, const TrainConfig& train_cfg,
                                     const Network& net_template,
                                     bool remove_highest = true);

// Surrogate trained with mse loss against the target's logits; labels of the
// adversary data are ignored.
Network extract_model(const Network& target, const Network& surrogate_template,
                      const LabeledDataset& adversary_data,
                      const TrainConfig& train_cfg);

struct ExtractionMetrics {
  double acc_te = 0.0;                // surrogate test accuracy
  double fid = 0.0;                   // agreement rate
  std::optional<double> fid_corr;     // P(correct | agree); absent if no agreement
};

ExtractionMetrics extraction_metrics(const Network& target, const Network& surrogate,
                                     const LabeledDataset& test);

struct OwnershipVerdict {
  double statistic = 0.0;
  std::optional<double> p_value;
  bool stolen = false;
  double threshold = 0.0;
};

struct ProbeConfig {
  double step = 0.01;          // gradient-sign walk step
  std::size_t max_steps = 200;
  double alpha_sig = 0.05;
};

// Decision-boundary-distance fingerprinting: per sample, L2 distance of a
// gradient-sign walk until the suspect's prediction flips (capped), negated
// when the suspect misclassifies the record. Welch t-test between
// victim-train and public fingerprints; stolen iff the train mean is
// significantly larger.
OwnershipVerdict dataset_inference(const LabeledDataset& victim_train,
                                   const LabeledDataset& public_data,
                                   const Network& suspect, const ProbeConfig& cfg);

struct WatermarkConfig {
  std::size_t count = 32;
  std::uint64_t seed = 0;
};

struct WatermarkResult {
  LabeledDataset augmented;    // train set + trigger records
  LabeledDataset trigger_set;  // uniform-random inputs, uniform-random labels
};

WatermarkResult embed_watermark(const LabeledDataset& train, const WatermarkConfig& cfg);

// Stolen iff trigger-set accuracy >= threshold; threshold in (1/c, 1].
OwnershipVerdict verify_watermark(const Network& suspect,
                                  const LabeledDataset& trigger_set,
                                  double threshold);

struct PopulationMetrics {
  double accuracy = 0.0;
  double fpr = 0.0;  // P(stolen | independent)
  double fnr = 0.0;  // P(independent | derived)
};

PopulationMetrics ownership_population_metrics(
    const std::vector<OwnershipVerdict>& derived,
    const std::vector<OwnershipVerdict>& independent);

}  // namespace interbench
