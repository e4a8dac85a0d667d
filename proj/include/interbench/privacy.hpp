#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "interbench/data.hpp"
#include "interbench/nn.hpp"

namespace interbench {

// LiRA confidence transform: log(p / (1-p)) with p clamped away from {0,1}.
double logit_scale(double p);

enum class LiraMode { Online, Offline };

struct ShadowConfig {
  std::size_t count = 16;
  double subset_fraction = 0.5;
  std::vector<std::size_t> hidden;  // shadow architecture
  TrainConfig train_cfg;
  std::uint64_t seed = 0;
  double variance_floor = 1e-6;
};

struct MembershipScore {
  std::size_t example_id = 0;
  double score = 0.0;   // higher = more likely member
  bool truth_member = false;
};

// Shadow-model likelihood-ratio membership scores. `pool` must contain the
// challenge rows (challenge_ids index into it); each shadow trains on a
// random subset of the pool and the in/out mask per challenge is recorded.
// Online mode resamples masks until every challenge has >= 2 in- and 2
// out-shadows; offline uses out-shadows only.
std::vector<MembershipScore> lira_scores(const Network& target,
                                         const LabeledDataset& pool,
                                         const std::vector<std::size_t>& challenge_ids,
                                         const std::vector<bool>& truth_member,
                                         const ShadowConfig& shadows, LiraMode mode);

struct RocMetrics {
  double auc = 0.0;
  double balanced_accuracy = 0.0;
  double tpr_at_fpr = 0.0;
  double fpr_target = 0.01;
};

// AUC by Mann-Whitney with ties counted 0.5; balanced accuracy maximized over
// thresholds; TPR@FPR over achievable operating points, no interpolation.
RocMetrics roc_metrics(const std::vector<MembershipScore>& scores,
                       double fpr_target = 0.01);

struct DpConfig {
  double clip_norm = 1.0;       // C > 0
  double noise_multiplier = 1.0;  // sigma >= 0
  std::size_t lot_size = 32;
  double delta = 1e-5;
};

struct DpsgdResult {
  Network net;
  std::vector<EpochStats> history;
  std::size_t steps = 0;
  double epsilon = 0.0;  // +inf when sigma == 0
};

// Per-sample clipping to global L2 norm C, Gaussian noise of std sigma*C per
// coordinate on the summed gradient, mean over the lot, optimizer step.
DpsgdResult dpsgd_train(const Network& net, const LabeledDataset& data,
                        const TrainConfig& train_cfg, const DpConfig& dp);

// Conservative non-subsampled Gaussian-mechanism RDP bound:
// min over alpha in {2..64} of steps*alpha/(2 sigma^2) + ln(1/delta)/(alpha-1).
double rdp_epsilon(const DpConfig& dp, std::size_t steps);

struct AttributeAttackConfig {
  std::vector<std::size_t> hidden = {16};
  TrainConfig train_cfg;
  bool append_label_onehot = false;  // attacker sees probabilities only by default
  std::uint64_t seed = 0;
};

struct AttributeAttackResult {
  double balanced_accuracy = 0.0;  // mean of per-group recalls
  double auc = 0.0;
};

// Trains an MLP on the target's output probabilities to infer the sensitive
// attribute; evaluated on a held-out set with z present.
AttributeAttackResult attribute_inference_attack(const Network& target,
                                                 const LabeledDataset& adversary_data,
                                                 const LabeledDataset& eval_data,
                                                 const AttributeAttackConfig& cfg);

struct DistributionAttackConfig {
  double ratio_world0 = 0.1;
  double ratio_world1 = 0.9;
  std::size_t shadows_per_world = 16;
  std::size_t probe_size = 64;
  std::vector<std::size_t> meta_hidden = {16};
  TrainConfig meta_train_cfg;
  std::uint64_t seed = 0;
};

// Trains a model on data drawn with the given sensitive-attribute ratio.
using WorldModelFactory = std::function<Network(double ratio, std::uint64_t seed)>;

// Meta-classifier over concatenated softmax outputs on a fixed probe set;
// victim models are labeled by their true world. Returns attack accuracy.
double distribution_inference_attack(const DistributionAttackConfig& cfg,
                                     const WorldModelFactory& factory,
                                     const std::vector<std::pair<Network, int>>& victims,
                                     const Tensor& probe_set);

struct ReconstructionConfig {
  std::size_t steps = 200;
  double rate = 0.01;
  bool seeded_init = false;  // default: all 0.5
  std::uint64_t seed = 0;
};

// Gradient-descent input reconstruction maximizing class confidence,
// clipped to [0,1] each step.
Tensor reconstruct_class(const Network& target, int cls,
                         const ReconstructionConfig& cfg);

struct ReconstructionMetrics {
  std::vector<double> mse_per_class;
  double mse_avg = 0.0;
  std::optional<std::vector<double>> ssim_per_class;  // grid data only
  std::optional<double> ssim_avg;
};

// MSE against the per-class mean training record; SSIM over 7x7 uniform
// sliding windows when grid metadata is present.
ReconstructionMetrics reconstruction_metrics(const std::vector<Tensor>& reconstructions,
                                             const LabeledDataset& train_set);

// SSIM between two equally-shaped images with C1=(0.01)^2, C2=(0.03)^2.
double ssim(const Tensor& a, const Tensor& b, std::size_t h, std::size_t w,
            std::size_t window = 7);

}  // namespace interbench
