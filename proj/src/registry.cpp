#include "interbench/registry.hpp"

namespace interbench {

const std::vector<RegistryEntry>& registry() {
  static const std::vector<RegistryEntry> entries = {
      {"evasion", "attacks", "pgd"},
      {"evasion", "defenses", "adversarial_training"},
      {"evasion", "metrics", "robust_accuracy"},
      {"poisoning", "attacks", "badnets"},
      {"poisoning", "defenses", "outlier_removal"},
      {"poisoning", "metrics", "test_accuracy"},
      {"poisoning", "metrics", "poisoned_accuracy"},
      {"unauth_model_ownership", "attacks", "model_extraction"},
      {"unauth_model_ownership", "defenses", "dataset_inference"},
      {"unauth_model_ownership", "defenses", "watermarking"},
      {"unauth_model_ownership", "metrics", "accuracy"},
      {"unauth_model_ownership", "metrics", "fpr"},
      {"unauth_model_ownership", "metrics", "fnr"},
      {"unauth_model_ownership", "metrics", "fid"},
      {"unauth_model_ownership", "metrics", "fid_corr"},
      {"membership_inference", "attacks", "lira"},
      {"membership_inference", "defenses", "dpsgd"},
      {"membership_inference", "metrics", "auc"},
      {"membership_inference", "metrics", "balanced_accuracy"},
      {"membership_inference", "metrics", "tpr_at_1pct_fpr"},
      {"attribute_inference", "attacks", "output_mlp"},
      {"attribute_inference", "metrics", "balanced_accuracy"},
      {"attribute_inference", "metrics", "auc"},
      {"distribution_inference", "attacks", "shadow_meta"},
      {"distribution_inference", "metrics", "attack_accuracy"},
      {"data_reconstruction", "attacks", "gradient_descent"},
      {"data_reconstruction", "defenses", "dpsgd"},
      {"data_reconstruction", "metrics", "mse"},
      {"data_reconstruction", "metrics", "ssim"},
      {"discriminatory_behavior", "defenses", "adversarial_debiasing"},
      {"discriminatory_behavior", "metrics", "demographic_parity"},
      {"discriminatory_behavior", "metrics", "tp_parity"},
      {"discriminatory_behavior", "metrics", "fp_parity"},
      {"discriminatory_behavior", "metrics", "equalized_odds"},
      {"discriminatory_behavior", "metrics", "p_rule"},
  };
  return entries;
}

namespace {

// Pipeline attack names map onto registry attack entries.
const std::map<std::string, std::string> kAttackNames = {
    {"pgd", "evasion"},
    {"badnets", "poisoning"},
    {"model_extraction", "unauth_model_ownership"},
    {"lira", "membership_inference"},
    {"output_mlp", "attribute_inference"},
    {"shadow_meta", "distribution_inference"},
    {"gradient_descent", "data_reconstruction"},
};

const std::map<std::string, std::string> kDefenseNames = {
    {"adversarial_training", "evasion"},
    {"outlier_removal", "poisoning"},
    {"dataset_inference", "unauth_model_ownership"},
    {"watermarking", "unauth_model_ownership"},
    {"dpsgd", "membership_inference"},
    {"adversarial_debiasing", "discriminatory_behavior"},
};

}  // namespace

bool is_registered_attack(const std::string& name) {
  return kAttackNames.count(name) > 0;
}

bool is_registered_defense(const std::string& name) {
  return kDefenseNames.count(name) > 0;
}

const std::map<std::string, std::string>& metric_definitions() {
  static const std::map<std::string, std::string> defs = {
      {"acc_te", "test accuracy"},
      {"acc_tr", "train accuracy"},
      {"acc_rob", "accuracy on PGD adversarial examples"},
      {"acc_pois", "accuracy of the evaluated model on the triggered eval set"},
      {"acc_pois_backdoored", "triggered-eval accuracy of the backdoored model"},
      {"acc_te_backdoored", "clean test accuracy of the backdoored model"},
      {"fid", "surrogate/target prediction agreement"},
      {"fid_corr", "agreement conditioned on correctness"},
      {"acc_te_surrogate", "surrogate test accuracy"},
      {"mia_auc", "membership inference AUC"},
      {"mia_balanced_accuracy", "membership inference balanced accuracy"},
      {"mia_tpr_at_1pct_fpr", "membership TPR at 1% FPR"},
      {"attr_acc", "attribute inference balanced accuracy"},
      {"attr_auc", "attribute inference AUC"},
      {"dist_attack_accuracy", "distribution inference attack accuracy"},
      {"recon_mse_avg", "reconstruction MSE vs class means, averaged"},
      {"recon_ssim_avg", "reconstruction SSIM vs class means, averaged"},
      {"recon_mse_c", "reconstruction MSE for one class (suffix = class id)"},
      {"fair_dp_gap", "demographic parity gap"},
      {"fair_tp_gap", "true positive parity gap"},
      {"fair_fp_gap", "false positive parity gap"},
      {"fair_eo_gap", "equalized odds gap"},
      {"fair_p_rule", "p-rule (percent)"},
      {"dp_epsilon", "privacy budget of the DPSGD run"},
      {"wm_trigger_accuracy", "watermark trigger-set accuracy"},
      {"di_statistic", "dataset inference t-statistic"},
      {"di_p_value", "dataset inference one-sided p-value"},
      {"di_stolen", "dataset inference verdict (1 = stolen)"},
  };
  return defs;
}

bool is_registered_metric(const std::string& report_key) {
  const auto& defs = metric_definitions();
  if (defs.count(report_key) > 0) return true;
  // per-class reconstruction keys: recon_mse_c<k>
  if (report_key.rfind("recon_mse_c", 0) == 0) return true;
  return false;
}

}  // namespace interbench
