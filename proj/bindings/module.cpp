// Python bindings for the main operations: dataset synthesis, experiment
// runs, and the standalone metric/score helpers.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "interbench/data.hpp"
#include "interbench/fairness.hpp"
#include "interbench/pipeline.hpp"
#include "interbench/privacy.hpp"
#include "interbench/registry.hpp"
#include "interbench/security.hpp"

namespace py = pybind11;
using namespace interbench;

namespace {

LabeledDataset dataset_from_arrays(py::array_t<double, py::array::c_style> X,
                                   const std::vector<int>& y) {
  auto buf = X.request();
  if (buf.ndim != 2) throw std::invalid_argument("X must be 2-D");
  const std::size_t n = static_cast<std::size_t>(buf.shape[0]);
  const std::size_t d = static_cast<std::size_t>(buf.shape[1]);
  if (y.size() != n) throw std::invalid_argument("len(y) must match X rows");
  LabeledDataset ds;
  ds.X = Tensor({n, d});
  const double* p = static_cast<const double*>(buf.ptr);
  std::copy(p, p + n * d, ds.X.data.begin());
  ds.y = y;
  int cmax = 0;
  for (int v : y) cmax = std::max(cmax, v);
  ds.class_count = cmax + 1;
  ds.normalized = true;
  return ds;
}

py::array_t<double> tensor_to_array(const Tensor& t) {
  py::array_t<double> out({t.rows(), t.cols()});
  std::copy(t.data.begin(), t.data.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_interbench, m) {
  m.doc() = "interaction benchmark for ML attacks and defenses";

  m.def("list_registry", [] {
    std::vector<std::string> out;
    for (const auto& e : registry()) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
  });

  m.def("metric_definitions", [] { return metric_definitions(); });

  m.def(
      "validate_config",
      [](const std::string& config_json) {
        return validate_config(nlohmann::json::parse(config_json));
      },
      py::arg("config_json"));

  m.def(
      "run_experiment",
      [](const std::string& config_json, std::size_t jobs) {
        auto cfg = ExperimentConfig::parse(nlohmann::json::parse(config_json));
        InteractionReport rep = run_experiment(cfg, jobs);
        return report_to_json(rep, true).dump(2);
      },
      py::arg("config_json"), py::arg("jobs") = 1,
      "Run every seed of a JSON experiment config; returns the report as JSON.");

  m.def(
      "synth_gauss",
      [](std::size_t n, std::size_t d, double mean_separation, double sensitive_shift,
         double cov_scale, double rho, double ratio, double label_noise,
         std::uint64_t seed) {
        SyntheticSpec spec;
        spec.n = n;
        spec.d = d;
        spec.mean_separation = mean_separation;
        spec.sensitive_shift = sensitive_shift;
        spec.cov_scale = cov_scale;
        spec.rho = rho;
        spec.ratio = ratio;
        spec.label_noise = label_noise;
        spec.seed = seed;
        LabeledDataset ds = synth_gauss(spec);
        return py::make_tuple(tensor_to_array(ds.X), ds.y,
                              ds.z ? py::cast(*ds.z) : py::none());
      },
      py::arg("n"), py::arg("d") = 2, py::arg("mean_separation") = 3.0,
      py::arg("sensitive_shift") = 0.0, py::arg("cov_scale") = 1.0,
      py::arg("rho") = 0.0, py::arg("ratio") = 0.0, py::arg("label_noise") = 0.0,
      py::arg("seed") = 0);

  m.def(
      "knn_shapley",
      [](py::array_t<double, py::array::c_style> X_train, const std::vector<int>& y_train,
         py::array_t<double, py::array::c_style> X_valid, const std::vector<int>& y_valid,
         std::size_t K) {
        LabeledDataset tr = dataset_from_arrays(X_train, y_train);
        LabeledDataset va = dataset_from_arrays(X_valid, y_valid);
        va.class_count = tr.class_count = std::max(tr.class_count, va.class_count);
        return knn_shapley(tr, va, K);
      },
      py::arg("X_train"), py::arg("y_train"), py::arg("X_valid"), py::arg("y_valid"),
      py::arg("k") = 5);

  m.def(
      "roc_metrics",
      [](const std::vector<double>& scores, const std::vector<bool>& is_member,
         double fpr_target) {
        if (scores.size() != is_member.size())
          throw std::invalid_argument("scores and labels must have equal length");
        std::vector<MembershipScore> s(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i)
          s[i] = {i, scores[i], static_cast<bool>(is_member[i])};
        RocMetrics r = roc_metrics(s, fpr_target);
        return py::dict(py::arg("auc") = r.auc,
                        py::arg("balanced_accuracy") = r.balanced_accuracy,
                        py::arg("tpr_at_fpr") = r.tpr_at_fpr);
      },
      py::arg("scores"), py::arg("is_member"), py::arg("fpr_target") = 0.01);

  m.def(
      "rdp_epsilon",
      [](double noise_multiplier, double delta, std::size_t steps) {
        DpConfig dp;
        dp.noise_multiplier = noise_multiplier;
        dp.delta = delta;
        return rdp_epsilon(dp, steps);
      },
      py::arg("noise_multiplier"), py::arg("delta"), py::arg("steps"));

  m.def(
      "fairness_metrics",
      [](const std::vector<int>& preds, const std::vector<int>& labels,
         const std::vector<int>& groups, int positive_class) {
        FairnessMetrics f = fairness_metrics(preds, labels, groups, positive_class);
        py::dict out;
        out["demographic_parity_gap"] = f.demographic_parity_gap;
        out["tp_parity_gap"] = f.tp_parity_gap;
        out["fp_parity_gap"] = f.fp_parity_gap;
        out["equalized_odds_gap"] = f.equalized_odds_gap;
        out["p_rule"] = f.p_rule ? py::cast(*f.p_rule) : py::none();
        return out;
      },
      py::arg("preds"), py::arg("labels"), py::arg("groups"),
      py::arg("positive_class") = 1);
}
