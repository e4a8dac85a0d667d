#include "interbench/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "interbench/fairness.hpp"
#include "interbench/privacy.hpp"
#include "interbench/registry.hpp"
#include "interbench/security.hpp"
#include "interbench/stats.hpp"

namespace interbench {

namespace {

using nlohmann::json;

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return Rng(seed).substream(label).seed();
}

void check(std::vector<std::string>& out, bool ok, const std::string& path,
           const std::string& msg) {
  if (!ok) out.push_back(path + ": " + msg);
}

bool is_uint_array(const json& j) {
  if (!j.is_array()) return false;
  for (const auto& v : j)
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      return false;
  return true;
}

}  // namespace

std::vector<std::string> validate_config(const json& j) {
  std::vector<std::string> out;
  if (!j.is_object()) {
    out.push_back("$: config must be a JSON object");
    return out;
  }
  static const std::vector<std::string> known = {
      "dataset", "split", "model", "train", "defense", "attacks", "seeds", "sweep"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      out.push_back(it.key() + ": unknown top-level key");
  }

  if (!j.contains("dataset") || !j["dataset"].is_object()) {
    out.push_back("dataset: required object");
  } else {
    const auto& d = j["dataset"];
    const std::string type = d.value("type", "");
    if (type == "synthetic") {
      check(out, d.value("n", 1000) >= 10, "dataset.n", "need n >= 10");
      check(out, d.value("d", 2) >= 1, "dataset.d", "need d >= 1");
      const double noise = d.value("label_noise", 0.0);
      check(out, noise >= 0.0 && noise < 0.5, "dataset.label_noise", "must be in [0, 0.5)");
      const double ratio = d.value("ratio", 0.0);
      check(out, ratio >= 0.0 && ratio <= 1.0, "dataset.ratio", "must be in [0, 1]");
      const double rho = d.value("rho", 0.0);
      check(out, rho >= -1.0 && rho <= 1.0, "dataset.rho", "must be in [-1, 1]");
      check(out, d.value("cov_scale", 1.0) > 0.0, "dataset.cov_scale", "must be > 0");
    } else if (type == "csv") {
      check(out, !d.value("path", std::string()).empty(), "dataset.path", "required");
      check(out, !d.value("label_column", std::string()).empty(), "dataset.label_column",
            "required");
    } else {
      out.push_back("dataset.type: must be \"synthetic\" or \"csv\"");
    }
  }

  if (j.contains("split")) {
    const auto& s = j["split"];
    if (!s.is_object()) {
      out.push_back("split: must be an object");
    } else {
      const double tr = s.value("train", 0.5);
      const double te = s.value("test", 0.25);
      const double ad = s.value("adversary", 0.25);
      check(out, tr > 0.0, "split.train", "must be > 0");
      check(out, te > 0.0, "split.test", "must be > 0");
      check(out, ad >= 0.0, "split.adversary", "must be >= 0");
      check(out, tr + te + ad <= 1.0 + 1e-9, "split", "fractions must sum to <= 1");
    }
  }

  if (j.contains("model")) {
    const auto& m = j["model"];
    if (!m.is_object() || (m.contains("hidden") && !is_uint_array(m["hidden"])))
      out.push_back("model.hidden: must be an array of non-negative integers");
  }

  if (j.contains("train")) {
    const auto& t = j["train"];
    if (!t.is_object()) {
      out.push_back("train: must be an object");
    } else {
      check(out, t.value("epochs", 1) >= 1, "train.epochs", "must be >= 1");
      check(out, t.value("batch_size", 1) >= 1, "train.batch_size", "must be >= 1");
      check(out, t.value("learning_rate", 1.0) > 0.0, "train.learning_rate",
            "must be > 0");
      const std::string opt = t.value("optimizer", "adam");
      check(out, opt == "adam" || opt == "sgd", "train.optimizer",
            "must be \"adam\" or \"sgd\"");
      const std::string loss = t.value("loss", "cross_entropy");
      check(out, loss == "cross_entropy" || loss == "mse", "train.loss",
            "must be \"cross_entropy\" or \"mse\"");
    }
  }

  if (j.contains("defense")) {
    const auto& d = j["defense"];
    if (!d.is_object() || !d.contains("name") || !d["name"].is_string()) {
      out.push_back("defense: must be {\"name\": ..., \"params\": {...}}");
    } else if (!is_registered_defense(d["name"].get<std::string>())) {
      out.push_back("defense.name: \"" + d["name"].get<std::string>() +
                    "\" is not in the registry (see the `list` subcommand)");
    }
  }

  if (j.contains("attacks")) {
    const auto& a = j["attacks"];
    if (!a.is_array()) {
      out.push_back("attacks: must be an array");
    } else {
      for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& e = a[i];
        const std::string path = "attacks[" + std::to_string(i) + "]";
        if (!e.is_object() || !e.contains("name") || !e["name"].is_string())
          out.push_back(path + ": must be {\"name\": ..., \"params\": {...}}");
        else if (!is_registered_attack(e["name"].get<std::string>()))
          out.push_back(path + ".name: \"" + e["name"].get<std::string>() +
                        "\" is not in the registry (see the `list` subcommand)");
      }
    }
  }

  if (!j.contains("seeds") || !is_uint_array(j["seeds"]) || j["seeds"].empty())
    out.push_back("seeds: required non-empty array of non-negative integers");

  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    if (!s.is_object() || !s.contains("param") || !s["param"].is_string() ||
        !s.contains("values") || !s["values"].is_array() || s["values"].empty())
      out.push_back("sweep: must be {\"param\": ..., \"values\": [...]}");
    else if (!j.contains("defense"))
      out.push_back("sweep: requires a defense to sweep over");
  }
  return out;
}

ExperimentConfig ExperimentConfig::parse(const json& j) {
  auto problems = validate_config(j);
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }

  ExperimentConfig cfg;
  cfg.raw = j;

  const auto& d = j["dataset"];
  if (d["type"] == "synthetic") {
    cfg.synthetic = true;
    cfg.synth.n = d.value("n", std::size_t{1000});
    cfg.synth.d = d.value("d", std::size_t{2});
    cfg.synth.mean_separation = d.value("mean_separation", 3.0);
    cfg.synth.sensitive_shift = d.value("sensitive_shift", 0.0);
    cfg.synth.cov_scale = d.value("cov_scale", 1.0);
    cfg.synth.rho = d.value("rho", 0.0);
    cfg.synth.ratio = d.value("ratio", 0.0);
    cfg.synth.label_noise = d.value("label_noise", 0.0);
    cfg.synth.seed = d.value("seed", std::uint64_t{0});
    if (d.contains("grid")) {
      cfg.synth.grid = {d["grid"][0].get<std::size_t>(), d["grid"][1].get<std::size_t>()};
      cfg.synth.d = cfg.synth.grid->first * cfg.synth.grid->second;
    }
  } else {
    cfg.csv_path = d["path"].get<std::string>();
    cfg.schema.label_column = d["label_column"].get<std::string>();
    cfg.schema.sensitive_column = d.value("sensitive_column", std::string());
    cfg.schema.normalize = d.value("normalize", true);
    cfg.schema.sensitive_as_feature = d.value("sensitive_as_feature", false);
  }

  if (j.contains("split")) {
    const auto& s = j["split"];
    cfg.split_spec.train_fraction = s.value("train", 0.5);
    cfg.split_spec.test_fraction = s.value("test", 0.25);
    cfg.split_spec.adversary_fraction = s.value("adversary", 0.25);
  }

  if (j.contains("model") && j["model"].contains("hidden"))
    cfg.hidden = j["model"]["hidden"].get<std::vector<std::size_t>>();
  else
    cfg.hidden = {16};

  if (j.contains("train")) {
    const auto& t = j["train"];
    cfg.train_cfg.epochs = t.value("epochs", std::size_t{30});
    cfg.train_cfg.batch_size = t.value("batch_size", std::size_t{32});
    cfg.train_cfg.learning_rate = t.value("learning_rate", 1e-2);
    cfg.train_cfg.optimizer = t.value("optimizer", std::string("adam")) == "sgd"
                                  ? OptimizerKind::Sgd
                                  : OptimizerKind::Adam;
    cfg.train_cfg.loss = t.value("loss", std::string("cross_entropy")) == "mse"
                             ? LossKind::Mse
                             : LossKind::CrossEntropy;
  }

  if (j.contains("defense"))
    cfg.defense = {j["defense"]["name"].get<std::string>(),
                   j["defense"].value("params", json::object())};

  if (j.contains("attacks"))
    for (const auto& a : j["attacks"])
      cfg.attacks.emplace_back(a["name"].get<std::string>(),
                               a.value("params", json::object()));

  cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  return cfg;
}

LabeledDataset build_dataset(const ExperimentConfig& cfg) {
  if (cfg.synthetic) return normalize_minmax(synth_gauss(cfg.synth));
  return load_csv(cfg.csv_path, cfg.schema);
}

namespace {

LabeledDataset concat_datasets(const LabeledDataset& a, const LabeledDataset& b) {
  LabeledDataset out = a;
  const std::size_t d = a.dim();
  if (b.dim() != d) throw std::invalid_argument("concat: dim mismatch");
  Tensor X({a.size() + b.size(), d});
  std::copy(a.X.data.begin(), a.X.data.end(), X.data.begin());
  std::copy(b.X.data.begin(), b.X.data.end(), X.data.begin() + a.X.data.size());
  out.X = std::move(X);
  out.y.insert(out.y.end(), b.y.begin(), b.y.end());
  if (a.z && b.z) {
    out.z = *a.z;
    out.z->insert(out.z->end(), b.z->begin(), b.z->end());
  } else {
    out.z.reset();
  }
  out.class_count = std::max(a.class_count, b.class_count);
  out.group_count = std::max(a.group_count, b.group_count);
  return out;
}

struct DefenseOutcome {
  Network net;
  std::map<std::string, std::optional<double>> extras;
  std::optional<LabeledDataset> trigger_set;  // watermarking only
};

DefenseOutcome apply_defense(const ExperimentConfig& cfg, const Splits& sp,
                             std::uint64_t seed, const Network& tmpl,
                             const TrainConfig& tc, const Network& m_std) {
  const auto& [name, params] = *cfg.defense;
  DefenseOutcome out{m_std, {}, std::nullopt};

  if (name == "adversarial_training") {
    PgdConfig pc;
    pc.epsilon = params.value("epsilon", 0.03);
    pc.step = params.value("step", 0.0);
    pc.steps = params.value("steps", std::size_t{10});
    pc.random_start = params.value("random_start", true);
    pc.seed = seed;
    out.net = adversarial_training(tmpl, sp.train, tc, pc).net;
  } else if (name == "outlier_removal") {
    const std::size_t K = params.value("k", std::size_t{5});
    const double fraction = params.value("fraction", 0.1);
    auto res = outlier_removal(sp.train, sp.adversary, K, fraction, tc, tmpl,
                               params.value("remove_highest", true));
    out.net = res.model;
  } else if (name == "dpsgd") {
    DpConfig dp;
    dp.clip_norm = params.value("clip_norm", 1.0);
    dp.noise_multiplier = params.value("noise_multiplier", 1.0);
    dp.lot_size = params.value("lot_size", tc.batch_size);
    dp.delta = params.value("delta", 1e-5);
    auto res = dpsgd_train(tmpl, sp.train, tc, dp);
    out.net = res.net;
    out.extras["dp_epsilon"] = res.epsilon;
  } else if (name == "watermarking") {
    WatermarkConfig wc;
    wc.count = params.value("count", std::size_t{32});
    wc.seed = derive_seed(seed, "defense.watermark");
    auto wm = embed_watermark(sp.train, wc);
    out.net = train(tmpl, wm.augmented, tc).net;
    out.trigger_set = wm.trigger_set;
  } else if (name == "dataset_inference") {
    ProbeConfig pc;
    pc.step = params.value("step", 0.01);
    pc.max_steps = params.value("max_steps", std::size_t{200});
    pc.alpha_sig = params.value("alpha_sig", 0.05);
    auto v = dataset_inference(sp.train, sp.adversary, m_std, pc);
    out.net = m_std;
    out.extras["di_statistic"] = v.statistic;
    out.extras["di_p_value"] =
        v.p_value ? std::optional<double>(*v.p_value) : std::nullopt;
    out.extras["di_stolen"] = v.stolen ? 1.0 : 0.0;
  } else if (name == "adversarial_debiasing") {
    if (!sp.train.z)
      throw std::invalid_argument("adversarial_debiasing: dataset has no sensitive attribute");
    Rng adv_init = Rng(seed).substream("debias.adv.init");
    Network adversary =
        make_mlp(tmpl.output_dim(), {8},
                 static_cast<std::size_t>(std::max(sp.train.group_count, 2)), adv_init);
    DebiasConfig dc;
    dc.lambda = params.value("lambda", 1.0);
    dc.epochs = tc.epochs;
    dc.batch_size = tc.batch_size;
    dc.predictor_rate = tc.learning_rate;
    dc.adversary_rate = params.value("adversary_rate", tc.learning_rate);
    dc.seed = seed;
    out.net = adversarial_debiasing_train(tmpl, adversary, sp.train, dc);
  } else {
    throw std::invalid_argument("unknown defense: " + name);
  }
  return out;
}

void base_metrics(SeedRecord& rec, const Network& net, const Splits& sp) {
  rec.metrics["acc_te"] = accuracy(net, sp.test);
  rec.metrics["acc_tr"] = accuracy(net, sp.train);
  if (sp.test.z && sp.test.group_count >= 2) {
    std::vector<int> present;
    for (int g : *sp.test.z)
      if (std::find(present.begin(), present.end(), g) == present.end())
        present.push_back(g);
    if (present.size() < 2) return;  // degenerate split: nothing to compare
    try {
      auto preds = predict(net, sp.test.X);
      auto fm = fairness_metrics(preds, sp.test.y, *sp.test.z);
      rec.metrics["fair_dp_gap"] = fm.demographic_parity_gap;
      rec.metrics["fair_tp_gap"] = fm.tp_parity_gap;
      rec.metrics["fair_fp_gap"] = fm.fp_parity_gap;
      rec.metrics["fair_eo_gap"] = fm.equalized_odds_gap;
      rec.metrics["fair_p_rule"] =
          fm.p_rule ? std::optional<double>(*fm.p_rule) : std::nullopt;
    } catch (const std::exception& e) {
      rec.errors["fairness"] = e.what();
    }
  }
}

void run_attack(const ExperimentConfig& cfg, const Splits& sp, std::uint64_t seed,
                const Network& net, const std::string& name, const json& params,
                SeedRecord& rec) {
  const TrainConfig tc = [&] {
    TrainConfig t = cfg.train_cfg;
    t.seed = seed;
    return t;
  }();

  if (name == "pgd") {
    PgdConfig pc;
    pc.epsilon = params.value("epsilon", 0.03);
    pc.step = params.value("step", 0.0);
    pc.steps = params.value("steps", std::size_t{10});
    pc.random_start = params.value("random_start", true);
    pc.seed = derive_seed(seed, "attack.pgd");
    rec.metrics["acc_rob"] = robust_accuracy(net, sp.test, pc);
  } else if (name == "badnets") {
    TriggerSpec trig;
    if (params.contains("indices")) {
      trig.indices = params["indices"].get<std::vector<std::size_t>>();
      trig.values = params.value("values", std::vector<double>(trig.indices.size(), 1.0));
    } else {
      trig = corner_patch_trigger(sp.train, params.value("patch", std::size_t{3}));
    }
    trig.target_class = params.value("target_class", 0);
    trig.poison_rate = params.value("poison_rate", 0.1);
    auto pr = badnets_poison(sp.train, sp.test, trig, derive_seed(seed, "attack.badnets"));
    Rng init = Rng(seed).substream("attack.badnets.init");
    Network bd_tmpl = make_mlp(sp.train.dim(), cfg.hidden,
                               static_cast<std::size_t>(sp.train.class_count), init);
    Network backdoored = train(bd_tmpl, pr.poisoned_train, tc).net;
    rec.metrics["acc_pois"] = accuracy(net, pr.triggered_eval);
    rec.metrics["acc_pois_backdoored"] = accuracy(backdoored, pr.triggered_eval);
    rec.metrics["acc_te_backdoored"] = accuracy(backdoored, sp.test);
  } else if (name == "model_extraction") {
    Rng init = Rng(seed).substream("attack.extract.init");
    std::vector<std::size_t> hidden =
        params.value("hidden", cfg.hidden);
    Network surr_tmpl = make_mlp(sp.train.dim(), hidden,
                                 static_cast<std::size_t>(sp.train.class_count), init);
    TrainConfig etc = tc;
    etc.epochs = params.value("epochs", tc.epochs);
    etc.seed = derive_seed(seed, "attack.extract");
    Network surrogate = extract_model(net, surr_tmpl, sp.adversary, etc);
    auto em = extraction_metrics(net, surrogate, sp.test);
    rec.metrics["fid"] = em.fid;
    rec.metrics["fid_corr"] =
        em.fid_corr ? std::optional<double>(*em.fid_corr) : std::nullopt;
    rec.metrics["acc_te_surrogate"] = em.acc_te;
  } else if (name == "lira") {
    LabeledDataset pool = concat_datasets(sp.train, sp.test);
    const std::size_t n_tr = sp.train.size(), n_te = sp.test.size();
    std::size_t half = params.value("challenges", std::size_t{64}) / 2;
    half = std::min({half, n_tr, n_te});
    if (half == 0) throw std::invalid_argument("lira: empty challenge set");
    Rng pick = Rng(seed).substream("attack.lira.challenges");
    auto tr_perm = pick.permutation(n_tr);
    auto te_perm = pick.permutation(n_te);
    std::vector<std::size_t> ids;
    std::vector<bool> truth;
    for (std::size_t i = 0; i < half; ++i) {
      ids.push_back(tr_perm[i]);
      truth.push_back(true);
      ids.push_back(n_tr + te_perm[i]);
      truth.push_back(false);
    }
    ShadowConfig sc;
    sc.count = params.value("shadows", std::size_t{8});
    sc.subset_fraction = params.value("subset_fraction", 0.5);
    sc.hidden = cfg.hidden;
    sc.train_cfg = tc;
    sc.train_cfg.epochs = params.value("shadow_epochs", tc.epochs);
    sc.seed = derive_seed(seed, "attack.lira");
    const LiraMode mode = params.value("mode", std::string("online")) == "offline"
                              ? LiraMode::Offline
                              : LiraMode::Online;
    auto scores = lira_scores(net, pool, ids, truth, sc, mode);
    auto roc = roc_metrics(scores, params.value("fpr_target", 0.01));
    rec.metrics["mia_auc"] = roc.auc;
    rec.metrics["mia_balanced_accuracy"] = roc.balanced_accuracy;
    rec.metrics["mia_tpr_at_1pct_fpr"] = roc.tpr_at_fpr;
  } else if (name == "output_mlp") {
    if (!sp.adversary.z || !sp.test.z)
      throw std::invalid_argument("attribute inference: dataset has no sensitive attribute");
    AttributeAttackConfig ac;
    if (params.contains("hidden"))
      ac.hidden = params["hidden"].get<std::vector<std::size_t>>();
    ac.train_cfg = tc;
    ac.train_cfg.epochs = params.value("epochs", tc.epochs);
    ac.append_label_onehot = params.value("append_label_onehot", false);
    ac.seed = derive_seed(seed, "attack.attr");
    auto r = attribute_inference_attack(net, sp.adversary, sp.test, ac);
    rec.metrics["attr_acc"] = r.balanced_accuracy;
    rec.metrics["attr_auc"] = r.auc;
  } else if (name == "shadow_meta") {
    if (!cfg.synthetic)
      throw std::invalid_argument("distribution inference: needs a synthetic dataset");
    DistributionAttackConfig dc;
    dc.ratio_world0 = params.value("ratio_world0", 0.1);
    dc.ratio_world1 = params.value("ratio_world1", 0.9);
    dc.shadows_per_world = params.value("shadows_per_world", std::size_t{4});
    dc.probe_size = params.value("probe_size", std::size_t{64});
    dc.meta_train_cfg = tc;
    dc.meta_train_cfg.epochs = params.value("meta_epochs", tc.epochs);
    dc.seed = derive_seed(seed, "attack.distinf");
    const SyntheticSpec base_spec = cfg.synth;
    const TrainConfig world_tc = tc;
    const std::vector<std::size_t> hidden = cfg.hidden;
    WorldModelFactory factory = [base_spec, world_tc, hidden](double ratio,
                                                             std::uint64_t s) {
      SyntheticSpec spec = base_spec;
      spec.ratio = ratio;
      spec.rho = 0.0;  // keep (ratio, rho) feasible across both worlds
      spec.seed = s;
      LabeledDataset ds = normalize_minmax(synth_gauss(spec));
      Rng init = Rng(s).substream("init");
      Network t = make_mlp(ds.dim(), hidden,
                           static_cast<std::size_t>(ds.class_count), init);
      TrainConfig wtc = world_tc;
      wtc.seed = s;
      return train(t, ds, wtc).net;
    };
    const std::size_t victims_per_world = params.value("victims_per_world", std::size_t{2});
    std::vector<std::pair<Network, int>> victims;
    for (int world = 0; world < 2; ++world) {
      const double ratio = world == 0 ? dc.ratio_world0 : dc.ratio_world1;
      for (std::size_t i = 0; i < victims_per_world; ++i) {
        const std::uint64_t vs =
            derive_seed(seed, "attack.distinf.victim." + std::to_string(world) + "." +
                                  std::to_string(i));
        victims.emplace_back(factory(ratio, vs), world);
      }
    }
    const std::size_t probe_n = std::min(dc.probe_size, sp.adversary.size());
    if (probe_n == 0) throw std::invalid_argument("distribution inference: empty probe set");
    Tensor probe({probe_n, sp.adversary.dim()});
    std::copy(sp.adversary.X.data.begin(),
              sp.adversary.X.data.begin() + probe_n * sp.adversary.dim(),
              probe.data.begin());
    rec.metrics["dist_attack_accuracy"] =
        distribution_inference_attack(dc, factory, victims, probe);
  } else if (name == "gradient_descent") {
    ReconstructionConfig rc;
    rc.steps = params.value("steps", std::size_t{200});
    rc.rate = params.value("rate", 0.01);
    rc.seeded_init = params.value("seeded_init", false);
    rc.seed = derive_seed(seed, "attack.recon");
    std::vector<Tensor> recons;
    for (int c = 0; c < sp.train.class_count; ++c)
      recons.push_back(reconstruct_class(net, c, rc));
    auto rm = reconstruction_metrics(recons, sp.train);
    rec.metrics["recon_mse_avg"] = rm.mse_avg;
    for (std::size_t c = 0; c < rm.mse_per_class.size(); ++c)
      rec.metrics["recon_mse_c" + std::to_string(c)] = rm.mse_per_class[c];
    if (rm.ssim_avg) rec.metrics["recon_ssim_avg"] = *rm.ssim_avg;
  } else {
    throw std::invalid_argument("unknown attack: " + name);
  }
}

void run_attacks(const ExperimentConfig& cfg, const Splits& sp, std::uint64_t seed,
                 const Network& net, SeedRecord& rec) {
  for (const auto& [name, params] : cfg.attacks) {
    try {
      run_attack(cfg, sp, seed, net, name, params, rec);
    } catch (const std::exception& e) {
      rec.errors[name] = e.what();
    }
  }
}

std::vector<SeedRecord> run_one_seed(const ExperimentConfig& cfg,
                                     const LabeledDataset& base, std::uint64_t seed) {
  std::vector<SeedRecord> out;
  SeedRecord std_rec;
  std_rec.seed = seed;
  std_rec.model = "std";
  try {
    SplitSpec spec = cfg.split_spec;
    spec.seed = seed;
    Splits sp = split(base, spec);

    Rng init = Rng(seed).substream("model.init");
    Network tmpl = make_mlp(base.dim(), cfg.hidden,
                            static_cast<std::size_t>(base.class_count), init);
    TrainConfig tc = cfg.train_cfg;
    tc.seed = seed;
    Network m_std = train(tmpl, sp.train, tc).net;

    base_metrics(std_rec, m_std, sp);
    run_attacks(cfg, sp, seed, m_std, std_rec);

    if (cfg.defense) {
      SeedRecord def_rec;
      def_rec.seed = seed;
      def_rec.model = "def";
      try {
        DefenseOutcome d = apply_defense(cfg, sp, seed, tmpl, tc, m_std);
        for (auto& [k, v] : d.extras) def_rec.metrics[k] = v;
        if (d.trigger_set) {
          def_rec.metrics["wm_trigger_accuracy"] = accuracy(d.net, *d.trigger_set);
          std_rec.metrics["wm_trigger_accuracy"] = accuracy(m_std, *d.trigger_set);
        }
        base_metrics(def_rec, d.net, sp);
        run_attacks(cfg, sp, seed, d.net, def_rec);
      } catch (const std::exception& e) {
        def_rec.errors[cfg.defense->first] = e.what();
      }
      out.push_back(std_rec);
      out.push_back(std::move(def_rec));
      return out;
    }
  } catch (const std::exception& e) {
    std_rec.errors["seed"] = e.what();
  }
  out.push_back(std_rec);
  return out;
}

std::string now_iso8601() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

AggregateEntry aggregate_values(const std::vector<double>& values) {
  AggregateEntry e;
  e.n = values.size();
  if (e.n == 0) return e;
  e.mean = mean_of(values);
  e.stderr_ = stderr_of(values);
  return e;
}

std::string config_digest(const nlohmann::json& raw) {
  const std::string s = raw.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

InteractionReport run_experiment(const ExperimentConfig& cfg, std::size_t jobs) {
  InteractionReport report;
  report.config_digest = config_digest(cfg.raw);
  report.created = now_iso8601();

  const LabeledDataset base = build_dataset(cfg);

  const std::size_t n = cfg.seeds.size();
  std::vector<std::vector<SeedRecord>> results(n);
  const std::size_t workers = std::min(std::max<std::size_t>(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      results[i] = run_one_seed(cfg, base, cfg.seeds[i]);
  } else {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        results[i] = run_one_seed(cfg, base, cfg.seeds[i]);
      }
    };
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  for (auto& r : results)
    for (auto& rec : r) report.per_seed.push_back(std::move(rec));

  std::map<std::string, std::vector<double>> columns;
  for (const auto& rec : report.per_seed)
    for (const auto& [name, v] : rec.metrics)
      if (v) columns[rec.model + "." + name].push_back(*v);
  for (const auto& [key, values] : columns)
    report.aggregate[key] = aggregate_values(values);
  return report;
}

nlohmann::json report_to_json(const InteractionReport& r, bool include_created) {
  nlohmann::json j;
  j["config_digest"] = r.config_digest;
  if (include_created) j["created"] = r.created;
  j["per_seed"] = nlohmann::json::array();
  for (const auto& rec : r.per_seed) {
    nlohmann::json e;
    e["seed"] = rec.seed;
    e["model"] = rec.model;
    e["metrics"] = nlohmann::json::object();
    for (const auto& [k, v] : rec.metrics)
      e["metrics"][k] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    e["errors"] = nlohmann::json::object();
    for (const auto& [k, v] : rec.errors) e["errors"][k] = v;
    j["per_seed"].push_back(std::move(e));
  }
  j["aggregate"] = nlohmann::json::object();
  for (const auto& [k, a] : r.aggregate)
    j["aggregate"][k] = {{"mean", a.mean}, {"stderr", a.stderr_}, {"n", a.n}};
  return j;
}

InteractionReport report_from_json(const nlohmann::json& j) {
  InteractionReport r;
  r.config_digest = j.value("config_digest", std::string());
  r.created = j.value("created", std::string());
  for (const auto& e : j.value("per_seed", nlohmann::json::array())) {
    SeedRecord rec;
    rec.seed = e.value("seed", std::uint64_t{0});
    rec.model = e.value("model", std::string());
    if (e.contains("metrics"))
      for (const auto& [k, v] : e["metrics"].items())
        rec.metrics[k] = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    if (e.contains("errors"))
      for (const auto& [k, v] : e["errors"].items()) rec.errors[k] = v.get<std::string>();
    r.per_seed.push_back(std::move(rec));
  }
  if (j.contains("aggregate"))
    for (const auto& [k, v] : j["aggregate"].items())
      r.aggregate[k] = {v.value("mean", 0.0), v.value("stderr", 0.0),
                        v.value("n", std::size_t{0})};
  return r;
}

std::string canonical_report_json(const InteractionReport& r) {
  return report_to_json(r, /*include_created=*/false).dump(2) + "\n";
}

void write_text_atomic(const std::string& path, const std::string& body) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for write: " + tmp.string());
    out << body;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

void write_report_json(const InteractionReport& r, const std::string& path) {
  write_text_atomic(path, report_to_json(r, /*include_created=*/true).dump(2) + "\n");
}

std::string report_csv(const InteractionReport& r) {
  std::ostringstream out;
  out << "seed,model,metric,value\n";
  for (const auto& rec : r.per_seed)
    for (const auto& [k, v] : rec.metrics) {
      out << rec.seed << ',' << rec.model << ',' << k << ',';
      if (v) out << nlohmann::json(*v).dump();
      out << '\n';
    }
  return out.str();
}

}  // namespace interbench
