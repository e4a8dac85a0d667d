#include "interbench/security.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "interbench/stats.hpp"

namespace interbench {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_unit_range(const LabeledDataset& ds, const char* op) {
  for (double v : ds.X.data)
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw std::invalid_argument(std::string(op) + ": dataset not normalized to [0,1]");
}

Tensor pgd_perturb(const Network& net, const Tensor& X0, std::span<const int> y,
                   const PgdConfig& cfg, Rng& rng) {
  if (cfg.epsilon < 0.0) throw std::invalid_argument("pgd: epsilon must be >= 0");
  const double eps = cfg.epsilon;
  const double alpha = cfg.step_or_default();
  if (cfg.steps >= 2 && cfg.step > eps)
    throw std::invalid_argument("pgd: step must be <= epsilon for multi-step runs");
  Tensor x = X0;
  if (cfg.random_start) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      x.data[i] += rng.uniform(-eps, eps);
      x.data[i] = std::clamp(x.data[i], std::max(0.0, X0.data[i] - eps),
                             std::min(1.0, X0.data[i] + eps));
    }
  }
  if (eps == 0.0) return X0;  // empty ball
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    Gradients g = loss_and_grads(net, x, y);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = x.data[i] + alpha * sign(g.input.data[i]);
      v = std::clamp(v, X0.data[i] - eps, X0.data[i] + eps);
      x.data[i] = std::clamp(v, 0.0, 1.0);
    }
  }
  return x;
}

}  // namespace

LabeledDataset pgd_attack(const Network& net, const LabeledDataset& ds,
                          const PgdConfig& cfg) {
  require_unit_range(ds, "pgd_attack");
  if (static_cast<double>(cfg.steps) * cfg.step_or_default() < cfg.epsilon)
    std::cerr << "pgd_attack: warning: steps*step < epsilon, ball not reachable\n";
  Rng rng = Rng(cfg.seed).substream("pgd");
  LabeledDataset out = ds;
  out.X = pgd_perturb(net, ds.X, ds.y, cfg, rng);
  return out;
}

double robust_accuracy(const Network& net, const LabeledDataset& ds,
                       const PgdConfig& cfg) {
  return accuracy(net, pgd_attack(net, ds, cfg));
}

TrainResult adversarial_training(const Network& net, const LabeledDataset& ds,
                                 const TrainConfig& train_cfg,
                                 const PgdConfig& pgd_cfg) {
  require_unit_range(ds, "adversarial_training");
  auto rng = std::make_shared<Rng>(Rng(train_cfg.seed).substream("pgd"));
  BatchHook hook = [pgd_cfg, rng](const Network& current, const Tensor& bx,
                                  std::span<const int> by) {
    return pgd_perturb(current, bx, by, pgd_cfg, *rng);
  };
  return train(net, ds, train_cfg, hook);
}

TriggerSpec corner_patch_trigger(const LabeledDataset& ds, std::size_t patch,
                                 double value, int target_class) {
  if (!ds.grid) throw std::invalid_argument("corner_patch_trigger: no grid metadata");
  auto [h, w] = *ds.grid;
  TriggerSpec trig;
  for (std::size_t r = 0; r < std::min(patch, h); ++r)
    for (std::size_t c = 0; c < std::min(patch, w); ++c) {
      trig.indices.push_back((h - 1 - r) * w + (w - 1 - c));  // bottom-right corner
      trig.values.push_back(value);
    }
  trig.target_class = target_class;
  return trig;
}

namespace {

void validate_trigger(const TriggerSpec& trig, std::size_t d, int class_count) {
  if (trig.indices.size() != trig.values.size())
    throw std::invalid_argument("badnets: indices/values length mismatch");
  std::vector<std::size_t> sorted = trig.indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("badnets: duplicate trigger indices");
  for (std::size_t i : trig.indices)
    if (i >= d) throw std::invalid_argument("badnets: trigger index out of range");
  if (trig.target_class < 0 || trig.target_class >= class_count)
    throw std::invalid_argument("badnets: target class out of range");
  if (trig.poison_rate <= 0.0 || trig.poison_rate > 1.0)
    throw std::invalid_argument("badnets: poison_rate must be in (0,1]");
}

void write_trigger(double* row, const TriggerSpec& trig) {
  for (std::size_t k = 0; k < trig.indices.size(); ++k)
    row[trig.indices[k]] = trig.values[k];
}

}  // namespace

PoisonResult badnets_poison(const LabeledDataset& train, const LabeledDataset& test,
                            const TriggerSpec& trig, std::uint64_t seed) {
  validate_trigger(trig, train.dim(), train.class_count);
  PoisonResult res;
  res.poisoned_train = train;
  const std::size_t n = train.size();
  const auto count = static_cast<std::size_t>(
      std::ceil(trig.poison_rate * static_cast<double>(n)));
  Rng rng = Rng(seed).substream("badnets");
  auto perm = rng.permutation(n);
  res.poisoned_rows.assign(perm.begin(), perm.begin() + count);
  for (std::size_t i : res.poisoned_rows) {
    write_trigger(res.poisoned_train.X.row(i), trig);
    res.poisoned_train.y[i] = trig.target_class;
  }
  // Attack-success-rate convention: rows already in the target class are
  // excluded, otherwise a clean model scores ~P(y == target) for free.
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < test.size(); ++i)
    if (test.y[i] != trig.target_class) keep.push_back(i);
  if (keep.empty())
    throw std::invalid_argument("badnets: every test row is already the target class");
  res.triggered_eval = test.subset(keep);
  for (std::size_t i = 0; i < res.triggered_eval.size(); ++i) {
    write_trigger(res.triggered_eval.X.row(i), trig);
    res.triggered_eval.y[i] = trig.target_class;
  }
  return res;
}

std::vector<double> knn_shapley(const LabeledDataset& train,
                                const LabeledDataset& valid, std::size_t K) {
  if (K < 1) throw std::invalid_argument("knn_shapley: K must be >= 1");
  if (train.size() == 0 || valid.size() == 0)
    throw std::invalid_argument("knn_shapley: empty input");
  const std::size_t n = train.size(), d = train.dim();
  std::vector<double> values(n, 0.0);
  std::vector<std::pair<double, std::size_t>> order(n);
  std::vector<double> s(n);
  for (std::size_t v = 0; v < valid.size(); ++v) {
    const double* xv = valid.X.row(v);
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = train.X.row(i);
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = xi[j] - xv[j];
        dist += diff * diff;
      }
      order[i] = {dist, i};
    }
    std::sort(order.begin(), order.end());  // ascending distance, ties by index
    const int yv = valid.y[v];
    auto match = [&](std::size_t pos) {
      return train.y[order[pos].second] == yv ? 1.0 : 0.0;
    };
    // Base case: for n >= K this is the usual match/n; when K exceeds n the
    // utility is additive over members and the farthest point is worth
    // match/K like everyone else.
    s[n - 1] = match(n - 1) / static_cast<double>(std::max(n, K));
    for (std::size_t pos = n - 1; pos-- > 0;) {
      const double i1 = static_cast<double>(pos + 1);  // 1-based rank
      s[pos] = s[pos + 1] + (match(pos) - match(pos + 1)) / static_cast<double>(K) *
                                std::min(static_cast<double>(K), i1) / i1;
    }
    for (std::size_t pos = 0; pos < n; ++pos) values[order[pos].second] += s[pos];
  }
  for (double& v : values) v /= static_cast<double>(valid.size());
  return values;
}

OutlierRemovalResult outlier_removal(const LabeledDataset& train_set,
                                     const LabeledDataset& valid, std::size_t K,
                                     double fraction, const TrainConfig& train_cfg,
                                     const Network& net_template,
                                     bool remove_highest) {
  if (fraction < 0.0 || fraction >= 1.0)
    throw std::invalid_argument("outlier_removal: fraction must be in [0,1)");
  OutlierRemovalResult res;
  const std::size_t n = train_set.size();
  const auto count =
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  if (count == 0) {
    res.reduced_train = train_set;
  } else {
    auto values = knn_shapley(train_set, valid, K);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return remove_highest ? values[a] > values[b] : values[a] < values[b];
    });
    res.removed.assign(idx.begin(), idx.begin() + count);
    std::vector<bool> drop(n, false);
    for (std::size_t i : res.removed) drop[i] = true;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i)
      if (!drop[i]) keep.push_back(i);
    res.reduced_train = train_set.subset(keep);
  }
  TrainConfig cfg = train_cfg;
  cfg.batch_size = std::min(cfg.batch_size, res.reduced_train.size());
  res.model = train(net_template, res.reduced_train, cfg).net;
  return res;
}

Network extract_model(const Network& target, const Network& surrogate_template,
                      const LabeledDataset& adversary_data,
                      const TrainConfig& train_cfg) {
  Tensor targets = forward(target, adversary_data.X);
  return train_regression(surrogate_template, adversary_data.X, targets, train_cfg).net;
}

ExtractionMetrics extraction_metrics(const Network& target, const Network& surrogate,
                                     const LabeledDataset& test) {
  if (test.size() == 0) throw std::invalid_argument("extraction_metrics: empty test set");
  auto pt = predict(target, test.X);
  auto ps = predict(surrogate, test.X);
  ExtractionMetrics m;
  std::size_t agree = 0, agree_correct = 0, surrogate_correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (ps[i] == test.y[i]) ++surrogate_correct;
    if (pt[i] == ps[i]) {
      ++agree;
      if (pt[i] == test.y[i]) ++agree_correct;
    }
  }
  const auto n = static_cast<double>(test.size());
  m.acc_te = static_cast<double>(surrogate_correct) / n;
  m.fid = static_cast<double>(agree) / n;
  if (agree > 0)
    m.fid_corr = static_cast<double>(agree_correct) / static_cast<double>(agree);
  return m;
}

namespace {

double boundary_distance(const Network& suspect, const double* x0, std::size_t d,
                         int true_label, const ProbeConfig& cfg) {
  Tensor x({1, d});
  std::copy(x0, x0 + d, x.row(0));
  const int y0 = predict(suspect, x)[0];
  // Signed fingerprint: the walk length is negated when the suspect already
  // disagrees with the record's label, so memorized (correctly fit) records
  // score strictly higher than records the suspect gets wrong.
  const double orient = y0 == true_label ? 1.0 : -1.0;
  std::vector<int> label{y0};
  for (std::size_t t = 0; t < cfg.max_steps; ++t) {
    Gradients g = loss_and_grads(suspect, x, label);
    for (std::size_t j = 0; j < d; ++j) x.data[j] += cfg.step * sign(g.input.data[j]);
    if (predict(suspect, x)[0] != y0) {
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = x.data[j] - x0[j];
        dist += diff * diff;
      }
      return orient * std::sqrt(dist);
    }
  }
  return orient * static_cast<double>(cfg.max_steps) * cfg.step;  // capped
}

}  // namespace

OwnershipVerdict dataset_inference(const LabeledDataset& victim_train,
                                   const LabeledDataset& public_data,
                                   const Network& suspect, const ProbeConfig& cfg) {
  if (victim_train.size() == 0 || public_data.size() == 0)
    throw std::invalid_argument("dataset_inference: empty sample set");
  const std::size_t d = victim_train.dim();
  std::vector<double> fp_train, fp_public;
  for (std::size_t i = 0; i < victim_train.size(); ++i)
    fp_train.push_back(
        boundary_distance(suspect, victim_train.X.row(i), d, victim_train.y[i], cfg));
  for (std::size_t i = 0; i < public_data.size(); ++i)
    fp_public.push_back(
        boundary_distance(suspect, public_data.X.row(i), d, public_data.y[i], cfg));
  WelchResult w = welch_t_test(fp_train, fp_public);
  OwnershipVerdict v;
  v.statistic = w.t;
  v.p_value = w.p_one_sided;
  v.threshold = cfg.alpha_sig;
  v.stolen = w.p_one_sided.has_value() && *w.p_one_sided < cfg.alpha_sig &&
             mean_of(fp_train) > mean_of(fp_public);
  return v;
}

WatermarkResult embed_watermark(const LabeledDataset& train, const WatermarkConfig& cfg) {
  if (cfg.count < 1) throw std::invalid_argument("embed_watermark: count must be >= 1");
  Rng rng = Rng(cfg.seed).substream("watermark");
  const std::size_t d = train.dim();
  WatermarkResult res;
  res.trigger_set.X = Tensor({cfg.count, d});
  res.trigger_set.y.resize(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    for (std::size_t j = 0; j < d; ++j) res.trigger_set.X.at(i, j) = rng.uniform();
    res.trigger_set.y[i] = static_cast<int>(rng.index(static_cast<std::size_t>(train.class_count)));
  }
  res.trigger_set.class_count = train.class_count;
  res.trigger_set.normalized = train.normalized;
  res.trigger_set.name = "watermark_triggers";

  res.augmented = train;
  const std::size_t n = train.size();
  res.augmented.X = Tensor({n + cfg.count, d});
  std::copy(train.X.data.begin(), train.X.data.end(), res.augmented.X.data.begin());
  std::copy(res.trigger_set.X.data.begin(), res.trigger_set.X.data.end(),
            res.augmented.X.data.begin() + static_cast<std::ptrdiff_t>(n * d));
  res.augmented.y.insert(res.augmented.y.end(), res.trigger_set.y.begin(),
                         res.trigger_set.y.end());
  if (res.augmented.z) {
    // triggers carry no sensitive attribute; pad with group 0
    res.augmented.z->insert(res.augmented.z->end(), cfg.count, 0);
  }
  return res;
}

OwnershipVerdict verify_watermark(const Network& suspect,
                                  const LabeledDataset& trigger_set,
                                  double threshold) {
  if (trigger_set.size() == 0)
    throw std::invalid_argument("verify_watermark: empty trigger set");
  const double chance = 1.0 / static_cast<double>(trigger_set.class_count);
  if (threshold <= chance || threshold > 1.0)
    throw std::invalid_argument("verify_watermark: threshold must be in (1/c, 1]");
  OwnershipVerdict v;
  v.statistic = accuracy(suspect, trigger_set);
  v.threshold = threshold;
  v.stolen = v.statistic >= threshold;
  return v;
}

PopulationMetrics ownership_population_metrics(
    const std::vector<OwnershipVerdict>& derived,
    const std::vector<OwnershipVerdict>& independent) {
  if (derived.empty() || independent.empty())
    throw std::invalid_argument("ownership_population_metrics: empty population");
  std::size_t fn = 0, fp = 0;
  for (const auto& v : derived)
    if (!v.stolen) ++fn;
  for (const auto& v : independent)
    if (v.stolen) ++fp;
  PopulationMetrics m;
  m.fnr = static_cast<double>(fn) / static_cast<double>(derived.size());
  m.fpr = static_cast<double>(fp) / static_cast<double>(independent.size());
  const std::size_t correct = (derived.size() - fn) + (independent.size() - fp);
  m.accuracy = static_cast<double>(correct) /
               static_cast<double>(derived.size() + independent.size());
  return m;
}

}  // namespace interbench
