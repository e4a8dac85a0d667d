#include "interbench/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "interbench/stats.hpp"

namespace interbench {

double logit_scale(double p) {
  const double e_min = 1e-12;
  p = std::clamp(p, e_min, 1.0 - e_min);
  return std::log(p / (1.0 - p));
}

namespace {

struct GaussianFit {
  double mu = 0.0;
  double sigma = 0.0;
};

GaussianFit fit_gaussian(std::span<const double> v, double variance_floor) {
  GaussianFit f;
  f.mu = mean_of(v);
  f.sigma = std::sqrt(std::max(sample_variance(v), variance_floor));
  return f;
}

// phi(softmax(f(x))_y) for each listed row of `pool`.
std::vector<double> confidence_logits(const Network& net, const LabeledDataset& pool,
                                      const std::vector<std::size_t>& ids) {
  Tensor X({ids.size(), pool.dim()});
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::copy(pool.X.row(ids[i]), pool.X.row(ids[i]) + pool.dim(), X.row(i));
  Tensor probs = softmax(forward(net, X));
  std::vector<double> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    out[i] = logit_scale(probs.at(i, static_cast<std::size_t>(pool.y[ids[i]])));
  return out;
}

}  // namespace

std::vector<MembershipScore> lira_scores(const Network& target,
                                         const LabeledDataset& pool,
                                         const std::vector<std::size_t>& challenge_ids,
                                         const std::vector<bool>& truth_member,
                                         const ShadowConfig& shadows, LiraMode mode) {
  if (shadows.count < 2) throw std::invalid_argument("lira: need at least 2 shadows");
  if (challenge_ids.size() != truth_member.size())
    throw std::invalid_argument("lira: challenge/truth length mismatch");
  for (std::size_t id : challenge_ids)
    if (id >= pool.size()) throw std::invalid_argument("lira: challenge id out of range");

  const std::size_t n = pool.size();
  const std::size_t min_side = mode == LiraMode::Online ? 2 : 0;
  Rng base = Rng(shadows.seed).substream("lira");

  // Membership masks; resampled until each challenge has enough in/out shadows.
  std::vector<std::vector<bool>> masks;
  Rng mask_rng = base.substream("masks");
  for (int attempt = 0;; ++attempt) {
    if (attempt >= 200)
      throw std::runtime_error("lira: could not satisfy shadow coverage; too few shadows");
    masks.assign(shadows.count, std::vector<bool>(n, false));
    for (auto& m : masks)
      for (std::size_t i = 0; i < n; ++i) m[i] = mask_rng.bernoulli(shadows.subset_fraction);
    bool ok = true;
    for (std::size_t id : challenge_ids) {
      std::size_t in = 0;
      for (const auto& m : masks) in += m[id] ? 1 : 0;
      const std::size_t out = shadows.count - in;
      if (in < min_side || out < 2) {
        ok = false;
        break;
      }
    }
    if (ok) break;
  }

  // Train shadows and collect per-challenge confidence logits.
  std::vector<std::vector<double>> in_vals(challenge_ids.size());
  std::vector<std::vector<double>> out_vals(challenge_ids.size());
  for (std::size_t s = 0; s < shadows.count; ++s) {
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < n; ++i)
      if (masks[s][i]) subset.push_back(i);
    if (subset.empty()) continue;
    Rng init_rng = base.substream("init").substream(s);
    Network shadow = make_mlp(pool.dim(), shadows.hidden, static_cast<std::size_t>(pool.class_count), init_rng);
    TrainConfig cfg = shadows.train_cfg;
    cfg.seed = base.substream("train").substream(s).seed();
    shadow = train(shadow, pool.subset(subset), cfg).net;
    auto phis = confidence_logits(shadow, pool, challenge_ids);
    for (std::size_t c = 0; c < challenge_ids.size(); ++c) {
      if (masks[s][challenge_ids[c]])
        in_vals[c].push_back(phis[c]);
      else
        out_vals[c].push_back(phis[c]);
    }
  }

  auto target_phis = confidence_logits(target, pool, challenge_ids);
  std::vector<MembershipScore> scores(challenge_ids.size());
  for (std::size_t c = 0; c < challenge_ids.size(); ++c) {
    GaussianFit out_fit = fit_gaussian(out_vals[c], shadows.variance_floor);
    double score;
    if (mode == LiraMode::Online) {
      GaussianFit in_fit = fit_gaussian(in_vals[c], shadows.variance_floor);
      score = normal_logpdf(target_phis[c], in_fit.mu, in_fit.sigma) -
              normal_logpdf(target_phis[c], out_fit.mu, out_fit.sigma);
    } else {
      score = (target_phis[c] - out_fit.mu) / out_fit.sigma;
    }
    scores[c] = {challenge_ids[c], score, truth_member[c]};
  }
  return scores;
}

RocMetrics roc_metrics(const std::vector<MembershipScore>& scores, double fpr_target) {
  std::vector<double> in_s, out_s;
  for (const auto& s : scores)
    (s.truth_member ? in_s : out_s).push_back(s.score);
  if (in_s.empty() || out_s.empty())
    throw std::invalid_argument("roc_metrics: both classes must be present");

  RocMetrics m;
  m.fpr_target = fpr_target;
  double pairs = 0.0;
  for (double a : in_s)
    for (double b : out_s) pairs += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  m.auc = pairs / (static_cast<double>(in_s.size()) * static_cast<double>(out_s.size()));

  // Operating points: predict member iff score >= tau.
  std::vector<double> taus;
  for (const auto& s : scores) taus.push_back(s.score);
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  taus.push_back(std::numeric_limits<double>::infinity());
  double best_bal = 0.0, best_tpr = 0.0;
  for (double tau : taus) {
    std::size_t tp = 0, fp = 0;
    for (double a : in_s) tp += a >= tau ? 1 : 0;
    for (double b : out_s) fp += b >= tau ? 1 : 0;
    const double tpr = static_cast<double>(tp) / static_cast<double>(in_s.size());
    const double fpr = static_cast<double>(fp) / static_cast<double>(out_s.size());
    best_bal = std::max(best_bal, 0.5 * (tpr + 1.0 - fpr));
    if (fpr <= fpr_target) best_tpr = std::max(best_tpr, tpr);
  }
  m.balanced_accuracy = best_bal;
  m.tpr_at_fpr = best_tpr;
  return m;
}

DpsgdResult dpsgd_train(const Network& net, const LabeledDataset& data,
                        const TrainConfig& train_cfg, const DpConfig& dp) {
  if (dp.clip_norm <= 0.0) throw std::invalid_argument("dpsgd: clip norm must be > 0");
  if (dp.noise_multiplier < 0.0)
    throw std::invalid_argument("dpsgd: noise multiplier must be >= 0");
  if (dp.lot_size == 0 || dp.lot_size > data.size())
    throw std::invalid_argument("dpsgd: lot size must be in [1, n]");
  if (dp.delta <= 0.0 || dp.delta >= 1.0)
    throw std::invalid_argument("dpsgd: delta must be in (0,1)");

  DpsgdResult res{net, {}, 0, 0.0};
  Rng shuffle_rng = Rng(train_cfg.seed).substream("train.shuffle");
  Rng noise_rng = Rng(train_cfg.seed).substream("dpsgd.noise");
  Optimizer opt(res.net, train_cfg);
  const std::size_t n = data.size();
  const double noise_std = dp.noise_multiplier * dp.clip_norm;
  for (std::size_t epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    auto perm = shuffle_rng.permutation(n);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += dp.lot_size) {
      const std::size_t end = std::min(start + dp.lot_size, n);
      const std::size_t lot = end - start;
      Tensor bx({lot, data.dim()});
      std::vector<int> by(lot);
      for (std::size_t i = 0; i < lot; ++i) {
        const std::size_t src = perm[start + i];
        std::copy(data.X.row(src), data.X.row(src) + data.dim(), bx.row(i));
        by[i] = data.y[src];
      }
      auto per_sample = per_sample_grads(res.net, bx, by);
      auto acc = zero_grads(res.net);
      for (auto& sample : per_sample) {
        double norm_sq = 0.0;
        for (const auto& lg : sample) {
          for (double v : lg.weight.data) norm_sq += v * v;
          for (double v : lg.bias.data) norm_sq += v * v;
        }
        const double norm = std::sqrt(norm_sq);
        const double scale = norm > dp.clip_norm ? dp.clip_norm / norm : 1.0;
        for (std::size_t k = 0; k < acc.size(); ++k) {
          for (std::size_t i = 0; i < acc[k].weight.size(); ++i)
            acc[k].weight.data[i] += scale * sample[k].weight.data[i];
          for (std::size_t i = 0; i < acc[k].bias.size(); ++i)
            acc[k].bias.data[i] += scale * sample[k].bias.data[i];
        }
      }
      const double inv_lot = 1.0 / static_cast<double>(lot);
      for (auto& lg : acc) {
        for (double& v : lg.weight.data)
          v = (v + (noise_std > 0.0 ? noise_rng.normal() * noise_std : 0.0)) * inv_lot;
        for (double& v : lg.bias.data)
          v = (v + (noise_std > 0.0 ? noise_rng.normal() * noise_std : 0.0)) * inv_lot;
      }
      opt.step(res.net, acc);
      ++res.steps;
      Gradients g = loss_and_grads(res.net, bx, by);
      loss_sum += g.loss * static_cast<double>(lot);
    }
    res.history.push_back(
        {loss_sum / static_cast<double>(n), accuracy(res.net, data)});
  }
  res.epsilon = rdp_epsilon(dp, res.steps);
  return res;
}

double rdp_epsilon(const DpConfig& dp, std::size_t steps) {
  if (dp.delta <= 0.0 || dp.delta >= 1.0)
    throw std::invalid_argument("rdp_epsilon: delta must be in (0,1)");
  if (dp.noise_multiplier == 0.0) return std::numeric_limits<double>::infinity();
  const double sigma2 = dp.noise_multiplier * dp.noise_multiplier;
  const double log_inv_delta = std::log(1.0 / dp.delta);
  double best = std::numeric_limits<double>::infinity();
  for (int alpha = 2; alpha <= 64; ++alpha) {
    const double a = static_cast<double>(alpha);
    best = std::min(best, static_cast<double>(steps) * a / (2.0 * sigma2) +
                              log_inv_delta / (a - 1.0));
  }
  return best;
}

AttributeAttackResult attribute_inference_attack(const Network& target,
                                                 const LabeledDataset& adversary_data,
                                                 const LabeledDataset& eval_data,
                                                 const AttributeAttackConfig& cfg) {
  if (!adversary_data.z || !eval_data.z)
    throw std::invalid_argument("attribute_inference: sensitive attribute missing");
  const int g = adversary_data.group_count;
  {
    bool multi = false;
    int first = (*eval_data.z)[0];
    for (int v : *eval_data.z)
      if (v != first) multi = true;
    if (!multi) throw std::invalid_argument("attribute_inference: single-group eval set");
  }

  auto make_features = [&](const LabeledDataset& ds) {
    Tensor probs = softmax(forward(target, ds.X));
    if (!cfg.append_label_onehot) return probs;
    const std::size_t c = probs.cols();
    Tensor feat({probs.rows(), 2 * c});
    for (std::size_t i = 0; i < probs.rows(); ++i) {
      std::copy(probs.row(i), probs.row(i) + c, feat.row(i));
      feat.at(i, c + static_cast<std::size_t>(ds.y[i])) = 1.0;
    }
    return feat;
  };

  LabeledDataset attack_train;
  attack_train.X = make_features(adversary_data);
  attack_train.y = *adversary_data.z;
  attack_train.class_count = g;
  Rng rng = Rng(cfg.seed).substream("attr.init");
  Network attack_net = make_mlp(attack_train.X.cols(), cfg.hidden,
                                static_cast<std::size_t>(g), rng);
  TrainConfig tc = cfg.train_cfg;
  tc.seed = Rng(cfg.seed).substream("attr.train").seed();
  attack_net = train(attack_net, attack_train, tc).net;

  Tensor eval_feat = make_features(eval_data);
  Tensor eval_probs = softmax(forward(attack_net, eval_feat));
  auto preds = predict(attack_net, eval_feat);

  // balanced accuracy: mean of per-group recalls
  std::vector<std::size_t> hit(static_cast<std::size_t>(g), 0), tot(static_cast<std::size_t>(g), 0);
  for (std::size_t i = 0; i < eval_data.size(); ++i) {
    const auto zi = static_cast<std::size_t>((*eval_data.z)[i]);
    ++tot[zi];
    if (preds[i] == (*eval_data.z)[i]) ++hit[zi];
  }
  AttributeAttackResult res;
  double bal = 0.0;
  int present = 0;
  for (int k = 0; k < g; ++k) {
    if (tot[static_cast<std::size_t>(k)] == 0) continue;
    bal += static_cast<double>(hit[static_cast<std::size_t>(k)]) /
           static_cast<double>(tot[static_cast<std::size_t>(k)]);
    ++present;
  }
  res.balanced_accuracy = bal / static_cast<double>(present);

  if (g == 2) {
    std::vector<MembershipScore> sc(eval_data.size());
    for (std::size_t i = 0; i < eval_data.size(); ++i)
      sc[i] = {i, eval_probs.at(i, 1), (*eval_data.z)[i] == 1};
    res.auc = roc_metrics(sc).auc;
  } else {
    res.auc = 0.5;  // AUC only defined for binary z
  }
  return res;
}

double distribution_inference_attack(const DistributionAttackConfig& cfg,
                                     const WorldModelFactory& factory,
                                     const std::vector<std::pair<Network, int>>& victims,
                                     const Tensor& probe_set) {
  if (cfg.ratio_world0 == cfg.ratio_world1)
    throw std::invalid_argument("distribution_inference: world ratios must differ");
  if (cfg.shadows_per_world < 2)
    throw std::invalid_argument("distribution_inference: need >= 2 shadows per world");
  if (victims.empty())
    throw std::invalid_argument("distribution_inference: no victim models");

  Rng base = Rng(cfg.seed).substream("distinf");
  auto features = [&](const Network& model) {
    Tensor probs = softmax(forward(model, probe_set));
    return probs.data;  // probe_size x c, flattened
  };

  LabeledDataset meta;
  std::vector<double> flat;
  std::vector<int> labels;
  std::size_t feat_dim = 0;
  for (int world = 0; world < 2; ++world) {
    const double ratio = world == 0 ? cfg.ratio_world0 : cfg.ratio_world1;
    for (std::size_t s = 0; s < cfg.shadows_per_world; ++s) {
      Network m = factory(ratio, base.substream("shadow").substream(
                                     static_cast<std::uint64_t>(world) * cfg.shadows_per_world + s).seed());
      auto f = features(m);
      feat_dim = f.size();
      flat.insert(flat.end(), f.begin(), f.end());
      labels.push_back(world);
    }
  }
  meta.X = Tensor({labels.size(), feat_dim}, std::move(flat));
  meta.y = std::move(labels);
  meta.class_count = 2;

  Rng init = base.substream("meta.init");
  Network meta_net = make_mlp(feat_dim, cfg.meta_hidden, 2, init);
  TrainConfig tc = cfg.meta_train_cfg;
  tc.seed = base.substream("meta.train").seed();
  meta_net = train(meta_net, meta, tc).net;

  std::size_t hits = 0;
  for (const auto& [victim, world] : victims) {
    auto f = features(victim);
    Tensor x({1, feat_dim}, std::move(f));
    if (predict(meta_net, x)[0] == world) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(victims.size());
}

Tensor reconstruct_class(const Network& target, int cls,
                         const ReconstructionConfig& cfg) {
  if (cls < 0 || static_cast<std::size_t>(cls) >= target.output_dim())
    throw std::invalid_argument("reconstruct_class: invalid class");
  const std::size_t d = target.input_dim();
  Tensor x({1, d}, 0.5);
  if (cfg.seeded_init) {
    Rng rng = Rng(cfg.seed).substream("recon.init");
    for (double& v : x.data) v = rng.uniform();
  }
  std::vector<int> label{cls};
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    Gradients g = loss_and_grads(target, x, label);
    for (std::size_t i = 0; i < d; ++i)
      x.data[i] = std::clamp(x.data[i] - cfg.rate * g.input.data[i], 0.0, 1.0);
  }
  x.shape = {d};
  return x;
}

double ssim(const Tensor& a, const Tensor& b, std::size_t h, std::size_t w,
            std::size_t window) {
  if (a.size() != h * w || b.size() != h * w)
    throw std::invalid_argument("ssim: image size mismatch");
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const std::size_t win = std::min({window, h, w});
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r0 = 0; r0 + win <= h; ++r0) {
    for (std::size_t col0 = 0; col0 + win <= w; ++col0) {
      double mx = 0, my = 0;
      const double inv = 1.0 / static_cast<double>(win * win);
      for (std::size_t r = 0; r < win; ++r)
        for (std::size_t c = 0; c < win; ++c) {
          mx += a.data[(r0 + r) * w + col0 + c];
          my += b.data[(r0 + r) * w + col0 + c];
        }
      mx *= inv;
      my *= inv;
      double vx = 0, vy = 0, cov = 0;
      for (std::size_t r = 0; r < win; ++r)
        for (std::size_t c = 0; c < win; ++c) {
          const double da = a.data[(r0 + r) * w + col0 + c] - mx;
          const double db = b.data[(r0 + r) * w + col0 + c] - my;
          vx += da * da;
          vy += db * db;
          cov += da * db;
        }
      vx *= inv;
      vy *= inv;
      cov *= inv;
      total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

ReconstructionMetrics reconstruction_metrics(const std::vector<Tensor>& reconstructions,
                                             const LabeledDataset& train_set) {
  if (train_set.size() == 0)
    throw std::invalid_argument("reconstruction_metrics: empty train set");
  const std::size_t d = train_set.dim();
  ReconstructionMetrics m;
  if (train_set.grid) {
    m.ssim_per_class = std::vector<double>();
    m.ssim_avg = 0.0;
  }
  for (std::size_t cls = 0; cls < reconstructions.size(); ++cls) {
    Tensor mean({d});
    std::size_t count = 0;
    for (std::size_t i = 0; i < train_set.size(); ++i) {
      if (train_set.y[i] != static_cast<int>(cls)) continue;
      for (std::size_t j = 0; j < d; ++j) mean.data[j] += train_set.X.at(i, j);
      ++count;
    }
    if (count == 0)
      throw std::invalid_argument("reconstruction_metrics: class absent from train set");
    for (double& v : mean.data) v /= static_cast<double>(count);
    double mse = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = reconstructions[cls].data[j] - mean.data[j];
      mse += diff * diff;
    }
    mse /= static_cast<double>(d);
    m.mse_per_class.push_back(mse);
    if (train_set.grid) {
      m.ssim_per_class->push_back(
          ssim(reconstructions[cls], mean, train_set.grid->first, train_set.grid->second));
    }
  }
  m.mse_avg = mean_of(m.mse_per_class);
  if (m.ssim_per_class) m.ssim_avg = mean_of(*m.ssim_per_class);
  return m;
}

}  // namespace interbench
