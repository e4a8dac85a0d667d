#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "interbench/security.hpp"

using namespace interbench;
using namespace testutil;

TEST_SUITE("security") {

TEST_CASE("pgd stays inside the epsilon ball and the unit box") {
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    auto ds = random_dataset(12, 6, 3, 600 + trial);
    Network net = random_net(6, {8}, 3, 700 + trial);
    PgdConfig cfg;
    cfg.epsilon = 0.02 + 0.03 * static_cast<double>(trial);
    cfg.seed = trial;
    LabeledDataset adv = pgd_attack(net, ds, cfg);
    for (std::size_t i = 0; i < ds.X.data.size(); ++i) {
      CHECK(std::abs(adv.X.data[i] - ds.X.data[i]) <= cfg.epsilon + 1e-12);
      CHECK(adv.X.data[i] >= 0.0);
      CHECK(adv.X.data[i] <= 1.0);
    }
    CHECK(adv.y == ds.y);
  }
}

TEST_CASE("epsilon zero reduces robust accuracy to plain accuracy exactly") {
  auto ds = random_dataset(30, 4, 2, 61);
  Network net = random_net(4, {5}, 2, 62);
  PgdConfig cfg;
  cfg.epsilon = 0.0;
  CHECK(robust_accuracy(net, ds, cfg) == accuracy(net, ds));
}

TEST_CASE("adversarial training with epsilon zero reproduces plain training") {
  SyntheticSpec spec;
  spec.n = 100;
  spec.seed = 4;
  auto ds = normalize_minmax(synth_gauss(spec));
  Network tmpl = random_net(ds.dim(), {5}, 2, 63);
  TrainConfig tc;
  tc.epochs = 3;
  tc.seed = 8;
  PgdConfig pc;
  pc.epsilon = 0.0;
  auto plain = train(tmpl, ds, tc);
  auto adv = adversarial_training(tmpl, ds, tc, pc);
  CHECK(max_param_delta(plain.net, adv.net) == 0.0);
}

TEST_CASE("corner patch trigger addresses the bottom-right block") {
  LabeledDataset ds;
  ds.X = Tensor({1, 64});
  ds.y = {0};
  ds.class_count = 2;
  ds.grid = {{8, 8}};
  TriggerSpec trig = corner_patch_trigger(ds, 3);
  CHECK(trig.indices.size() == 9);
  CHECK(std::find(trig.indices.begin(), trig.indices.end(), 63) != trig.indices.end());
  CHECK(std::find(trig.indices.begin(), trig.indices.end(), 5 * 8 + 5) !=
        trig.indices.end());
  for (double v : trig.values) CHECK(v == 1.0);
}

TEST_CASE("badnets poisons ceil(rate * n) rows and relabels them") {
  auto train_ds = random_dataset(103, 9, 3, 71);
  train_ds.grid = {{3, 3}};
  auto test_ds = random_dataset(40, 9, 3, 72);
  test_ds.grid = {{3, 3}};
  TriggerSpec trig;
  trig.indices = {0, 1};
  trig.values = {1.0, 1.0};
  trig.target_class = 2;
  trig.poison_rate = 0.1;
  PoisonResult pr = badnets_poison(train_ds, test_ds, trig, 5);
  CHECK(pr.poisoned_rows.size() == 11);  // ceil(0.1 * 103)
  for (std::size_t i : pr.poisoned_rows) {
    CHECK(pr.poisoned_train.y[i] == 2);
    CHECK(pr.poisoned_train.X.at(i, 0) == 1.0);
  }
  // eval set: every surviving row triggered, relabeled, true target rows gone
  std::size_t expected = 0;
  for (int y : test_ds.y)
    if (y != 2) ++expected;
  CHECK(pr.triggered_eval.size() == expected);
  for (std::size_t i = 0; i < pr.triggered_eval.size(); ++i) {
    CHECK(pr.triggered_eval.y[i] == 2);
    CHECK(pr.triggered_eval.X.at(i, 0) == 1.0);
  }
}

TEST_CASE("knn shapley matches the exhaustive-coalition oracle") {
  for (std::uint64_t trial = 0; trial < 6; ++trial) {
    const std::size_t n = 4 + trial % 3;  // 4..6
    auto tr = random_dataset(n, 2, 2, 800 + trial);
    auto va = random_dataset(3, 2, 2, 900 + trial);
    for (std::size_t K = 1; K <= 3; ++K) {
      auto fast = knn_shapley(tr, va, K);
      auto slow = brute_force_knn_shapley(tr, va, K);
      REQUIRE(fast.size() == n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(fast[i] - slow[i]) < 1e-9);
    }
  }
}

TEST_CASE("shapley efficiency: values sum to the grand-coalition utility") {
  auto tr = random_dataset(7, 3, 2, 81);
  auto va = random_dataset(4, 3, 2, 82);
  const std::size_t K = 2;
  auto vals = knn_shapley(tr, va, K);
  auto slow = brute_force_knn_shapley(tr, va, K);
  double sum_fast = 0.0, sum_slow = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    sum_fast += vals[i];
    sum_slow += slow[i];
  }
  CHECK(sum_fast == doctest::Approx(sum_slow).epsilon(1e-9));
}

TEST_CASE("outlier removal drops ceil(fraction * n) rows and retrains") {
  SyntheticSpec spec;
  spec.n = 80;
  spec.seed = 3;
  auto ds = normalize_minmax(synth_gauss(spec));
  SplitSpec sp;
  sp.seed = 1;
  Splits parts = split(ds, sp);
  Network tmpl = random_net(ds.dim(), {4}, 2, 11);
  TrainConfig tc;
  tc.epochs = 2;
  auto res = outlier_removal(parts.train, parts.adversary, 3, 0.25, tc, tmpl);
  const std::size_t expect =
      static_cast<std::size_t>(std::ceil(0.25 * static_cast<double>(parts.train.size())));
  CHECK(res.removed.size() == expect);
  CHECK(res.reduced_train.size() == parts.train.size() - expect);
  CHECK(same_architecture(res.model, tmpl));
}

TEST_CASE("extraction metrics: surrogate equal to target has fidelity one") {
  auto ds = random_dataset(50, 4, 3, 91);
  Network net = random_net(4, {6}, 3, 92);
  ExtractionMetrics em = extraction_metrics(net, net, ds);
  CHECK(em.fid == 1.0);
  REQUIRE(em.fid_corr.has_value());
  CHECK(*em.fid_corr == doctest::Approx(accuracy(net, ds)));
  CHECK(em.acc_te == doctest::Approx(accuracy(net, ds)));
}

TEST_CASE("dataset inference on a constant classifier is inconclusive") {
  // Zero all parameters: every input maps to the same logits, the walk never
  // flips the prediction, and every record of the same label gets the capped
  // fingerprint -> zero variance -> no p-value -> independent.
  Network net = random_net(3, {4}, 2, 31);
  for (double* p : param_ptrs(net)) *p = 0.0;
  auto ds = random_dataset(12, 3, 2, 32);
  for (int& y : ds.y) y = 0;  // uniform labels keep the orientation constant
  ProbeConfig pc;
  pc.max_steps = 20;
  OwnershipVerdict v = dataset_inference(ds, ds, net, pc);
  CHECK_FALSE(v.p_value.has_value());
  CHECK_FALSE(v.stolen);
}

TEST_CASE("dataset inference fingerprints are negated on misclassified records") {
  // With public == train the fingerprint vectors are identical, so the t
  // statistic is exactly zero and the verdict is independent.
  SyntheticSpec spec;
  spec.n = 80;
  spec.seed = 33;
  auto ds = normalize_minmax(synth_gauss(spec));
  Network net = random_net(ds.dim(), {6}, 2, 34);
  ProbeConfig pc;
  pc.max_steps = 50;
  OwnershipVerdict v = dataset_inference(ds, ds, net, pc);
  CHECK(v.statistic == doctest::Approx(0.0));
  CHECK_FALSE(v.stolen);
}

TEST_CASE("watermark embedding appends the trigger set") {
  SyntheticSpec spec;
  spec.n = 60;
  spec.seed = 6;
  auto ds = normalize_minmax(synth_gauss(spec));
  WatermarkConfig wc;
  wc.count = 10;
  wc.seed = 2;
  WatermarkResult wm = embed_watermark(ds, wc);
  CHECK(wm.trigger_set.size() == 10);
  CHECK(wm.augmented.size() == 70);
  for (double v : wm.trigger_set.X.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (int y : wm.trigger_set.y) {
    CHECK(y >= 0);
    CHECK(y < 2);
  }
}

TEST_CASE("watermark verification thresholds") {
  SyntheticSpec spec;
  spec.n = 60;
  spec.seed = 7;
  auto ds = normalize_minmax(synth_gauss(spec));
  WatermarkConfig wc;
  wc.count = 8;
  WatermarkResult wm = embed_watermark(ds, wc);
  Network net = random_net(ds.dim(), {4}, 2, 13);
  CHECK_THROWS_AS(verify_watermark(net, wm.trigger_set, 0.4),  // <= 1/c
                  std::invalid_argument);
  OwnershipVerdict v = verify_watermark(net, wm.trigger_set, 0.9);
  CHECK(v.stolen == (v.statistic >= 0.9));
  CHECK(v.threshold == 0.9);
}

TEST_CASE("ownership population metrics count error rates") {
  OwnershipVerdict pos{0, {}, true, 0};
  OwnershipVerdict neg{0, {}, false, 0};
  PopulationMetrics m =
      ownership_population_metrics({pos, pos, neg, pos}, {neg, neg, pos, neg});
  CHECK(m.fnr == doctest::Approx(0.25));
  CHECK(m.fpr == doctest::Approx(0.25));
  CHECK(m.accuracy == doctest::Approx(0.75));
}

}  // TEST_SUITE
