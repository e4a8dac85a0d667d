#include <doctest.h>

#include <vector>

#include "helpers.hpp"
#include "interbench/fairness.hpp"

using namespace interbench;
using namespace testutil;

namespace {

// Build preds/labels/groups arrays realizing exact per-group rates.
struct CaseBuilder {
  std::vector<int> preds, labels, groups;
  void add(int g, int label, int pred, int count) {
    for (int i = 0; i < count; ++i) {
      groups.push_back(g);
      labels.push_back(label);
      preds.push_back(pred);
    }
  }
};

}  // namespace

TEST_SUITE("fairness") {

TEST_CASE("identical behavior across groups: zero gaps, p-rule 100") {
  CaseBuilder c;
  for (int g = 0; g < 2; ++g) {
    c.add(g, 1, 1, 4);
    c.add(g, 1, 0, 1);
    c.add(g, 0, 1, 1);
    c.add(g, 0, 0, 4);
  }
  FairnessMetrics m = fairness_metrics(c.preds, c.labels, c.groups);
  CHECK(m.demographic_parity_gap == doctest::Approx(0.0));
  CHECK(m.equalized_odds_gap == doctest::Approx(0.0));
  REQUIRE(m.p_rule.has_value());
  CHECK(*m.p_rule == doctest::Approx(100.0));
}

TEST_CASE("P0 = 0.6, P1 = 0.3 gives DP gap 0.3 and p-rule 50") {
  CaseBuilder c;
  c.add(0, 1, 1, 6);
  c.add(0, 0, 0, 4);  // group 0: 6/10 positive predictions
  c.add(1, 1, 1, 3);
  c.add(1, 0, 0, 7);  // group 1: 3/10
  FairnessMetrics m = fairness_metrics(c.preds, c.labels, c.groups);
  CHECK(m.demographic_parity_gap == doctest::Approx(0.3));
  REQUIRE(m.p_rule.has_value());
  CHECK(*m.p_rule == doctest::Approx(50.0));
}

TEST_CASE("hand confusion tables: TPR .8/.5 FPR .2/.4") {
  CaseBuilder c;
  c.add(0, 1, 1, 8);
  c.add(0, 1, 0, 2);  // g0 TPR 0.8
  c.add(0, 0, 1, 2);
  c.add(0, 0, 0, 8);  // g0 FPR 0.2
  c.add(1, 1, 1, 5);
  c.add(1, 1, 0, 5);  // g1 TPR 0.5
  c.add(1, 0, 1, 4);
  c.add(1, 0, 0, 6);  // g1 FPR 0.4
  FairnessMetrics m = fairness_metrics(c.preds, c.labels, c.groups);
  CHECK(m.tp_parity_gap == doctest::Approx(0.3));
  CHECK(m.fp_parity_gap == doctest::Approx(0.2));
  CHECK(m.equalized_odds_gap == doctest::Approx(0.3));
}

TEST_CASE("gaps are invariant under group relabeling") {
  CaseBuilder c;
  c.add(0, 1, 1, 6);
  c.add(0, 0, 0, 4);
  c.add(1, 1, 1, 3);
  c.add(1, 0, 0, 7);
  FairnessMetrics a = fairness_metrics(c.preds, c.labels, c.groups);
  for (int& g : c.groups) g = 1 - g;
  FairnessMetrics b = fairness_metrics(c.preds, c.labels, c.groups);
  CHECK(a.demographic_parity_gap == doctest::Approx(b.demographic_parity_gap));
  CHECK(a.equalized_odds_gap == doctest::Approx(b.equalized_odds_gap));
  CHECK(*a.p_rule == doctest::Approx(*b.p_rule));
}

TEST_CASE("p-rule absent when no group ever predicts positive") {
  CaseBuilder c;
  c.add(0, 1, 0, 5);
  c.add(1, 0, 0, 5);
  FairnessMetrics m = fairness_metrics(c.preds, c.labels, c.groups);
  CHECK_FALSE(m.p_rule.has_value());
}

TEST_CASE("single group is an error") {
  CaseBuilder c;
  c.add(0, 1, 1, 5);
  CHECK_THROWS_AS(fairness_metrics(c.preds, c.labels, c.groups),
                  std::invalid_argument);
}

TEST_CASE("lambda zero debiasing reproduces plain training of the predictor") {
  SyntheticSpec spec;
  spec.n = 120;
  spec.ratio = 0.5;
  spec.rho = 0.5;
  spec.sensitive_shift = 1.0;
  spec.seed = 21;
  auto ds = normalize_minmax(synth_gauss(spec));
  Network pred_tmpl = random_net(ds.dim(), {6}, 2, 31);
  Network adv_tmpl = random_net(2, {4}, 2, 32);
  DebiasConfig dc;
  dc.lambda = 0.0;
  dc.epochs = 3;
  dc.batch_size = 32;
  dc.predictor_rate = 0.01;
  dc.seed = 9;
  Network debiased = adversarial_debiasing_train(pred_tmpl, adv_tmpl, ds, dc);
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 32;
  tc.learning_rate = 0.01;
  tc.seed = 9;
  Network plain = train(pred_tmpl, ds, tc).net;
  CHECK(max_param_delta(debiased, plain) < 1e-12);
}

TEST_CASE("debiasing requires a sensitive attribute") {
  auto ds = random_dataset(40, 3, 2, 41);
  Network pred_tmpl = random_net(3, {4}, 2, 42);
  Network adv_tmpl = random_net(2, {4}, 2, 43);
  DebiasConfig dc;
  CHECK_THROWS_AS(adversarial_debiasing_train(pred_tmpl, adv_tmpl, ds, dc),
                  std::invalid_argument);
}

}  // TEST_SUITE
