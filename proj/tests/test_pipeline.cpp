#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "helpers.hpp"
#include "interbench/pipeline.hpp"
#include "interbench/registry.hpp"

using namespace interbench;
using nlohmann::json;

namespace {

json minimal_config() {
  return json::parse(R"({
    "dataset": {"type": "synthetic", "n": 200, "d": 4, "seed": 3},
    "split": {"train": 0.5, "test": 0.25, "adversary": 0.25},
    "model": {"hidden": [6]},
    "train": {"epochs": 3, "batch_size": 32, "learning_rate": 0.01},
    "attacks": [],
    "seeds": [7]
  })");
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("aggregate: [5,5,5] and [1,3]") {
  AggregateEntry a = aggregate_values({5, 5, 5});
  CHECK(a.mean == doctest::Approx(5.0));
  CHECK(a.stderr_ == doctest::Approx(0.0));
  CHECK(a.n == 3);
  AggregateEntry b = aggregate_values({1, 3});
  CHECK(b.mean == doctest::Approx(2.0));
  CHECK(b.stderr_ == doctest::Approx(1.0));
  AggregateEntry c = aggregate_values({4.2});
  CHECK(c.stderr_ == 0.0);  // documented single-seed convention
  CHECK(c.n == 1);
}

TEST_CASE("aggregate matches an independent two-pass oracle") {
  Rng rng(17);
  std::vector<double> v(100);
  for (double& x : v) x = rng.uniform(-10.0, 10.0);
  AggregateEntry a = aggregate_values(v);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= 100.0;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= 99.0;
  CHECK(std::abs(a.mean - mean) < 1e-12);
  CHECK(std::abs(a.stderr_ - std::sqrt(var / 100.0)) < 1e-12);
}

TEST_CASE("validate_config catches the spec'd violations") {
  json bad = minimal_config();
  bad["split"]["train"] = 0.8;
  bad["split"]["test"] = 0.4;  // sums to 1.45
  auto p1 = validate_config(bad);
  CHECK(!p1.empty());

  json unknown = minimal_config();
  unknown["attacks"] = json::array({json{{"name", "nosuch"}}});
  auto p2 = validate_config(unknown);
  REQUIRE(p2.size() == 1);
  CHECK(p2[0].find("registry") != std::string::npos);

  CHECK(validate_config(minimal_config()).empty());

  json noseeds = minimal_config();
  noseeds["seeds"] = json::array();
  CHECK(!validate_config(noseeds).empty());
}

TEST_CASE("empty attack list reports only baseline accuracy metrics") {
  auto cfg = ExperimentConfig::parse(minimal_config());
  InteractionReport rep = run_experiment(cfg);
  REQUIRE(rep.per_seed.size() == 1);
  const auto& rec = rep.per_seed[0];
  CHECK(rec.model == "std");
  CHECK(rec.metrics.count("acc_te") == 1);
  CHECK(rec.metrics.count("acc_tr") == 1);
  CHECK(rec.metrics.size() == 2);  // default synth has a single z group -> no fairness
  CHECK(rec.errors.empty());
}

TEST_CASE("identical configs give identical canonical reports") {
  auto cfg = ExperimentConfig::parse(minimal_config());
  InteractionReport a = run_experiment(cfg);
  InteractionReport b = run_experiment(cfg);
  CHECK(canonical_report_json(a) == canonical_report_json(b));
}

TEST_CASE("adversarial training with epsilon zero matches the baseline") {
  json j = minimal_config();
  j["defense"] = {{"name", "adversarial_training"},
                  {"params", {{"epsilon", 0.0}, {"random_start", false}}}};
  auto cfg = ExperimentConfig::parse(j);
  InteractionReport rep = run_experiment(cfg);
  REQUIRE(rep.per_seed.size() == 2);
  const auto& std_rec = rep.per_seed[0];
  const auto& def_rec = rep.per_seed[1];
  CHECK(def_rec.model == "def");
  for (const auto& [k, v] : std_rec.metrics) {
    REQUIRE(def_rec.metrics.count(k) == 1);
    REQUIRE(v.has_value());
    CHECK(std::abs(*def_rec.metrics.at(k) - *v) < 1e-9);
  }
}

TEST_CASE("a failed attack is recorded without aborting the others") {
  json j = minimal_config();
  // shadow_meta needs synthetic data; force the failure path with a csv config
  const std::string csv = "/tmp/ib_pipeline_fixture.csv";
  {
    std::ofstream out(csv);
    out << "f0,f1,label\n";
    for (int i = 0; i < 80; ++i)
      out << (i % 7) * 0.1 << ',' << (i % 5) * 0.2 << ',' << i % 2 << "\n";
  }
  j["dataset"] = {{"type", "csv"}, {"path", csv}, {"label_column", "label"}};
  j["attacks"] = json::array({json{{"name", "shadow_meta"}},
                              json{{"name", "pgd"}, {"params", {{"epsilon", 0.02}}}}});
  auto cfg = ExperimentConfig::parse(j);
  InteractionReport rep = run_experiment(cfg);
  REQUIRE(rep.per_seed.size() == 1);
  const auto& rec = rep.per_seed[0];
  CHECK(rec.errors.count("shadow_meta") == 1);
  CHECK(rec.metrics.count("acc_rob") == 1);  // pgd still ran
}

TEST_CASE("permuting the seed list leaves aggregates identical") {
  json j = minimal_config();
  j["seeds"] = {1, 2, 3};
  auto a = run_experiment(ExperimentConfig::parse(j));
  j["seeds"] = {3, 1, 2};
  auto b = run_experiment(ExperimentConfig::parse(j));
  REQUIRE(a.aggregate.size() == b.aggregate.size());
  for (const auto& [k, va] : a.aggregate) {
    REQUIRE(b.aggregate.count(k) == 1);
    CHECK(std::abs(va.mean - b.aggregate.at(k).mean) < 1e-12);
    CHECK(std::abs(va.stderr_ - b.aggregate.at(k).stderr_) < 1e-12);
  }
}

TEST_CASE("parallel and serial execution produce the same report") {
  json j = minimal_config();
  j["seeds"] = {1, 2, 3, 4};
  auto cfg = ExperimentConfig::parse(j);
  InteractionReport serial = run_experiment(cfg, 1);
  InteractionReport parallel = run_experiment(cfg, 4);
  CHECK(canonical_report_json(serial) == canonical_report_json(parallel));
}

TEST_CASE("every emitted metric name is registered") {
  json j = minimal_config();
  j["dataset"]["ratio"] = 0.5;
  j["dataset"]["rho"] = 0.4;
  j["dataset"]["sensitive_shift"] = 0.8;
  j["attacks"] = json::array(
      {json{{"name", "pgd"}, {"params", {{"epsilon", 0.02}}}},
       json{{"name", "model_extraction"}, {"params", {{"epochs", 2}}}},
       json{{"name", "gradient_descent"}, {"params", {{"steps", 20}}}}});
  auto rep = run_experiment(ExperimentConfig::parse(j));
  for (const auto& rec : rep.per_seed) {
    CHECK(rec.errors.empty());
    for (const auto& [k, v] : rec.metrics) CHECK(is_registered_metric(k));
  }
}

TEST_CASE("report json round-trips and csv has one row per value") {
  json j = minimal_config();
  j["seeds"] = {1, 2};
  auto rep = run_experiment(ExperimentConfig::parse(j));
  json dumped = report_to_json(rep, true);
  InteractionReport back = report_from_json(dumped);
  CHECK(canonical_report_json(back) == canonical_report_json(rep));

  std::string csv = report_csv(rep);
  const auto rows = std::count(csv.begin(), csv.end(), '\n');
  // header + 2 seeds x 1 model x 2 metrics
  CHECK(rows == 1 + 2 * 2);
}

TEST_CASE("config digest is stable and content-sensitive") {
  json a = minimal_config();
  json b = minimal_config();
  CHECK(config_digest(a) == config_digest(b));
  b["seeds"] = {8};
  CHECK(config_digest(a) != config_digest(b));
  CHECK(config_digest(a).size() == 16);
}

TEST_CASE("emit: atomic write leaves no temp file behind") {
  auto rep = run_experiment(ExperimentConfig::parse(minimal_config()));
  const std::string path = "/tmp/ib_report_atomic/report.json";
  write_report_json(rep, path);
  CHECK(std::ifstream(path).good());
  CHECK_FALSE(std::ifstream(path + ".tmp").good());
}

}  // TEST_SUITE
