#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "helpers.hpp"
#include "interbench/data.hpp"

using namespace interbench;

namespace {

std::string write_fixture_csv(const std::string& stem, bool with_meta) {
  const std::string path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                           "/" + stem + ".csv";
  {
    std::ofstream out(path);
    out << "f0,f1,sens_group,label\n";
    out << "0.0,2.0,0,0\n";
    out << "1.0,4.0,1,1\n";
    out << "2.0,6.0,0,1\n";
    out << "3.0,8.0,1,0\n";
  }
  if (with_meta) {
    std::ofstream meta(path + ".meta.json");
    meta << R"({"grid": [1, 2], "normalized": false})";
  }
  return path;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("csv loading pulls sens_ columns out of the feature matrix") {
  const std::string path = write_fixture_csv("ib_fixture_meta", true);
  CsvSchema schema;
  schema.label_column = "label";
  LabeledDataset ds = load_csv(path, schema);
  CHECK(ds.size() == 4);
  CHECK(ds.dim() == 2);
  REQUIRE(ds.z.has_value());
  CHECK((*ds.z)[1] == 1);
  CHECK(ds.class_count == 2);
  CHECK(ds.group_count == 2);
  REQUIRE(ds.grid.has_value());
  CHECK(ds.grid->first == 1);
  CHECK(ds.grid->second == 2);
  CHECK(ds.normalized);  // schema.normalize defaults on
  // min-max: f0 spans [0,3] -> first row 0, last row 1
  CHECK(ds.X.at(0, 0) == doctest::Approx(0.0));
  CHECK(ds.X.at(3, 0) == doctest::Approx(1.0));
}

TEST_CASE("sensitive_as_feature keeps the column in X") {
  const std::string path = write_fixture_csv("ib_fixture_feat", false);
  CsvSchema schema;
  schema.label_column = "label";
  schema.sensitive_as_feature = true;
  LabeledDataset ds = load_csv(path, schema);
  CHECK(ds.dim() == 3);
  REQUIRE(ds.z.has_value());
}

TEST_CASE("missing file and missing label column are errors") {
  CsvSchema schema;
  schema.label_column = "label";
  CHECK_THROWS(load_csv("/nonexistent/nope.csv", schema));
  const std::string path = write_fixture_csv("ib_fixture_badlabel", false);
  schema.label_column = "no_such_column";
  CHECK_THROWS(load_csv(path, schema));
}

TEST_CASE("normalize_minmax is idempotent and zeros constant columns") {
  LabeledDataset ds;
  ds.X = Tensor({3, 2}, {1.0, 5.0, 2.0, 5.0, 4.0, 5.0});
  ds.y = {0, 1, 0};
  ds.class_count = 2;
  LabeledDataset n1 = normalize_minmax(ds);
  CHECK(n1.X.at(0, 0) == doctest::Approx(0.0));
  CHECK(n1.X.at(2, 0) == doctest::Approx(1.0));
  CHECK(n1.X.at(0, 1) == doctest::Approx(0.0));  // constant column
  LabeledDataset n2 = normalize_minmax(n1);
  for (std::size_t i = 0; i < n1.X.data.size(); ++i)
    CHECK(n2.X.data[i] == doctest::Approx(n1.X.data[i]).epsilon(1e-12));
}

TEST_CASE("split produces disjoint deterministic subsets of the right size") {
  auto ds = testutil::random_dataset(101, 3, 2, 5);
  SplitSpec spec;
  spec.train_fraction = 0.5;
  spec.test_fraction = 0.25;
  spec.adversary_fraction = 0.25;
  spec.seed = 42;
  Splits a = split(ds, spec);
  Splits b = split(ds, spec);
  CHECK(a.train.size() == static_cast<std::size_t>(std::llround(0.5 * 101)));
  CHECK(a.test.size() == static_cast<std::size_t>(std::llround(0.25 * 101)));
  std::set<std::size_t> seen;
  for (auto i : a.train_idx) CHECK(seen.insert(i).second);
  for (auto i : a.test_idx) CHECK(seen.insert(i).second);
  for (auto i : a.adversary_idx) CHECK(seen.insert(i).second);
  CHECK(a.train_idx == b.train_idx);
  spec.seed = 43;
  Splits c = split(ds, spec);
  CHECK(a.train_idx != c.train_idx);
}

TEST_CASE("synth_gauss matches its construction parameters") {
  SyntheticSpec spec;
  spec.n = 4000;
  spec.d = 3;
  spec.ratio = 0.5;
  spec.rho = 0.6;
  spec.seed = 17;
  LabeledDataset ds = synth_gauss(spec);
  REQUIRE(ds.z.has_value());
  double zbar = 0.0;
  for (int z : *ds.z) zbar += z;
  zbar /= spec.n;
  CHECK(std::abs(zbar - 0.5) < 0.05);
  CHECK(std::abs(empirical_correlation(*ds.z, ds.y) - 0.6) < 0.05);
  // separable classes: feature-0 means differ by ~mean_separation
  double m0 = 0.0, m1 = 0.0;
  std::size_t n0 = 0, n1 = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.y[i] == 0) {
      m0 += ds.X.at(i, 0);
      ++n0;
    } else {
      m1 += ds.X.at(i, 0);
      ++n1;
    }
  }
  CHECK(std::abs(m1 / n1 - m0 / n0 - spec.mean_separation) < 0.2);
}

TEST_CASE("infeasible (ratio, rho) pairs throw") {
  SyntheticSpec spec;
  spec.ratio = 0.05;
  spec.rho = 0.9;
  CHECK_THROWS_AS(synth_gauss(spec), std::invalid_argument);
}

TEST_CASE("label noise flips roughly the requested fraction") {
  // With huge class separation the sign of feature 0 recovers the pre-noise
  // label almost surely, so disagreements count the flips.
  SyntheticSpec spec;
  spec.n = 3000;
  spec.seed = 31;
  spec.mean_separation = 12.0;
  spec.label_noise = 0.2;
  LabeledDataset ds = synth_gauss(spec);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.y[i] != (ds.X.at(i, 0) > 0.0 ? 1 : 0)) ++flips;
  CHECK(std::abs(static_cast<double>(flips) / 3000.0 - 0.2) < 0.03);
}

TEST_CASE("empirical correlation of identical vectors is 1") {
  std::vector<int> v = {0, 1, 1, 0, 1};
  CHECK(empirical_correlation(v, v) == doctest::Approx(1.0));
}

}  // TEST_SUITE
