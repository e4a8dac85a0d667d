#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "interbench/rng.hpp"
#include "interbench/tensor.hpp"

namespace interbench {

// Feature matrix + integer labels, optional sensitive attributes and grid
// metadata. Immutable after construction by convention.
struct LabeledDataset {
  Tensor X;                              // n x d
  std::vector<int> y;                    // labels in [0, class_count)
  std::optional<std::vector<int>> z;     // sensitive attribute in [0, group_count)
  std::optional<std::pair<std::size_t, std::size_t>> grid;  // (H, W), H*W == d
  int class_count = 0;
  int group_count = 0;
  bool normalized = false;
  std::string name;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return X.cols(); }

  void validate() const;
  LabeledDataset subset(const std::vector<std::size_t>& idx) const;
};

struct CsvSchema {
  std::string label_column;
  std::string sensitive_column;       // empty: use first sens_* column if any
  bool normalize = true;              // min-max per feature to [0,1]
  bool sensitive_as_feature = false;  // keep z out of X unless asked
};

// Header row required; feature columns numeric; sensitive columns prefixed
// sens_. Sidecar metadata at <path>.meta.json: {"grid": [H, W], "normalized": bool}.
LabeledDataset load_csv(const std::string& path, const CsvSchema& schema);

// Min-max per feature; constant columns map to 0. Idempotent.
LabeledDataset normalize_minmax(const LabeledDataset& ds);

struct SplitSpec {
  double train_fraction = 0.5;
  double test_fraction = 0.25;
  double adversary_fraction = 0.25;
  std::uint64_t seed = 0;
};

struct Splits {
  LabeledDataset train;
  LabeledDataset test;
  LabeledDataset adversary;
  std::vector<std::size_t> train_idx, test_idx, adversary_idx;
};

// Disjoint index sets, sizes round(fraction*n), deterministic given seed.
Splits split(const LabeledDataset& ds, const SplitSpec& spec);

struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t d = 2;
  double mean_separation = 3.0;   // class means at +/- (sep/2, 0, ...)
  double sensitive_shift = 0.0;   // z=1 shifts feature 1 by this amount
  double cov_scale = 1.0;
  double rho = 0.0;               // corr(z, y), y ~ Bernoulli(1/2)
  double ratio = 0.0;             // P(z = 1)
  double label_noise = 0.0;       // flip probability, in [0, 0.5)
  std::uint64_t seed = 0;
  std::optional<std::pair<std::size_t, std::size_t>> grid;
};

// Two-class Gaussian mixture with a sensitive attribute.
//
// Construction: y ~ Bernoulli(1/2); z | y ~ Bernoulli(r + s*rho*sqrt(r(1-r)))
// with s = +1 for y=1 and -1 for y=0, which gives P(z=1)=r and corr(z,y)=rho
// exactly in expectation. x ~ N(mu_y + z*shift*e1, cov_scale^2 I) with
// mu_y = +/- (sep/2) e0. Labels flipped with probability label_noise.
// Infeasible (r, rho) pairs (conditional probability outside [0,1]) throw.
LabeledDataset synth_gauss(const SyntheticSpec& spec);

double empirical_correlation(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace interbench
