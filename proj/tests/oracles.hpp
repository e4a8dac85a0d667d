#pragma once

// Independent brute-force oracles used to check the closed-form
// implementations. Deliberately naive: exhaustive coalitions, pair
// enumeration, threshold scans.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "interbench/data.hpp"
#include "interbench/privacy.hpp"
#include "interbench/rng.hpp"

namespace testutil {

// Exhaustive-coalition Shapley values under the KNN utility; ties by index.
inline std::vector<double> brute_force_knn_shapley(
    const interbench::LabeledDataset& train, const interbench::LabeledDataset& valid,
    std::size_t K) {
  using interbench::LabeledDataset;
  const std::size_t n = train.size();
  std::vector<double> fact(n + 1, 1.0);
  for (std::size_t i = 1; i <= n; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);

  auto dist2 = [&](std::size_t i, std::size_t v) {
    double s = 0.0;
    for (std::size_t j = 0; j < train.dim(); ++j) {
      const double d = train.X.at(i, j) - valid.X.at(v, j);
      s += d * d;
    }
    return s;
  };

  auto utility = [&](const std::vector<std::size_t>& coalition, std::size_t v) {
    if (coalition.empty()) return 0.0;
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i : coalition) order.emplace_back(dist2(i, v), i);
    std::sort(order.begin(), order.end());
    const std::size_t take = std::min(K, order.size());
    double s = 0.0;
    for (std::size_t k = 0; k < take; ++k)
      if (train.y[order[k].second] == valid.y[v]) s += 1.0;
    return s / static_cast<double>(K);
  };

  std::vector<double> values(n, 0.0);
  for (std::size_t v = 0; v < valid.size(); ++v) {
    for (std::size_t i = 0; i < n; ++i) {
      double phi = 0.0;
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others.push_back(j);
      const std::size_t m = others.size();
      for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        std::vector<std::size_t> S;
        for (std::size_t b = 0; b < m; ++b)
          if (mask & (std::size_t{1} << b)) S.push_back(others[b]);
        const double w = fact[S.size()] * fact[n - S.size() - 1] / fact[n];
        const double without = utility(S, v);
        S.push_back(i);
        phi += w * (utility(S, v) - without);
      }
      values[i] += phi / static_cast<double>(valid.size());
    }
  }
  return values;
}

struct RocOracle {
  double auc = 0.0, bal = 0.0, tpr = 0.0;
};

// Pair enumeration for AUC (ties 0.5), threshold scan for the rest.
inline RocOracle brute_force_roc(const std::vector<interbench::MembershipScore>& s,
                                 double fpr_target) {
  double concordant = 0.0;
  std::size_t pos = 0, neg = 0;
  for (const auto& a : s) (a.truth_member ? pos : neg)++;
  for (const auto& a : s)
    for (const auto& b : s) {
      if (!a.truth_member || b.truth_member) continue;
      if (a.score > b.score)
        concordant += 1.0;
      else if (a.score == b.score)
        concordant += 0.5;
    }
  RocOracle o;
  o.auc = concordant / (static_cast<double>(pos) * static_cast<double>(neg));
  std::vector<double> thresholds;
  for (const auto& a : s) thresholds.push_back(a.score);
  thresholds.push_back(std::numeric_limits<double>::infinity());
  for (double t : thresholds) {
    std::size_t tp = 0, fp = 0;
    for (const auto& a : s) {
      const bool pred = a.score >= t;
      if (pred && a.truth_member) ++tp;
      if (pred && !a.truth_member) ++fp;
    }
    const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
    const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
    o.bal = std::max(o.bal, 0.5 * (tpr + 1.0 - fpr));
    if (fpr <= fpr_target) o.tpr = std::max(o.tpr, tpr);
  }
  return o;
}

// Score sets with forced ties and at least one member and one non-member.
inline std::vector<interbench::MembershipScore> random_scores(std::size_t n,
                                                              std::uint64_t seed) {
  interbench::Rng rng(seed);
  std::vector<interbench::MembershipScore> s(n);
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    s[i].example_id = i;
    s[i].score = std::floor(rng.uniform(-3.0, 3.0) * 4.0) / 4.0;
    s[i].truth_member = rng.bernoulli(0.5);
    (s[i].truth_member ? has_pos : has_neg) = true;
  }
  if (!has_pos) s[0].truth_member = true;
  if (!has_neg) s[n - 1].truth_member = false;
  return s;
}

}  // namespace testutil
