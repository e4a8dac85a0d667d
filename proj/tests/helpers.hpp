#pragma once

#include <cmath>
#include <vector>

#include "interbench/data.hpp"
#include "interbench/network.hpp"
#include "interbench/nn.hpp"
#include "interbench/rng.hpp"

namespace testutil {

using namespace interbench;

// Random dataset with arbitrary class count (synth_gauss is binary only).
inline LabeledDataset random_dataset(std::size_t n, std::size_t d, int classes,
                                     std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset ds;
  ds.X = Tensor({n, d});
  for (double& v : ds.X.data) v = rng.uniform();
  ds.y.resize(n);
  for (auto& y : ds.y) y = static_cast<int>(rng.index(static_cast<std::size_t>(classes)));
  ds.class_count = classes;
  ds.normalized = true;
  return ds;
}

inline Network random_net(std::size_t d, const std::vector<std::size_t>& hidden,
                          std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  return make_mlp(d, hidden, classes, rng);
}

// Loss as a pure function of one flattened parameter vector, for finite
// differences.
inline std::vector<double*> param_ptrs(Network& net) {
  std::vector<double*> out;
  for (auto& layer : net.layers) {
    for (double& v : layer.weight.data) out.push_back(&v);
    for (double& v : layer.bias.data) out.push_back(&v);
  }
  return out;
}

inline std::vector<double> flatten_grads(const std::vector<LayerGrads>& g) {
  std::vector<double> out;
  for (const auto& lg : g) {
    out.insert(out.end(), lg.weight.data.begin(), lg.weight.data.end());
    out.insert(out.end(), lg.bias.data.begin(), lg.bias.data.end());
  }
  return out;
}

}  // namespace testutil
