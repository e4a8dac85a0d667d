#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "interbench/rng.hpp"
#include "interbench/tensor.hpp"

namespace interbench {

enum class Activation { Relu, Identity };

struct Layer {
  Tensor weight;  // out x in
  Tensor bias;    // out
  Activation act = Activation::Identity;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
};

// Ordered dense-layer stack. The final layer is always Identity (logits).
struct Network {
  std::vector<Layer> layers;

  std::size_t input_dim() const { return layers.front().in_dim(); }
  std::size_t output_dim() const { return layers.back().out_dim(); }
  std::size_t param_count() const;

  void validate() const;  // throws if layer dims do not chain
};

// Fully connected net: relu hidden layers, identity logits layer.
// Weights uniform in +/- sqrt(6/(fan_in+fan_out)) from the given stream.
Network make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                 std::size_t classes, Rng& rng);

bool same_architecture(const Network& a, const Network& b);
double max_param_delta(const Network& a, const Network& b);

}  // namespace interbench
