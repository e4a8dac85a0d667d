#include "interbench/network.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace interbench {

std::size_t Network::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

void Network::validate() const {
  if (layers.empty()) throw std::invalid_argument("network: no layers");
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
    if (layers[k].out_dim() != layers[k + 1].in_dim())
      throw std::invalid_argument("network: layer dimensions do not chain");
  }
  if (layers.back().act != Activation::Identity)
    throw std::invalid_argument("network: final layer must be identity");
}

static Layer make_layer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
  Layer l;
  l.weight = Tensor({out, in});
  l.bias = Tensor({out});
  l.act = act;
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  for (auto& w : l.weight.data) w = rng.uniform(-bound, bound);
  return l;
}

Network make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                 std::size_t classes, Rng& rng) {
  Network net;
  std::size_t in = input_dim;
  for (std::size_t h : hidden) {
    net.layers.push_back(make_layer(in, h, Activation::Relu, rng));
    in = h;
  }
  net.layers.push_back(make_layer(in, classes, Activation::Identity, rng));
  net.validate();
  return net;
}

bool same_architecture(const Network& a, const Network& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    if (a.layers[k].in_dim() != b.layers[k].in_dim()) return false;
    if (a.layers[k].out_dim() != b.layers[k].out_dim()) return false;
    if (a.layers[k].act != b.layers[k].act) return false;
  }
  return true;
}

double max_param_delta(const Network& a, const Network& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    for (std::size_t i = 0; i < a.layers[k].weight.size(); ++i)
      m = std::max(m, std::abs(a.layers[k].weight.data[i] - b.layers[k].weight.data[i]));
    for (std::size_t i = 0; i < a.layers[k].bias.size(); ++i)
      m = std::max(m, std::abs(a.layers[k].bias.data[i] - b.layers[k].bias.data[i]));
  }
  return m;
}

}  // namespace interbench
