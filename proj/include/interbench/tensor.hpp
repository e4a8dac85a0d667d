#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace interbench {

// Row-major dense tensor of doubles; the sole numeric carrier.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::optional<std::vector<double>> grad;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, double fill = 0.0) : shape(std::move(s)) {
    data.assign(element_count(shape), fill);
  }
  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != element_count(shape))
      throw std::invalid_argument("tensor: shape/data size mismatch");
  }

  static std::size_t element_count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

  // Row view helpers for 2-d tensors.
  const double* row(std::size_t i) const { return data.data() + i * cols(); }
  double* row(std::size_t i) { return data.data() + i * cols(); }

  bool all_finite() const;
};

Tensor zeros_like(const Tensor& t);

// Throws if any entry is NaN/Inf.
void require_finite(const Tensor& t, const char* what);

}  // namespace interbench
