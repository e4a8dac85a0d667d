#include "interbench/tensor.hpp"

#include <cmath>
#include <string>

namespace interbench {

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor zeros_like(const Tensor& t) { return Tensor(t.shape, 0.0); }

void require_finite(const Tensor& t, const char* what) {
  if (!t.all_finite())
    throw std::runtime_error(std::string(what) + ": non-finite values");
}

}  // namespace interbench
