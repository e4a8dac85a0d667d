#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>

namespace interbench {

inline double mean_of(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean: empty input");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample variance with Bessel correction; 0 for n == 1.
inline double sample_variance(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(n - 1);
}

inline double stderr_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

inline double normal_logpdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.918938533204672742;  // log sqrt(2 pi)
}

double regularized_incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  std::optional<double> p_one_sided;  // P(T >= t) under H0; absent if degenerate
};

// Welch two-sample t-test for mean(a) > mean(b).
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace interbench
