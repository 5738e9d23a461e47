#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ivi::math {

// Lanczos approximation (g = 7, 9 terms), relative error < 1e-13 on the
// positive axis; negative non-integer arguments via the reflection formula.
namespace detail {

inline constexpr double lanczos_g = 7.0;
inline constexpr double lanczos_coef[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

inline double lanczos_gamma_pos(double x) {
  // valid for x >= 0.5
  double acc = lanczos_coef[0];
  for (int i = 1; i < 9; ++i) acc += lanczos_coef[i] / (x - 1.0 + i);
  const double t = x - 0.5 + lanczos_g;
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, x - 0.5) * std::exp(-t) * acc;
}

}  // namespace detail

inline double gamma_fn(double x) {
  if (std::isnan(x)) throw std::invalid_argument("gamma_fn: NaN argument");
  if (x >= 0.5) return detail::lanczos_gamma_pos(x);
  if (x == std::floor(x)) throw std::domain_error("gamma_fn: pole at non-positive integer");
  // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
  return std::numbers::pi / (std::sin(std::numbers::pi * x) * detail::lanczos_gamma_pos(1.0 - x));
}

inline double log_gamma(double x) {
  if (!(x > 0)) throw std::domain_error("log_gamma: requires x > 0");
  if (x < 0.5) return std::log(gamma_fn(x));
  double acc = detail::lanczos_coef[0];
  for (int i = 1; i < 9; ++i) acc += detail::lanczos_coef[i] / (x - 1.0 + i);
  const double t = x - 0.5 + detail::lanczos_g;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (x - 0.5) * std::log(t) - t + std::log(acc);
}

}  // namespace ivi::math
