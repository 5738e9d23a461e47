#pragma once

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ivi/math/gamma.hpp"

namespace ivi {

// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) = sum z^n / Gamma(alpha n + beta)
// for real z, by direct series summation. For |z| > 1 the alternating series
// cancels catastrophically in double precision, so the sum is carried out in
// MPFR with the working precision sized to the largest term. Documented
// accuracy domain |z| <= 50.
inline double mittag_leffler(double alpha, double beta, double z) {
  if (!(alpha > 0.0)) throw std::invalid_argument("mittag_leffler: requires alpha > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("mittag_leffler: requires beta > 0");
  if (!(std::abs(z) <= 50.0))
    throw std::domain_error("mittag_leffler: |z| > 50 is outside the documented accuracy domain");
  if (z == 0.0) return 1.0 / math::gamma_fn(beta);

  // scan the term magnitudes in log space to size the working precision
  const double logaz = std::log(std::abs(z));
  double peak_log = -std::lgamma(beta);
  long n_peak = 0;
  for (long n = 1; n < 2000000; ++n) {
    const double lt = n * logaz - std::lgamma(alpha * n + beta);
    if (lt > peak_log) {
      peak_log = lt;
      n_peak = n;
    } else if (lt < peak_log - 60.0) {
      break;
    }
  }
  constexpr double log2e = 1.4426950408889634;
  const long bits = 192 + std::max(0L, static_cast<long>(peak_log * log2e) + 8);
  if (bits > 1 << 20) throw std::domain_error("mittag_leffler: series precision budget exceeded");
  const long stop_exp = static_cast<long>(peak_log * log2e) - (bits - 64);

  mpfr_t sum, term, zp, arg, g;
  mpfr_inits2(bits, sum, term, zp, arg, g, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_zero(sum, 1);
  mpfr_set_d(zp, 1.0, MPFR_RNDN);  // z^n
  bool converged = false;
  for (long n = 0; n < 2000000; ++n) {
    mpfr_set_d(arg, alpha, MPFR_RNDN);
    mpfr_mul_si(arg, arg, n, MPFR_RNDN);
    mpfr_add_d(arg, arg, beta, MPFR_RNDN);
    mpfr_gamma(g, arg, MPFR_RNDN);
    mpfr_div(term, zp, g, MPFR_RNDN);
    mpfr_add(sum, sum, term, MPFR_RNDN);
    if (n > n_peak && !mpfr_zero_p(term) && mpfr_get_exp(term) < stop_exp) {
      converged = true;
      break;
    }
    mpfr_mul_d(zp, zp, z, MPFR_RNDN);
  }
  const double result = mpfr_get_d(sum, MPFR_RNDN);
  mpfr_clears(sum, term, zp, arg, g, static_cast<mpfr_ptr>(nullptr));
  if (!converged) throw std::domain_error("mittag_leffler: series did not converge");
  if (!std::isfinite(result))
    throw std::overflow_error("mittag_leffler: result overflows double precision");
  return result;
}

}  // namespace ivi
