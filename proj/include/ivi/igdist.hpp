#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace ivi {

// Inverse Gaussian distribution IG(mu, lambda). The degenerate pair
// mu = lambda = 0 encodes the Dirac mass at 0; mixed-degenerate pairs are
// rejected because the scheme never produces them.
struct IGParams {
  double mu = 0.0;
  double lambda = 0.0;

  IGParams() = default;
  IGParams(double mu_, double lambda_) : mu(mu_), lambda(lambda_) {
    if (!(mu >= 0.0) || !(lambda >= 0.0))
      throw std::invalid_argument("IGParams: mu and lambda must be nonnegative");
    if ((mu == 0.0) != (lambda == 0.0))
      throw std::invalid_argument("IGParams: mu and lambda must be zero together");
  }
  bool degenerate() const { return mu == 0.0; }
};

inline double ig_pdf(const IGParams& p, double x) {
  if (p.degenerate()) throw std::invalid_argument("ig_pdf: degenerate IG(0,0) has no density");
  if (!(x > 0.0)) throw std::domain_error("ig_pdf: requires x > 0");
  const double d = x - p.mu;
  return std::sqrt(p.lambda / (2.0 * std::numbers::pi * x * x * x)) *
         std::exp(-p.lambda * d * d / (2.0 * p.mu * p.mu * x));
}

inline std::complex<double> ig_char(const IGParams& p, std::complex<double> w) {
  if (w.real() > 0.0) throw std::domain_error("ig_char: requires Re(w) <= 0");
  if (p.degenerate()) return {1.0, 0.0};
  const std::complex<double> rad = 1.0 - 2.0 * w * p.mu * p.mu / p.lambda;
  return std::exp(p.lambda / p.mu * (1.0 - std::sqrt(rad)));
}

inline double ig_moment(const IGParams& p, int order) {
  if (order < 1) throw std::invalid_argument("ig_moment: order must be >= 1");
  if (p.degenerate()) throw std::invalid_argument("ig_moment: degenerate IG(0,0)");
  const double r = p.mu * p.mu / p.lambda;
  double prev = 1.0, cur = p.mu;  // E[X^0], E[X^1]
  for (int n = 2; n <= order; ++n) {
    const double next = (2.0 * n - 3.0) * r * cur + p.mu * p.mu * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// Michael-Schucany-Haas sampler; consumes exactly one standard normal and one
// uniform per nondegenerate draw, none otherwise. The smaller root is
// evaluated in a form that only cancels mildly for large Y, with roundoff
// negatives clamped to 0.
inline double ig_sample(const IGParams& p, double xi, double eta) {
  if (p.degenerate()) return 0.0;
  const double y = xi * xi;
  double x;
  if (y == 0.0) {
    x = p.mu;
  } else {
    const double my = p.mu * y;
    x = p.mu * (1.0 + (my - std::sqrt(my * (4.0 * p.lambda + my))) / (2.0 * p.lambda));
    if (x < 0.0) x = 0.0;
  }
  if (eta <= p.mu / (p.mu + x)) return x;
  return p.mu * p.mu / x;
}

}  // namespace ivi
