#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ivi/math/quadrature.hpp"
#include "ivi/riccati.hpp"

namespace ivi {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Zero rates and dividends throughout.
inline double bs_call_price(double S0, double strike, double T, double sigma) {
  if (!(S0 > 0.0) || !(strike > 0.0) || !(T > 0.0))
    throw std::invalid_argument("bs_call_price: S0, strike, T must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("bs_call_price: sigma must be nonnegative");
  if (sigma == 0.0) return std::max(S0 - strike, 0.0);
  const double sv = sigma * std::sqrt(T);
  const double d1 = std::log(S0 / strike) / sv + 0.5 * sv;
  return S0 * norm_cdf(d1) - strike * norm_cdf(d1 - sv);
}

inline double bs_vega(double S0, double strike, double T, double sigma) {
  const double sv = sigma * std::sqrt(T);
  const double d1 = std::log(S0 / strike) / sv + 0.5 * sv;
  return S0 * norm_pdf(d1) * std::sqrt(T);
}

// Implied volatility by bracketed bisection/Newton hybrid on [1e-4, 5].
inline double implied_vol(double price, double S0, double strike, double T) {
  const double intrinsic = std::max(S0 - strike, 0.0);
  if (!(price > intrinsic) || !(price < S0))
    throw std::domain_error("implied_vol: price outside the open no-arbitrage bounds");
  double lo = 1e-4, hi = 5.0;
  if (bs_call_price(S0, strike, T, lo) > price)
    throw std::domain_error("implied_vol: price below the sigma = 1e-4 bracket");
  if (bs_call_price(S0, strike, T, hi) < price)
    throw std::domain_error("implied_vol: price above the sigma = 5 bracket");
  double sigma = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double diff = bs_call_price(S0, strike, T, sigma) - price;
    if (std::abs(diff) < 1e-10) return sigma;
    if (diff > 0.0) hi = sigma; else lo = sigma;
    const double vega = bs_vega(S0, strike, T, sigma);
    double next = vega > 1e-12 ? sigma - diff / vega : 0.5 * (lo + hi);
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    sigma = next;
  }
  return sigma;
}

struct OptionQuote {
  double strike = 0.0;
  double maturity = 0.0;
  double price = 0.0;
  double implied_vol = 0.0;
};

struct QuadConfig {
  double panel_tol = 1e-11;    // absolute tolerance per top-level panel
  double tail_tol = 1e-9;      // stop extending when an octave contributes less
  double u_max_cap = 1 << 20;  // hard truncation bound
};

// Fourier pricer along the contour v = 1/2 + iu. Characteristic function
// values are cached per u and shared across strikes; all sums run in a fixed
// deterministic order.
class FourierPricer {
 public:
  FourierPricer(ModelParams params, int riccati_m = 2000, QuadConfig quad = {})
      : params_(std::move(params)), m_(riccati_m), quad_(quad) {
    params_.validate();
  }

  // S0 - sqrt(S0 K)/pi int_0^inf Re[e^{iu log(S0/K)} phi(1/2+iu)] / (u^2+1/4) du
  double call_price(double strike) {
    if (!(strike > 0.0)) throw std::invalid_argument("call_price: strike must be positive");
    const double kappa = std::log(params_.S0 / strike);
    const auto integrand = [&](double u) {
      const std::complex<double> phase(0.0, u * kappa);
      return (std::exp(phase) * phi_half(u)).real() / (u * u + 0.25);
    };
    const double integral = integrate_tail(integrand);
    double price = params_.S0 - std::sqrt(params_.S0 * strike) / std::numbers::pi * integral;
    return std::clamp(price, std::max(params_.S0 - strike, 0.0), params_.S0);
  }

  // Independent put transform (distribution-function inversion on the contours
  // Re v = 0 and Re v = 1); used to cross-check parity, not derived from
  // call_price.
  double put_price(double strike) {
    if (!(strike > 0.0)) throw std::invalid_argument("put_price: strike must be positive");
    const double kt = std::log(strike / params_.S0);
    const auto pi2_integrand = [&](double u) {
      const std::complex<double> phase(0.0, -u * kt);
      return (std::exp(phase) * phi_line(phi0_, 0.0, u) / std::complex<double>(0.0, u)).real();
    };
    const auto pi1_integrand = [&](double u) {
      const std::complex<double> phase(0.0, -u * kt);
      return (std::exp(phase) * phi_line(phi1_, 1.0, u) / std::complex<double>(0.0, u)).real();
    };
    const double pi2 = 0.5 + integrate_tail(pi2_integrand) / std::numbers::pi;
    const double pi1 = 0.5 + integrate_tail(pi1_integrand) / std::numbers::pi;
    const double put = strike * (1.0 - pi2) - params_.S0 * (1.0 - pi1);
    return std::clamp(put, std::max(strike - params_.S0, 0.0), strike);
  }

  const ModelParams& params() const { return params_; }

 private:
  template <class F>
  double integrate_tail(F&& integrand) {
    double total = 0.0;
    double lo = 0.0, hi = 2.0;
    // fixed initial panels [0,2], [2,4], [4,8], [8,16], then octaves with a
    // relative tail cut-off
    int fixed = 0;
    while (true) {
      const double piece = math::adaptive_gk(integrand, lo, hi, quad_.panel_tol);
      total += piece;
      ++fixed;
      const bool warmed = fixed >= 4;
      if (warmed && std::abs(piece) < quad_.tail_tol * std::max(1.0, std::abs(total))) break;
      lo = hi;
      hi = fixed == 1 ? 4.0 : 2.0 * hi;
      if (hi > quad_.u_max_cap)
        throw std::runtime_error("FourierPricer: integrand tail did not decay");
    }
    return total;
  }

  std::complex<double> phi_half(double u) { return phi_line(phi_half_, 0.5, u); }

  std::complex<double> phi_line(std::map<double, std::complex<double>>& cache, double re_v,
                                double u) {
    const auto it = cache.find(u);
    if (it != cache.end()) return it->second;
    const std::complex<double> val =
        char_fn(params_, {re_v, u}, {0.0, 0.0}, m_).value;
    cache.emplace(u, val);
    return val;
  }

  ModelParams params_;
  int m_;
  QuadConfig quad_;
  std::map<double, std::complex<double>> phi_half_, phi0_, phi1_;
};

inline double call_price_fourier(const ModelParams& params, double strike, int riccati_m = 2000,
                                 QuadConfig quad = {}) {
  FourierPricer pricer(params, riccati_m, quad);
  return pricer.call_price(strike);
}

}  // namespace ivi
