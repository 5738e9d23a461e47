#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ivi/kernels.hpp"
#include "ivi/scheme.hpp"

namespace ivi {

// Convolution quadrature weights for the Volterra Riccati solver. The source
// term is interpolated by hat functions on the uniform grid and convolved
// exactly against K, so each lag d carries a rising weight (toward the newer
// node) and a falling weight (toward the older node):
//   rising[d]  = (1/dt) int_{d dt}^{(d+1) dt} K(r) (r - d dt)       dr
//   falling[d] = (1/dt) int_{d dt}^{(d+1) dt} K(r) ((d+1) dt - r)   dr
// Both are nonnegative and sum to the integrated kernel panel.
struct ConvolutionWeights {
  int m = 0;
  double dt = 0.0;
  std::vector<double> rising, falling;
  std::vector<double> combined;  // combined[d] = rising[d-1] + falling[d], d >= 1

  static ConvolutionWeights build(const KernelSpec& spec, double T, int m) {
    if (m < 1) throw std::invalid_argument("ConvolutionWeights: m must be >= 1");
    ConvolutionWeights w;
    w.m = m;
    w.dt = T / m;
    w.rising.resize(m);
    w.falling.resize(m);
    const KernelWeights kw = kernel_weights(spec, T, m);
    double j_prev = 0.0;
    for (int d = 0; d < m; ++d) {
      const double j_cur = kernel_first_moment(spec, (d + 1) * w.dt);
      const double first_moment = j_cur - j_prev;  // int r K(r) over the panel
      j_prev = j_cur;
      double rise = (first_moment - d * w.dt * kw.k[d]) / w.dt;
      rise = std::min(std::max(rise, 0.0), kw.k[d]);  // clip roundoff
      w.rising[d] = rise;
      w.falling[d] = kw.k[d] - rise;
    }
    w.combined.resize(m);
    w.combined[0] = 0.0;
    for (int d = 1; d < m; ++d) w.combined[d] = w.rising[d - 1] + w.falling[d];
    return w;
  }
};

struct RiccatiSolution {
  std::vector<double> grid;                // m+1 times on [0, T]
  std::vector<std::complex<double>> psi;   // psi on the grid
  std::complex<double> exponent;           // int_0^T F(psi(T-s)) g0(s) ds
  std::complex<double> v, w;
  double max_re_clamp = 0.0;  // largest positive real part removed
};

namespace detail {

inline void check_strip(std::complex<double> v, std::complex<double> w) {
  constexpr double tol = 1e-12;
  if (w.real() > tol) throw std::domain_error("riccati: requires Re(w) <= 0");
  if (v.real() < -tol || v.real() > 1.0 + tol)
    throw std::domain_error("riccati: requires 0 <= Re(v) <= 1");
}

}  // namespace detail

// Solves psi(t) = int_0^t K(t-s) F(psi(s)) ds with
// F(u) = w + (v^2 - v)/2 + (rho c v + b) u + (c^2/2) u^2 on a uniform grid of
// m steps. The history part of the convolution uses the hat-function weights
// above; the implicit current-panel part is a scalar quadratic in psi_{i+1},
// solved exactly with the root of nonpositive real part (same selection as
// the one-step exponent psi_hat). Re psi is clamped to 0 from above, with the
// largest clamp recorded.
inline RiccatiSolution riccati_solve(const ModelParams& params, std::complex<double> v,
                                     std::complex<double> w, int m) {
  params.validate();
  detail::check_strip(v, w);
  if (m < 1) throw std::invalid_argument("riccati_solve: m must be >= 1");

  const ConvolutionWeights cw = ConvolutionWeights::build(params.kernel, params.T, m);
  const std::complex<double> w_eff = w + 0.5 * (v * v - v);
  const std::complex<double> lin = params.rho * params.c * v + params.b;
  const double c2 = params.c * params.c;
  const auto F = [&](std::complex<double> u) { return w_eff + lin * u + 0.5 * c2 * u * u; };

  RiccatiSolution sol;
  sol.v = v;
  sol.w = w;
  sol.grid.resize(m + 1);
  for (int j = 0; j <= m; ++j) sol.grid[j] = j * cw.dt;
  sol.psi.assign(m + 1, {0.0, 0.0});
  std::vector<std::complex<double>> f(m + 1);
  f[0] = F({0.0, 0.0});

  const double q = cw.falling[0];  // implicit weight
  for (int i = 0; i < m; ++i) {
    std::complex<double> h = cw.rising[i] * f[0];
    for (int d = 1; d <= i; ++d) h += cw.combined[d] * f[i + 1 - d];

    std::complex<double> psi;
    const std::complex<double> rhs = q * w_eff + h;
    if (c2 == 0.0) {
      psi = rhs / (1.0 - q * lin);
    } else {
      const std::complex<double> x = 1.0 - q * lin;
      const std::complex<double> root = std::sqrt(x * x - 2.0 * q * c2 * rhs);
      const std::complex<double> denom = x + root;
      // both branches give the root continuous with the c -> 0 limit; the
      // division-free-of-cancellation form is preferred when it is safe
      psi = std::abs(denom) > 1e-8 * (1.0 + std::abs(x)) ? 2.0 * rhs / denom
                                                         : (x - root) / (q * c2);
    }
    const std::complex<double> residual = psi - (h + q * F(psi));
    if (!(std::abs(residual) <= 1e-9 * (1.0 + std::abs(psi))))
      throw std::runtime_error("riccati_solve: implicit step lost accuracy");
    if (psi.real() > 0.0) {
      sol.max_re_clamp = std::max(sol.max_re_clamp, psi.real());
      psi = {0.0, psi.imag()};
    }
    sol.psi[i + 1] = psi;
    f[i + 1] = F(psi);
  }

  // exponent by trapezoid in F against exact g0 panel integrals, reversed grid
  const InputCurveSpec curve = params.input_curve();
  std::complex<double> acc = 0.0;
  for (int j = 0; j < m; ++j) {
    const double panel =
        g0_integral(curve, (m - 1 - j) * cw.dt, (m - j) * cw.dt);  // int over [T-t_{j+1}, T-t_j]
    acc += 0.5 * (f[j] + f[j + 1]) * panel;
  }
  sol.exponent = acc;
  return sol;
}

struct CharFnValue {
  std::complex<double> value;
  std::complex<double> v, w;
};

inline CharFnValue char_fn(const ModelParams& params, std::complex<double> v,
                           std::complex<double> w, int m = 2000) {
  const RiccatiSolution sol = riccati_solve(params, v, w, m);
  return CharFnValue{std::exp(sol.exponent), v, w};
}

inline double laplace_U(const ModelParams& params, double w, int m = 2000) {
  if (w > 0.0) throw std::domain_error("laplace_U: requires w <= 0");
  const CharFnValue cf = char_fn(params, {0.0, 0.0}, {w, 0.0}, m);
  if (!(std::abs(cf.value.imag()) <= 1e-12 * std::max(1.0, std::abs(cf.value.real()))))
    throw std::runtime_error("laplace_U: non-negligible imaginary part");
  return cf.value.real();
}

}  // namespace ivi
