#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ivi/igdist.hpp"
#include "ivi/kernels.hpp"
#include "ivi/rng.hpp"

namespace ivi {

// Model parameters of the Volterra square-root / Volterra Heston dynamics.
struct ModelParams {
  double a = 0.0;    // input-curve slope weight
  double V0 = 0.0;   // input-curve level
  double b = 0.0;    // linear drift coefficient, b <= 0
  double c = 0.0;    // vol-of-vol, c >= 0
  double rho = 0.0;  // price-variance correlation
  KernelSpec kernel;
  double T = 1.0;
  double S0 = 1.0;

  void validate() const {
    if (!(a >= 0.0)) throw std::invalid_argument("ModelParams: a must be nonnegative");
    if (!(V0 >= 0.0)) throw std::invalid_argument("ModelParams: V0 must be nonnegative");
    if (!(b <= 0.0)) throw std::invalid_argument("ModelParams: b must be nonpositive");
    if (!(c >= 0.0)) throw std::invalid_argument("ModelParams: c must be nonnegative");
    if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("ModelParams: |rho| must be <= 1");
    if (!(T > 0.0)) throw std::invalid_argument("ModelParams: T must be positive");
    if (!(S0 > 0.0)) throw std::invalid_argument("ModelParams: S0 must be positive");
  }

  InputCurveSpec input_curve() const { return InputCurveSpec{V0, a, kernel}; }
};

// The four benchmark parameter sets (fractional kernel, beta = 1/Gamma(H+1/2),
// T = 1, S0 = 1).
inline ModelParams table_case(int id) {
  ModelParams p;
  p.rho = -0.7;
  p.T = 1.0;
  p.S0 = 1.0;
  switch (id) {
    case 1:
      p.a = 0.02; p.b = -0.3; p.c = 0.3; p.V0 = 0.02;
      p.kernel = KernelSpec::shifted_fractional(0.1, 0.0);
      break;
    case 2:
      p.a = 0.04; p.b = 0.0; p.c = 0.7; p.V0 = 0.02;
      p.kernel = KernelSpec::shifted_fractional(0.1, 0.0);
      break;
    case 3:
      p.a = 0.04; p.b = 0.0; p.c = 0.7; p.V0 = 0.02;
      p.kernel = KernelSpec::shifted_fractional(-0.3, 0.0);
      break;
    case 4:
      p.a = 0.04; p.b = 0.0; p.c = 0.9; p.V0 = 0.06;
      p.kernel = KernelSpec::shifted_fractional(0.0, 1.0 / 52.0);
      break;
    default:
      throw std::invalid_argument("table_case: id must be in 1..4");
  }
  return p;
}

enum class SchemeKind { iVi, Explicit };

/// Everything shared by all paths of one discretization: integrated kernel
// weights, exact input-curve panel integrals, and the derived step constants.
// The drift-eliminated variant swaps in the resolvent kernel and transformed
// curve and sets the effective drift to zero; the recursion is unchanged.
struct PreparedScheme {
  ModelParams params;
  int n = 0;
  double dt = 0.0;
  std::vector<double> k;         // integrated kernel panel weights
  std::vector<double> g0_panel;  // int_{t_i}^{t_{i+1}} g0
  double b_eff = 0.0;
  double k0 = 0.0;
  double one_minus_bk0 = 1.0;
  double ck0 = 0.0;
  double clamp_floor = 0.0;  // alpha below this raises, in [floor, 0) clamps
  bool resolvent = false;
};

inline PreparedScheme prepare_scheme(const ModelParams& params, int n, bool resolvent = false) {
  params.validate();
  if (n < 1) throw std::invalid_argument("prepare_scheme: n must be >= 1");
  PreparedScheme s;
  s.params = params;
  s.n = n;
  s.dt = params.T / n;
  s.resolvent = resolvent;
  if (!resolvent) {
    s.k = kernel_weights(params.kernel, params.T, n).k;
    s.b_eff = params.b;
    const InputCurveSpec curve = params.input_curve();
    s.g0_panel.resize(n);
    for (int i = 0; i < n; ++i) s.g0_panel[i] = g0_integral(curve, i * s.dt, (i + 1) * s.dt);
  } else {
    const ResolventKernel res = resolvent_kernel(params.kernel, params.b);
    s.k = res.weights(params.T, n).k;
    s.b_eff = 0.0;
    // transformed curve: g0~(t) = V0 + (V0 b + a) int_0^t R^b / b, whose panel
    // integrals come from the second antiderivative of the resolvent
    s.g0_panel.resize(n);
    const double slope = params.V0 * params.b + params.a;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
      const double cur = res.double_integral((i + 1) * s.dt);
      s.g0_panel[i] = params.V0 * s.dt + slope * (cur - prev);
      prev = cur;
    }
  }
  s.k0 = s.k[0];
  s.one_minus_bk0 = 1.0 - s.b_eff * s.k0;
  s.ck0 = params.c * s.k0;
  double total = 0.0;
  for (double g : s.g0_panel) total += g;
  s.clamp_floor = -1e-12 * std::max(1.0, total);
  return s;
}

// Per-path recursion state. mix[j] caches b U_j + c Z_j so each alpha is one
// inner product with the weight tail.
struct PathState {
  const PreparedScheme* scheme = nullptr;
  int i = 0;
  std::vector<double> u_inc, z_inc, mix;
  double u_total = 0.0, z_total = 0.0;
  double logS = 0.0;

  // Workspace-lifetime diagnostics: survive reset() so a driver can report
  // the worst alpha and clamp count over every path run on this state.
  double min_raw_alpha = std::numeric_limits<double>::infinity();
  std::int64_t clamp_events = 0;

  explicit PathState(const PreparedScheme& s) : scheme(&s) { reset(); }

  void reset() {
    i = 0;
    u_inc.assign(scheme->n, 0.0);
    z_inc.assign(scheme->n, 0.0);
    mix.assign(scheme->n, 0.0);
    u_total = z_total = 0.0;
    logS = std::log(scheme->params.S0);
  }

  void clear_diagnostics() {
    min_raw_alpha = std::numeric_limits<double>::infinity();
    clamp_events = 0;
  }
};

// alpha_i = int_{t_i}^{t_{i+1}} g0 + sum_{j<i} k_{i-j} (b U_j + c Z_j), unclamped
inline double alpha_raw(const PathState& st) {
  const PreparedScheme& s = *st.scheme;
  double acc = s.g0_panel[st.i];
  for (int j = 0; j < st.i; ++j) acc += s.k[st.i - j] * st.mix[j];
  return acc;
}

// iVi alpha: clamps roundoff negatives to 0, rejects real violations
inline double alpha_next(PathState& st) {
  const double alpha = alpha_raw(st);
  st.min_raw_alpha = std::min(st.min_raw_alpha, alpha);
  if (alpha >= 0.0) return alpha;
  if (alpha >= st.scheme->clamp_floor) {
    ++st.clamp_events;
    return 0.0;
  }
  throw std::runtime_error("alpha_next: nonnegativity violated beyond roundoff");
}

struct StepDraws {
  double ig_normal = 0.0;
  double ig_uniform = 0.0;
  double price_normal = 0.0;
};

namespace detail {

inline void record_step(PathState& st, double u, double z) {
  const PreparedScheme& s = *st.scheme;
  st.u_inc[st.i] = u;
  st.z_inc[st.i] = z;
  st.mix[st.i] = s.b_eff * u + s.params.c * z;
  st.u_total += u;
  st.z_total += z;
  ++st.i;
}

}  // namespace detail

// One iVi step: draw the integrated-variance increment from
// IG(alpha/(1-b k0), (alpha/(c k0))^2) and recover the martingale increment
// from the exact linear relation.
inline void ivi_step(PathState& st, double alpha, const StepDraws& d) {
  const PreparedScheme& s = *st.scheme;
  double u, z;
  if (alpha == 0.0) {
    u = 0.0;
    z = 0.0;
  } else if (s.params.c == 0.0) {
    u = alpha / s.one_minus_bk0;
    z = 0.0;
  } else {
    const double ratio = alpha / s.ck0;
    const double lambda = ratio * ratio;
    if (lambda == 0.0) {  // alpha below sqrt of double underflow: treat as Dirac
      u = 0.0;
      z = 0.0;
    } else {
      u = ig_sample(IGParams{alpha / s.one_minus_bk0, lambda}, d.ig_normal, d.ig_uniform);
      z = (s.one_minus_bk0 * u - alpha) / s.ck0;
    }
  }
  detail::record_step(st, u, z);
}

// Explicit benchmark step: clip alpha at zero, Gaussian increment
inline void explicit_step(PathState& st, double alpha, const StepDraws& d) {
  const double u = alpha > 0.0 ? alpha : 0.0;
  detail::record_step(st, u, std::sqrt(u) * d.ig_normal);
}

// Log-price update of the Volterra Heston extension
inline void heston_step(PathState& st, double u, double z, double price_normal) {
  const double rho = st.scheme->params.rho;
  st.logS += -0.5 * u + rho * z + std::sqrt(1.0 - rho * rho) * std::sqrt(u) * price_normal;
}

struct PathResult {
  double u_total = 0.0;
  double z_total = 0.0;
  double logS_T = 0.0;
  std::optional<std::vector<std::pair<double, double>>> increments;  // (U, Z) per step
};

// Runs one full path. The sink receives (step, U, Z, logS) after each step.
struct NoSink {
  void operator()(int, double, double, double) const {}
};

template <class Sink = NoSink>
PathResult run_path(PathState& st, SchemeKind kind, bool with_price, const rng::PathStream& stream,
                    Sink&& sink = Sink{}) {
  st.reset();
  const int n = st.scheme->n;
  for (int i = 0; i < n; ++i) {
    const auto step = static_cast<std::uint32_t>(i);
    StepDraws d;
    if (kind == SchemeKind::iVi) {
      const double alpha = alpha_next(st);
      if (alpha > 0.0 && st.scheme->params.c != 0.0) {
        d.ig_normal = stream.normal(step, rng::PathStream::IgNormal);
        d.ig_uniform = stream.uniform(step, rng::PathStream::IgUniform);
      }
      ivi_step(st, alpha, d);
    } else {
      d.ig_normal = stream.normal(step, rng::PathStream::IgNormal);
      explicit_step(st, alpha_raw(st), d);
    }
    if (with_price) {
      const double u = st.u_inc[i], z = st.z_inc[i];
      heston_step(st, u, z, u > 0.0 ? stream.normal(step, rng::PathStream::PriceNormal) : 0.0);
    }
    sink(i, st.u_inc[i], st.z_inc[i], st.logS);
  }
  return PathResult{st.u_total, st.z_total, st.logS, std::nullopt};
}

inline PathResult simulate_path(const ModelParams& params, int n, const rng::PathStream& stream,
                                SchemeKind kind, bool with_price, bool keep_increments = false) {
  const PreparedScheme prepared = prepare_scheme(params, n);
  PathState st(prepared);
  PathResult r = run_path(st, kind, with_price, stream);
  if (keep_increments) {
    std::vector<std::pair<double, double>> inc(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) inc[i] = {st.u_inc[i], st.z_inc[i]};
    r.increments = std::move(inc);
  }
  return r;
}

// One-step conditional Laplace/characteristic exponent: psi_hat is the
// nonpositive root of psi = k0 w + k0 b psi + (k0 c^2 / 2) psi^2, and the
// one-step increment satisfies E[exp(w U_hat)] = exp(psi_hat alpha0 / k0).
inline std::complex<double> one_step_psi_hat(const PreparedScheme& s, std::complex<double> w) {
  if (w.real() > 0.0) throw std::domain_error("one_step_psi_hat: requires Re(w) <= 0");
  const double c = s.params.c;
  if (c == 0.0) return s.k0 * w / s.one_minus_bk0;
  const std::complex<double> disc =
      s.one_minus_bk0 * s.one_minus_bk0 - 2.0 * w * c * c * s.k0 * s.k0;
  return (s.one_minus_bk0 - std::sqrt(disc)) / (c * c * s.k0);
}

inline std::complex<double> one_step_psi_residual(const PreparedScheme& s,
                                                  std::complex<double> psi,
                                                  std::complex<double> w) {
  const double c = s.params.c;
  return psi - s.k0 * w - s.k0 * s.b_eff * psi - 0.5 * s.k0 * c * c * psi * psi;
}

struct OneStepCharCheck {
  std::complex<double> mc;     // Monte Carlo mean of exp(w U_{0,1})
  std::complex<double> exact;  // exp(psi_hat alpha0 / k0)
  double se = 0.0;             // combined SE of the real and imaginary parts
  double psi_residual = 0.0;
};

inline OneStepCharCheck one_step_char_check(const ModelParams& params, int n,
                                            std::complex<double> w, std::int64_t paths,
                                            std::uint64_t seed) {
  if (paths < 1) throw std::invalid_argument("one_step_char_check: paths must be >= 1");
  const PreparedScheme s = prepare_scheme(params, n);
  const std::complex<double> psi = one_step_psi_hat(s, w);
  const double alpha0 = s.g0_panel[0];
  OneStepCharCheck out;
  out.exact = std::exp(psi * alpha0 / s.k0);
  out.psi_residual = std::abs(one_step_psi_residual(s, psi, w));

  PathState st(s);
  double sr = 0.0, si = 0.0, srr = 0.0, sii = 0.0;
  for (std::int64_t p = 0; p < paths; ++p) {
    rng::PathStream stream{seed, static_cast<std::uint64_t>(p), false};
    StepDraws d;
    st.reset();
    const double alpha = alpha_next(st);
    if (alpha > 0.0 && params.c != 0.0) {
      d.ig_normal = stream.normal(0, rng::PathStream::IgNormal);
      d.ig_uniform = stream.uniform(0, rng::PathStream::IgUniform);
    }
    ivi_step(st, alpha, d);
    const std::complex<double> val = std::exp(w * st.u_inc[0]);
    sr += val.real();
    si += val.imag();
    srr += val.real() * val.real();
    sii += val.imag() * val.imag();
  }
  const double np = static_cast<double>(paths);
  out.mc = {sr / np, si / np};
  if (paths > 1) {
    const double vr = (srr - np * out.mc.real() * out.mc.real()) / (np - 1.0);
    const double vi = (sii - np * out.mc.imag() * out.mc.imag()) / (np - 1.0);
    out.se = std::sqrt((std::max(vr, 0.0) + std::max(vi, 0.0)) / np);
  }
  return out;
}

}  // namespace ivi
