#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ivi/math/gamma.hpp"
#include "ivi/math/mittag_leffler.hpp"
#include "ivi/math/quadrature.hpp"

namespace ivi {

enum class KernelFamily { ShiftedFractional, FractionalPower, ExpSum, Constant };

struct ExpTerm {
  double c = 0.0;  // weight
  double x = 0.0;  // decay rate
};

// Kernel K on (0, infinity). The fractional families are K(t) = beta (eps+t)^{H-1/2}
// with the unshifted one singular at 0 for H < 1/2; ExpSum is a completely
// monotone sum of exponentials; Constant is K = beta.
struct KernelSpec {
  KernelFamily family = KernelFamily::Constant;
  double beta = 1.0;
  double H = 0.5;
  double epsilon = 0.0;
  std::vector<ExpTerm> exp_terms;

  static KernelSpec shifted_fractional(double H, double epsilon, double beta = 0.0) {
    if (!(epsilon >= 0.0))
      throw std::invalid_argument("KernelSpec: epsilon must be nonnegative");
    if (epsilon == 0.0 && !(H > -0.5))
      throw std::invalid_argument("KernelSpec: H must exceed -1/2 when epsilon = 0");
    if (!(H <= 0.5)) throw std::invalid_argument("KernelSpec: H must be at most 1/2");
    if (beta == 0.0 && !(H > -0.5))
      throw std::invalid_argument(
          "KernelSpec: default beta = 1/Gamma(H + 1/2) needs H > -1/2; pass beta explicitly");
    KernelSpec s;
    s.family = KernelFamily::ShiftedFractional;
    s.H = H;
    s.epsilon = epsilon;
    s.beta = beta > 0.0 ? beta : 1.0 / math::gamma_fn(H + 0.5);
    if (!(s.beta > 0.0)) throw std::invalid_argument("KernelSpec: beta must be positive");
    return s;
  }

  static KernelSpec fractional_power(double H, double beta = 0.0) {
    KernelSpec s = shifted_fractional(H, 0.0, beta);
    s.family = KernelFamily::FractionalPower;
    return s;
  }

  static KernelSpec constant(double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("KernelSpec: beta must be positive");
    KernelSpec s;
    s.family = KernelFamily::Constant;
    s.beta = beta;
    return s;
  }

  static KernelSpec exp_sum(std::vector<ExpTerm> terms) {
    for (const auto& t : terms)
      if (!(t.c >= 0.0) || !(t.x >= 0.0))
        throw std::invalid_argument("KernelSpec: ExpSum needs c_i >= 0 and x_i >= 0");
    KernelSpec s;
    s.family = KernelFamily::ExpSum;
    s.exp_terms = std::move(terms);
    return s;
  }

  bool fractional() const {
    return family == KernelFamily::ShiftedFractional || family == KernelFamily::FractionalPower;
  }
  bool singular_at_zero() const { return fractional() && epsilon == 0.0 && H < 0.5; }
};

namespace detail {

// ((eps+t1)^p - (eps+t0)^p) / p, written through expm1 so nearby arguments do
// not cancel; handles the p -> 0 shifted limit (log) as well.
inline double power_panel(double eps, double t0, double t1, double p) {
  const double x0 = eps + t0, x1 = eps + t1;
  if (p == 0.0) return std::log(x1 / x0);
  if (x0 == 0.0) return std::pow(x1, p) / p;
  return std::pow(x0, p) * std::expm1(p * std::log(x1 / x0)) / p;
}

inline double one_minus_exp(double x) { return -std::expm1(-x); }  // 1 - e^{-x}

// 1 - (1+x) e^{-x}, stable for small x
inline double one_minus_1px_exp(double x) {
  if (std::abs(x) < 1e-4) return x * x * (0.5 - x / 3.0 + x * x / 8.0);
  return 1.0 - (1.0 + x) * std::exp(-x);
}

}  // namespace detail

inline double kernel_eval(const KernelSpec& spec, double t) {
  if (spec.singular_at_zero() && !(t > 0.0))
    throw std::domain_error("kernel_eval: singular kernel requires t > 0");
  if (!(t >= 0.0)) throw std::domain_error("kernel_eval: requires t >= 0");
  switch (spec.family) {
    case KernelFamily::Constant:
      return spec.beta;
    case KernelFamily::ExpSum: {
      double acc = 0.0;
      for (const auto& term : spec.exp_terms) acc += term.c * std::exp(-term.x * t);
      return acc;
    }
    default:
      return spec.beta * std::pow(spec.epsilon + t, spec.H - 0.5);
  }
}

// int_0^t K
inline double kernel_integral(const KernelSpec& spec, double t) {
  if (!(t >= 0.0)) throw std::domain_error("kernel_integral: requires t >= 0");
  switch (spec.family) {
    case KernelFamily::Constant:
      return spec.beta * t;
    case KernelFamily::ExpSum: {
      double acc = 0.0;
      for (const auto& term : spec.exp_terms)
        acc += term.x == 0.0 ? term.c * t : term.c / term.x * detail::one_minus_exp(term.x * t);
      return acc;
    }
    default:
      return spec.beta * detail::power_panel(spec.epsilon, 0.0, t, spec.H + 0.5);
  }
}

// int_0^t int_0^s K(u) du ds
inline double kernel_double_integral(const KernelSpec& spec, double t) {
  if (!(t >= 0.0)) throw std::domain_error("kernel_double_integral: requires t >= 0");
  switch (spec.family) {
    case KernelFamily::Constant:
      return 0.5 * spec.beta * t * t;
    case KernelFamily::ExpSum: {
      double acc = 0.0;
      for (const auto& term : spec.exp_terms)
        acc += term.x == 0.0 ? 0.5 * term.c * t * t
                             : term.c / term.x * (t - detail::one_minus_exp(term.x * t) / term.x);
      return acc;
    }
    default: {
      const double p = spec.H + 0.5;
      const double eps = spec.epsilon;
      if (p == 0.0)  // H = -1/2 with shift: K = beta/(eps+s)
        return spec.beta * ((eps + t) * std::log((eps + t) / eps) - t);
      return spec.beta / p *
             (detail::power_panel(eps, 0.0, t, p + 1.0) -
              (eps == 0.0 ? 0.0 : std::pow(eps, p) * t));
    }
  }
}

// int_0^t s K(s) ds (used by product-trapezoid convolution weights)
inline double kernel_first_moment(const KernelSpec& spec, double t) {
  if (!(t >= 0.0)) throw std::domain_error("kernel_first_moment: requires t >= 0");
  switch (spec.family) {
    case KernelFamily::Constant:
      return 0.5 * spec.beta * t * t;
    case KernelFamily::ExpSum: {
      double acc = 0.0;
      for (const auto& term : spec.exp_terms)
        acc += term.x == 0.0 ? 0.5 * term.c * t * t
                             : term.c / (term.x * term.x) * detail::one_minus_1px_exp(term.x * t);
      return acc;
    }
    default: {
      // s (eps+s)^{H-1/2} = (eps+s)^{H+1/2} - eps (eps+s)^{H-1/2}
      const double p = spec.H + 0.5;
      return spec.beta * (detail::power_panel(spec.epsilon, 0.0, t, p + 1.0) -
                          spec.epsilon * detail::power_panel(spec.epsilon, 0.0, t, p));
    }
  }
}

struct KernelWeights {
  int n = 0;
  double T = 0.0;
  std::vector<double> k;  // k[l] = int_0^{T/n} K(l T/n + s) ds
};

inline KernelWeights kernel_weights(const KernelSpec& spec, double T, int n) {
  if (n < 1) throw std::invalid_argument("kernel_weights: n must be >= 1");
  if (!(T > 0.0)) throw std::invalid_argument("kernel_weights: T must be positive");
  KernelWeights w{n, T, std::vector<double>(static_cast<std::size_t>(n))};
  const double dt = T / n;
  switch (spec.family) {
    case KernelFamily::Constant:
      for (int l = 0; l < n; ++l) w.k[l] = spec.beta * dt;
      break;
    case KernelFamily::ExpSum:
      for (int l = 0; l < n; ++l) {
        double acc = 0.0;
        for (const auto& term : spec.exp_terms)
          acc += term.x == 0.0 ? term.c * dt
                               : term.c / term.x * std::exp(-term.x * l * dt) *
                                     detail::one_minus_exp(term.x * dt);
        w.k[l] = acc;
      }
      break;
    default: {
      const double p = spec.H + 0.5;
      for (int l = 0; l < n; ++l)
        w.k[l] = spec.beta * detail::power_panel(spec.epsilon, l * dt, (l + 1) * dt, p);
      break;
    }
  }
  return w;
}

// Quadrature fallback for the same panel integrals: 64-node Gauss-Legendre,
// with the substitution s = u^{1/(H+1/2)} on the first panel when the kernel
// is singular at 0.
inline KernelWeights kernel_weights_quadrature(const KernelSpec& spec, double T, int n) {
  if (n < 1) throw std::invalid_argument("kernel_weights_quadrature: n must be >= 1");
  if (!(T > 0.0)) throw std::invalid_argument("kernel_weights_quadrature: T must be positive");
  KernelWeights w{n, T, std::vector<double>(static_cast<std::size_t>(n))};
  const double dt = T / n;
  for (int l = 0; l < n; ++l) {
    if (l == 0 && spec.singular_at_zero()) {
      const double p = spec.H + 0.5;
      w.k[0] = math::gl64(
          [&](double u) {
            const double s = std::pow(u, 1.0 / p);
            return kernel_eval(spec, s) * s / (p * u);
          },
          0.0, std::pow(dt, p));
    } else {
      w.k[l] = math::gl64([&](double s) { return kernel_eval(spec, s); }, l * dt, (l + 1) * dt);
    }
  }
  return w;
}

// Input curve g0(t) = V0 + a int_0^t K.
struct InputCurveSpec {
  double V0 = 0.0;
  double a = 0.0;
  KernelSpec kernel;

  InputCurveSpec() = default;
  InputCurveSpec(double V0_, double a_, KernelSpec kernel_)
      : V0(V0_), a(a_), kernel(std::move(kernel_)) {
    if (!(V0 >= 0.0) || !(a >= 0.0))
      throw std::invalid_argument("InputCurveSpec: V0 and a must be nonnegative");
  }
};

inline double g0_eval(const InputCurveSpec& curve, double t) {
  return curve.V0 + curve.a * kernel_integral(curve.kernel, t);
}

// int_s^t g0(u) du, exact through the double-integrated kernel
inline double g0_integral(const InputCurveSpec& curve, double s, double t) {
  if (!(0.0 <= s) || !(s <= t)) throw std::invalid_argument("g0_integral: requires 0 <= s <= t");
  return curve.V0 * (t - s) +
         curve.a * (kernel_double_integral(curve.kernel, t) - kernel_double_integral(curve.kernel, s));
}

// Drift-eliminated transform. resolvent(spec, b) evaluates the kernel
// R^b / b, where R^b is the resolvent of the second kind of b K, together
// with its first and second antiderivatives; R^b / b -> K as b -> 0. Closed
// forms exist for the constant kernel (exponential) and the unshifted
// fractional kernel (Mittag-Leffler).
struct ResolventKernel {
  KernelSpec base;
  double b = 0.0;

  double eval(double t) const {
    check_t(t, true);
    if (base.family == KernelFamily::Constant) {
      return base.beta * std::exp(b * base.beta * t);
    }
    const double p = base.H + 0.5;
    const double scale = base.beta * math::gamma_fn(p);
    return scale * std::pow(t, p - 1.0) * mittag_leffler(p, p, b * scale * std::pow(t, p));
  }

  // int_0^t R^b / b
  double integral(double t) const {
    check_t(t, false);
    if (base.family == KernelFamily::Constant) {
      const double x = b * base.beta * t;
      return b == 0.0 ? base.beta * t : std::expm1(x) / b;
    }
    const double p = base.H + 0.5;
    const double scale = base.beta * math::gamma_fn(p);
    return scale * std::pow(t, p) * mittag_leffler(p, p + 1.0, b * scale * std::pow(t, p));
  }

  // int_0^t int_0^s R^b / b du ds
  double double_integral(double t) const {
    check_t(t, false);
    if (base.family == KernelFamily::Constant) {
      const double x = b * base.beta * t;
      if (std::abs(x) < 1e-4)
        return base.beta * t * t * (0.5 + x / 6.0 + x * x / 24.0);
      return (std::expm1(x) - x) / (b * b * base.beta);
    }
    const double p = base.H + 0.5;
    const double scale = base.beta * math::gamma_fn(p);
    return scale * std::pow(t, p + 1.0) * mittag_leffler(p, p + 2.0, b * scale * std::pow(t, p));
  }

  KernelWeights weights(double T, int n) const {
    if (n < 1) throw std::invalid_argument("ResolventKernel: n must be >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("ResolventKernel: T must be positive");
    KernelWeights w{n, T, std::vector<double>(static_cast<std::size_t>(n))};
    const double dt = T / n;
    double prev = 0.0;
    for (int l = 0; l < n; ++l) {
      const double cur = integral((l + 1) * dt);
      w.k[l] = cur - prev;
      prev = cur;
    }
    return w;
  }

 private:
  void check_t(double t, bool strict) const {
    if (strict && base.fractional() && !(t > 0.0))
      throw std::domain_error("ResolventKernel: singular kernel requires t > 0");
    if (!(t >= 0.0)) throw std::domain_error("ResolventKernel: requires t >= 0");
  }
};

inline ResolventKernel resolvent_kernel(const KernelSpec& spec, double b) {
  if (!(b <= 0.0)) throw std::invalid_argument("resolvent_kernel: requires b <= 0");
  const bool supported =
      spec.family == KernelFamily::Constant || (spec.fractional() && spec.epsilon == 0.0);
  if (!supported)
    throw std::invalid_argument(
        "resolvent_kernel: closed form only for Constant and unshifted fractional kernels");
  return ResolventKernel{spec, b};
}

}  // namespace ivi
