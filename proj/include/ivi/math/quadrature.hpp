#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <numbers>
#include <stdexcept>

namespace ivi::math {

// 64-node Gauss-Legendre rule on [-1, 1]; nodes from Newton iteration on P_64,
// computed once and cached.
struct GaussLegendre64 {
  std::array<double, 64> nodes;
  std::array<double, 64> weights;

  static const GaussLegendre64& instance() {
    static const GaussLegendre64 rule = compute();
    return rule;
  }

 private:
  static GaussLegendre64 compute() {
    GaussLegendre64 r{};
    constexpr int n = 64;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        // Legendre recurrence for P_n(x) and P'_n(x)
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      r.nodes[i] = x;
      r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  }
};

template <std::invocable<double> F>
double gl64(F&& f, double a, double b) {
  const auto& rule = GaussLegendre64::instance();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < 64; ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return acc * half;
}

// 15-point Gauss-Kronrod pair (embedded 7-point Gauss) on [-1, 1].
namespace gk15 {
inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
}  // namespace gk15

struct QuadResult {
  double value;
  double error;  // estimated absolute error
};

template <std::invocable<double> F>
QuadResult gk15_panel(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const double fc = f(mid);
  double resg = fc * gk15::wg[3];
  double resk = fc * gk15::wgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * gk15::xgk[j];
    const double fsum = f(mid - dx) + f(mid + dx);
    resk += gk15::wgk[j] * fsum;
    if (j % 2 == 1) resg += gk15::wg[j / 2] * fsum;
  }
  return {resk * half, std::abs((resk - resg) * half)};
}

// Adaptive bisection on a Gauss-Kronrod panel; deterministic recursion order,
// tolerance split between halves so the total error stays below abs_tol.
template <std::invocable<double> F>
double adaptive_gk(F&& f, double a, double b, double abs_tol, int max_depth = 18) {
  struct Rec {
    F& fn;
    double run(double lo, double hi, double tol, int depth) const {
      const auto r = gk15_panel(fn, lo, hi);
      if (r.error <= tol || depth <= 0) {
        if (depth <= 0 && r.error > 64.0 * tol)
          throw std::runtime_error("adaptive_gk: quadrature failed to converge");
        return r.value;
      }
      const double mid = 0.5 * (lo + hi);
      return run(lo, mid, 0.5 * tol, depth - 1) + run(mid, hi, 0.5 * tol, depth - 1);
    }
  };
  Rec rec{f};
  return rec.run(a, b, abs_tol, max_depth);
}

}  // namespace ivi::math
