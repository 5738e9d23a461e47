#include <catch_amalgamated.hpp>

#include <cmath>

#include "ivi/scheme.hpp"

using Catch::Approx;
using namespace ivi;

TEST_CASE("parameter presets") {
  const ModelParams p1 = table_case(1);
  CHECK(p1.a == 0.02);
  CHECK(p1.b == -0.3);
  CHECK(p1.c == 0.3);
  CHECK(p1.V0 == 0.02);
  CHECK(p1.rho == -0.7);
  CHECK(p1.kernel.H == 0.1);
  CHECK(p1.kernel.epsilon == 0.0);
  CHECK(p1.T == 1.0);
  CHECK(p1.S0 == 1.0);

  const ModelParams p3 = table_case(3);
  CHECK(p3.a == 0.04);
  CHECK(p3.b == 0.0);
  CHECK(p3.c == 0.7);
  CHECK(p3.kernel.H == -0.3);

  const ModelParams p4 = table_case(4);
  CHECK(p4.c == 0.9);
  CHECK(p4.V0 == 0.06);
  CHECK(p4.kernel.H == 0.0);
  CHECK(p4.kernel.epsilon == Approx(1.0 / 52.0).epsilon(1e-16));

  CHECK_THROWS_AS(table_case(0), std::invalid_argument);
  CHECK_THROWS_AS(table_case(5), std::invalid_argument);
}

TEST_CASE("model parameter validation") {
  ModelParams p = table_case(2);
  CHECK_NOTHROW(p.validate());
  p.b = 0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = table_case(2);
  p.rho = -1.2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = table_case(2);
  p.c = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = table_case(2);
  p.T = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("prepared scheme assembles weights and panel integrals") {
  const ModelParams p = table_case(1);
  const int n = 10;
  const PreparedScheme s = prepare_scheme(p, n);
  const auto w = kernel_weights(p.kernel, p.T, n);
  for (int l = 0; l < n; ++l) CHECK(s.k[l] == w.k[l]);
  CHECK(s.k0 == w.k[0]);
  CHECK(s.one_minus_bk0 == Approx(1.0 - p.b * s.k0).epsilon(1e-16));
  CHECK(s.ck0 == Approx(p.c * s.k0).epsilon(1e-16));
  double g_total = 0.0;
  for (double g : s.g0_panel) g_total += g;
  CHECK(g_total == Approx(g0_integral(p.input_curve(), 0.0, p.T)).epsilon(1e-12));
  CHECK(s.clamp_floor < 0.0);
  CHECK(s.clamp_floor == Approx(-1e-12).epsilon(1e-10));  // sum(g0) < 1 here

  const PreparedScheme one = prepare_scheme(p, 1);
  CHECK(one.k[0] == Approx(kernel_integral(p.kernel, p.T)).epsilon(1e-14));
  CHECK(one.g0_panel[0] == Approx(g0_integral(p.input_curve(), 0.0, p.T)).epsilon(1e-14));
}

TEST_CASE("alpha recursion matches an independent flat-kernel accumulator") {
  // constant kernel: k_l = beta dt for every l, so
  // alpha_i = int g0 + beta dt sum_{j<i} (b U_j + c Z_j) can be tracked directly
  ModelParams p;
  p.a = 0.1;
  p.V0 = 0.04;
  p.b = -0.4;
  p.c = 0.5;
  p.rho = -0.3;
  p.kernel = KernelSpec::constant(1.3);
  const int n = 12;
  const PreparedScheme s = prepare_scheme(p, n);
  PathState st(s);
  st.reset();
  const rng::PathStream stream{2024, 3, false};
  double running_mix = 0.0;
  for (int i = 0; i < n; ++i) {
    const double expected = s.g0_panel[i] + 1.3 * s.dt * running_mix;
    CHECK(alpha_raw(st) == Approx(expected).margin(1e-14));
    const double alpha = alpha_next(st);
    StepDraws d;
    if (alpha > 0.0) {
      d.ig_normal = stream.normal(i, rng::PathStream::IgNormal);
      d.ig_uniform = stream.uniform(i, rng::PathStream::IgUniform);
    }
    ivi_step(st, alpha, d);
    running_mix += p.b * st.u_inc[i] + p.c * st.z_inc[i];
  }
}

TEST_CASE("martingale increment satisfies its defining linear relation") {
  const PreparedScheme s = prepare_scheme(table_case(1), 8);
  PathState st(s);
  st.reset();
  const rng::PathStream stream{7, 11, false};
  for (int i = 0; i < 8; ++i) {
    const double alpha = alpha_next(st);
    StepDraws d{stream.normal(i, 0), stream.uniform(i, 1), 0.0};
    ivi_step(st, alpha, d);
    CHECK(st.z_inc[i] ==
          Approx((s.one_minus_bk0 * st.u_inc[i] - alpha) / s.ck0).margin(1e-15));
    CHECK(st.u_inc[i] >= 0.0);
  }
}

TEST_CASE("driftless variance makes the martingale increments centered") {
  const PreparedScheme s = prepare_scheme(table_case(2), 8);  // b = 0
  PathState st(s);
  const int paths = 20000;
  double s1 = 0.0, s2 = 0.0;
  for (int p = 0; p < paths; ++p) {
    const PathResult r = run_path(st, SchemeKind::iVi, false, {5, std::uint64_t(p), false});
    s1 += r.z_total;
    s2 += r.z_total * r.z_total;
  }
  const double mean = s1 / paths;
  const double se = std::sqrt((s2 / paths - mean * mean) / paths);
  CHECK(std::abs(mean) < 4.0 * se);
}

TEST_CASE("deterministic limit c = 0 short-circuits the draw") {
  ModelParams p = table_case(2);
  p.c = 0.0;
  const PreparedScheme s = prepare_scheme(p, 4);
  PathState st(s);
  const PathResult r = run_path(st, SchemeKind::iVi, false, {1, 0, false});
  double expected = 0.0;
  for (int i = 0; i < 4; ++i) expected += s.g0_panel[i];  // b = 0: U = alpha directly
  CHECK(r.u_total == Approx(expected).epsilon(1e-14));
  CHECK(r.z_total == 0.0);
}

TEST_CASE("explicit benchmark clips negatives and scales the Gaussian") {
  const PreparedScheme s = prepare_scheme(table_case(2), 4);
  PathState st(s);
  st.reset();
  explicit_step(st, -0.03, StepDraws{1.7, 0.0, 0.0});
  CHECK(st.u_inc[0] == 0.0);
  CHECK(st.z_inc[0] == 0.0);
  explicit_step(st, 0.04, StepDraws{1.0, 0.0, 0.0});
  CHECK(st.u_inc[1] == Approx(0.04).epsilon(1e-16));
  CHECK(st.z_inc[1] == Approx(0.2).epsilon(1e-15));
}

TEST_CASE("log-price update composes the three increments") {
  const PreparedScheme s = prepare_scheme(table_case(1), 4);  // rho = -0.7
  PathState st(s);
  st.reset();
  const double logS0 = st.logS;
  heston_step(st, 0.04, 0.2, 0.5);
  const double expected =
      -0.5 * 0.04 + (-0.7) * 0.2 + std::sqrt(1.0 - 0.49) * std::sqrt(0.04) * 0.5;
  CHECK(st.logS - logS0 == Approx(expected).epsilon(1e-15));
}

TEST_CASE("paths are bitwise reproducible") {
  const PreparedScheme s = prepare_scheme(table_case(3), 16);
  PathState st(s);
  const rng::PathStream stream{31, 9, false};
  const PathResult r1 = run_path(st, SchemeKind::iVi, true, stream);
  const PathResult r2 = run_path(st, SchemeKind::iVi, true, stream);
  CHECK(r1.u_total == r2.u_total);
  CHECK(r1.z_total == r2.z_total);
  CHECK(r1.logS_T == r2.logS_T);
}

TEST_CASE("zero input curve freezes the whole path") {
  ModelParams p = table_case(2);
  p.a = 0.0;
  p.V0 = 0.0;
  const PreparedScheme s = prepare_scheme(p, 8);
  PathState st(s);
  const PathResult r = run_path(st, SchemeKind::iVi, true, {17, 23, false});
  CHECK(r.u_total == 0.0);
  CHECK(r.z_total == 0.0);
  CHECK(r.logS_T == std::log(p.S0));
}

TEST_CASE("nonnegativity diagnostics stay at roundoff scale") {
  for (int id : {1, 2, 3, 4}) {
    const PreparedScheme s = prepare_scheme(table_case(id), 32);
    PathState st(s);
    for (int p = 0; p < 500; ++p)
      run_path(st, SchemeKind::iVi, false, {13, std::uint64_t(p), false});
    CHECK(st.min_raw_alpha >= s.clamp_floor);
    st.clear_diagnostics();
    CHECK(st.clamp_events == 0);
  }
}

TEST_CASE("per-path increments can be retained") {
  const PathResult r =
      simulate_path(table_case(2), 6, {3, 4, false}, SchemeKind::iVi, false, true);
  REQUIRE(r.increments.has_value());
  REQUIRE(r.increments->size() == 6);
  double u = 0.0, z = 0.0;
  for (const auto& [du, dz] : *r.increments) {
    u += du;
    z += dz;
  }
  CHECK(u == Approx(r.u_total).margin(1e-15));
  CHECK(z == Approx(r.z_total).margin(1e-15));
}

TEST_CASE("one-step transform root and its residual") {
  const PreparedScheme s = prepare_scheme(table_case(1), 1);
  const std::complex<double> w{-1.0, 0.0};
  const auto psi = one_step_psi_hat(s, w);
  CHECK(psi.imag() == 0.0);
  CHECK(psi.real() < 0.0);
  CHECK(std::abs(one_step_psi_residual(s, psi, w)) < 1e-14);
  CHECK_THROWS_AS(one_step_psi_hat(s, std::complex<double>{0.5, 0.0}), std::domain_error);

  // vanishing vol-of-vol limit
  ModelParams pc = table_case(1);
  pc.c = 0.0;
  const PreparedScheme sc = prepare_scheme(pc, 1);
  const auto psi_c = one_step_psi_hat(sc, w);
  CHECK(psi_c.real() == Approx(sc.k0 * (-1.0) / sc.one_minus_bk0).epsilon(1e-14));
}

TEST_CASE("one-step law matches its Monte Carlo transform") {
  for (int id : {1, 3}) {
    const auto check = one_step_char_check(table_case(id), 1, {-1.0, 0.0}, 20000, 4);
    CHECK(check.psi_residual < 1e-12);
    CHECK(std::abs(check.mc - check.exact) < 4.0 * check.se);
  }
}
