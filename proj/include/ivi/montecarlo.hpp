#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ivi/pricing.hpp"
#include "ivi/riccati.hpp"
#include "ivi/scheme.hpp"

namespace ivi {

// Fixed-order pairwise reduction; the result depends only on the array
// contents, never on how the entries were produced.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

struct McOptions {
  std::int64_t paths = 200000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware count
  bool antithetic = false;

  int resolved_threads() const {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }
};

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t paths = 0;
  int steps = 0;
  double wall_time = 0.0;
  bool degenerate_se = false;  // fewer than two sample units
};

namespace detail {

inline constexpr std::int64_t mc_block = 4096;

// Runs `eval(path_index, state)` over all path indices, partitioned into
// fixed blocks claimed by a worker pool. Per-block (sum, sum of squares) of
// the sample units are stored by block index and reduced pairwise, so the
// estimate is bitwise identical for any thread count. In antithetic mode the
// sample unit is the mean of the (even, odd) pair sharing a counter path.
template <class Eval>
MCEstimate mc_reduce(const PreparedScheme& prepared, const McOptions& opts, Eval&& eval) {
  if (opts.paths < 1) throw std::invalid_argument("mc_reduce: paths must be >= 1");
  if (opts.antithetic && opts.paths % 2 != 0)
    throw std::invalid_argument("mc_reduce: antithetic mode needs an even path count");
  const auto t0 = std::chrono::steady_clock::now();

  const std::int64_t n_blocks = (opts.paths + mc_block - 1) / mc_block;
  std::vector<double> block_sum(n_blocks), block_sumsq(n_blocks);
  std::vector<std::int64_t> block_units(n_blocks);
  std::vector<std::exception_ptr> errors(n_blocks);
  std::atomic<std::int64_t> next{0};

  const auto worker = [&] {
    PathState state(prepared);
    while (true) {
      const std::int64_t blk = next.fetch_add(1);
      if (blk >= n_blocks) return;
      const std::int64_t first = blk * mc_block;
      const std::int64_t last = std::min(opts.paths, first + mc_block);
      try {
        double s = 0.0, s2 = 0.0;
        std::int64_t units = 0;
        if (!opts.antithetic) {
          for (std::int64_t p = first; p < last; ++p) {
            const double y = eval(p, state);
            s += y;
            s2 += y * y;
            ++units;
          }
        } else {
          for (std::int64_t p = first; p < last; p += 2) {
            const double y = 0.5 * (eval(p, state) + eval(p + 1, state));
            s += y;
            s2 += y * y;
            ++units;
          }
        }
        block_sum[blk] = s;
        block_sumsq[blk] = s2;
        block_units[blk] = units;
      } catch (...) {
        errors[blk] = std::current_exception();
      }
    }
  };

  const int n_threads = std::min<std::int64_t>(opts.resolved_threads(), n_blocks);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::int64_t units = 0;
  for (std::int64_t u : block_units) units += u;
  const double sum = pairwise_sum(block_sum);
  const double sumsq = pairwise_sum(block_sumsq);
  MCEstimate est;
  est.paths = opts.paths;
  est.steps = prepared.n;
  est.value = sum / static_cast<double>(units);
  if (units > 1) {
    const double var =
        std::max(0.0, (sumsq - units * est.value * est.value) / static_cast<double>(units - 1));
    est.std_error = std::sqrt(var / static_cast<double>(units));
  } else {
    est.degenerate_se = true;
  }
  est.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

inline rng::PathStream stream_for(const McOptions& opts, std::int64_t path_index) {
  if (!opts.antithetic)
    return rng::PathStream{opts.seed, static_cast<std::uint64_t>(path_index), false};
  return rng::PathStream{opts.seed, static_cast<std::uint64_t>(path_index >> 1),
                         (path_index & 1) != 0};
}

}  // namespace detail

// Mean and SE of a per-path functional of the scheme output.
template <class Functional>  // double(const PathResult&)
MCEstimate mc_functional(const PreparedScheme& prepared, SchemeKind kind, bool with_price,
                         const McOptions& opts, Functional&& fn) {
  return detail::mc_reduce(prepared, opts, [&](std::int64_t p, PathState& st) {
    return fn(run_path(st, kind, with_price, detail::stream_for(opts, p)));
  });
}

// Terminal log-prices for all paths, written by block; deterministic because
// every slot depends only on its path index.
inline std::vector<double> terminal_log_prices(const PreparedScheme& prepared, SchemeKind kind,
                                               const McOptions& opts) {
  std::vector<double> logS(static_cast<std::size_t>(opts.paths));
  detail::mc_reduce(prepared, opts, [&](std::int64_t p, PathState& st) {
    const PathResult r = run_path(st, kind, true, detail::stream_for(opts, p));
    logS[static_cast<std::size_t>(p)] = r.logS_T;
    return 0.0;
  });
  return logS;
}

// Experiment descriptions ------------------------------------------------------

struct Target {
  enum Kind { LaplaceU, ATMCall, Smile, PathSample } kind = LaplaceU;
  double w = -1.0;                // LaplaceU transform argument
  std::vector<double> strikes;    // Smile
};

struct ExperimentConfig {
  ModelParams params;
  SchemeKind scheme = SchemeKind::iVi;
  std::vector<int> steps_list{100};
  std::int64_t paths = 200000;  // desk-scale default
  std::uint64_t seed = 1;
  int threads = 0;
  bool antithetic = false;
  bool resolvent = false;
  Target target;
  int riccati_m = 2000;

  void validate() const {
    params.validate();
    if (paths < 1) throw std::invalid_argument("ExperimentConfig: paths must be >= 1");
    if (steps_list.empty()) throw std::invalid_argument("ExperimentConfig: steps_list is empty");
    int prev = 0;
    for (int n : steps_list) {
      if (n <= prev)
        throw std::invalid_argument("ExperimentConfig: steps_list must be strictly increasing");
      prev = n;
    }
    if (target.kind == Target::LaplaceU && target.w > 0.0)
      throw std::invalid_argument("ExperimentConfig: Laplace argument w must be <= 0");
  }

  McOptions mc_options() const { return McOptions{paths, seed, threads, antithetic}; }
};

inline MCEstimate estimate(const ExperimentConfig& config) {
  config.validate();
  const int n = config.steps_list.front();
  const PreparedScheme prepared = prepare_scheme(config.params, n, config.resolvent);
  switch (config.target.kind) {
    case Target::LaplaceU: {
      const double w = config.target.w;
      return mc_functional(prepared, config.scheme, false, config.mc_options(),
                           [w](const PathResult& r) { return std::exp(w * r.u_total); });
    }
    case Target::ATMCall: {
      const double strike = config.params.S0;
      return mc_functional(prepared, config.scheme, true, config.mc_options(),
                           [strike](const PathResult& r) {
                             return std::max(std::exp(r.logS_T) - strike, 0.0);
                           });
    }
    default:
      throw std::invalid_argument("estimate: target handled by smile()/path_dump()");
  }
}

struct ErrorRow {
  SchemeKind scheme = SchemeKind::iVi;
  int steps = 0;
  double value = 0.0;
  double abs_error = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
};

// Error-vs-steps table for both schemes against the semi-analytic reference.
inline std::vector<ErrorRow> error_table(const ExperimentConfig& config) {
  config.validate();
  double reference = 0.0;
  if (config.target.kind == Target::LaplaceU) {
    reference = laplace_U(config.params, config.target.w, config.riccati_m);
  } else if (config.target.kind == Target::ATMCall) {
    reference = call_price_fourier(config.params, config.params.S0, config.riccati_m);
  } else {
    throw std::invalid_argument("error_table: target must be LaplaceU or ATMCall");
  }
  std::vector<ErrorRow> rows;
  for (int n : config.steps_list) {
    for (const SchemeKind kind : {SchemeKind::iVi, SchemeKind::Explicit}) {
      ExperimentConfig one = config;
      one.steps_list = {n};
      one.scheme = kind;
      const MCEstimate est = estimate(one);
      rows.push_back(
          {kind, n, est.value, std::abs(est.value - reference), est.std_error, reference});
    }
  }
  return rows;
}

struct PathDumpRow {
  int path = 0;
  int step = 0;
  double t = 0.0;
  double u = 0.0;      // increment U_{i,i+1}
  double z = 0.0;      // increment Z_{i,i+1}
  double v = 0.0;      // discrete derivative U / dt
  double logS = 0.0;
};

inline std::vector<PathDumpRow> path_dump(const ExperimentConfig& config, int n_paths_small) {
  config.validate();
  if (n_paths_small < 1 || n_paths_small > 100)
    throw std::invalid_argument("path_dump: path count must be in 1..100");
  const int n = config.steps_list.front();
  const PreparedScheme prepared = prepare_scheme(config.params, n, config.resolvent);
  PathState st(prepared);
  std::vector<PathDumpRow> rows;
  rows.reserve(static_cast<std::size_t>(n_paths_small) * n);
  for (int p = 0; p < n_paths_small; ++p) {
    const auto stream = detail::stream_for(config.mc_options(), p);
    run_path(st, config.scheme, true, stream, [&](int i, double u, double z, double logS) {
      rows.push_back({p, i, i * prepared.dt, u, z, u / prepared.dt, logS});
    });
  }
  return rows;
}

// Smile rows -------------------------------------------------------------------

struct SmileRow {
  double strike = 0.0;
  double price_mc = 0.0;
  double se_price = 0.0;
  double price_ref = 0.0;
  double iv_mc = 0.0;
  double iv_ref = 0.0;
  double se_iv = 0.0;  // price SE propagated through vega at the reference vol
};

inline std::vector<SmileRow> smile(const ModelParams& params, const std::vector<double>& strikes,
                                   int n_steps, std::int64_t paths, std::uint64_t seed,
                                   int threads = 0, bool antithetic = false, int riccati_m = 2000) {
  if (strikes.empty()) throw std::invalid_argument("smile: needs at least one strike");
  for (double k : strikes)
    if (!(k > 0.0)) throw std::invalid_argument("smile: strikes must be positive");
  const PreparedScheme prepared = prepare_scheme(params, n_steps);
  const McOptions opts{paths, seed, threads, antithetic};
  const std::vector<double> logS = terminal_log_prices(prepared, SchemeKind::iVi, opts);

  FourierPricer pricer(params, riccati_m);
  std::vector<SmileRow> rows;
  std::vector<double> unit(logS.size());
  for (double strike : strikes) {
    std::size_t n_units = logS.size();
    if (!opts.antithetic) {
      for (std::size_t p = 0; p < logS.size(); ++p)
        unit[p] = std::max(std::exp(logS[p]) - strike, 0.0);
    } else {
      n_units = logS.size() / 2;
      for (std::size_t q = 0; q < n_units; ++q)
        unit[q] = 0.5 * (std::max(std::exp(logS[2 * q]) - strike, 0.0) +
                         std::max(std::exp(logS[2 * q + 1]) - strike, 0.0));
    }
    const std::span<const double> units(unit.data(), n_units);
    const double mean = pairwise_sum(units) / static_cast<double>(n_units);
    std::vector<double> sq(n_units);
    for (std::size_t q = 0; q < n_units; ++q) sq[q] = (unit[q] - mean) * (unit[q] - mean);
    const double se = n_units > 1 ? std::sqrt(pairwise_sum(sq) /
                                              (static_cast<double>(n_units - 1) *
                                               static_cast<double>(n_units)))
                                  : 0.0;
    SmileRow row;
    row.strike = strike;
    row.price_mc = mean;
    row.se_price = se;
    row.price_ref = pricer.call_price(strike);
    row.iv_ref = implied_vol(row.price_ref, params.S0, strike, params.T);
    try {
      row.iv_mc = implied_vol(row.price_mc, params.S0, strike, params.T);
    } catch (const std::domain_error&) {
      row.iv_mc = std::numeric_limits<double>::quiet_NaN();
    }
    const double vega = bs_vega(params.S0, strike, params.T, row.iv_ref);
    row.se_iv = vega > 0.0 ? se / vega : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ivi
