#pragma once
// Desk-scale numerical experiments: cost sweeps and chain-length sweeps of
// Trotter error on the benchmark models, scaling-region classification, and
// the origin-distance penalty correlation study.

#include <trotter/error_functions.hpp>
#include <trotter/heisenberg.hpp>
#include <trotter/optimizer.hpp>
#include <trotter/oscillator.hpp>
#include <trotter/scheme_library.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace trotter {

struct BenchmarkRow {
  std::string model;     // "heisenberg", "heisenberg-L5", "oscillator", ...
  std::string grouping;  // "local" / "global"; empty for the oscillator
  std::string scheme;
  int order = 0;
  int q = 0;
  long n_t = 0;
  double h = 0;
  double delta = 0;
  double eff_exp = 0;
  std::string region_flag;  // "", "plateau", or "scaling"

  double actual_cost() const { return double(q) * double(n_t); }
};

struct SweepResult {
  std::vector<BenchmarkRow> rows;
  std::vector<std::string> notes;                // skipped cells and similar
  std::map<std::string, double> scaling_slopes;  // per scheme: d ln(delta) / d ln(cost)
};

namespace detail {

// Classifies one scheme's rows (assumed sorted by ascending cost) and
// returns the least-squares log-log slope over the detected scaling window
// (NaN when no window of at least three rows exists).
//
// Plateau: the run of rows at the low-cost end whose adjacent deltas differ
// by less than 5%.  Scaling window: the largest contiguous run of
// consecutive-pair slopes within 0.4 of the median pair slope.
inline double classify_rows(std::span<BenchmarkRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
    return a.actual_cost() < b.actual_cost();
  });
  const std::size_t n = rows.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();

  std::size_t plateau_end = 0;  // rows [0, plateau_end] are plateau when > 0
  while (plateau_end + 1 < n &&
         std::abs(rows[plateau_end + 1].delta - rows[plateau_end].delta) <
             0.05 * rows[plateau_end].delta)
    ++plateau_end;
  if (plateau_end > 0)
    for (std::size_t i = 0; i <= plateau_end; ++i) rows[i].region_flag = "plateau";

  std::vector<double> lc(n), ld(n);
  for (std::size_t i = 0; i < n; ++i) {
    lc[i] = std::log(rows[i].actual_cost());
    ld[i] = std::log(std::max(rows[i].delta, 1e-300));
  }
  std::vector<double> slope(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) slope[i] = (ld[i + 1] - ld[i]) / (lc[i + 1] - lc[i]);
  std::vector<double> sorted = slope;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];

  std::size_t best_begin = 0, best_len = 0, run_begin = 0, run_len = 0;
  for (std::size_t i = 0; i < slope.size(); ++i) {
    if (std::abs(slope[i] - median) <= 0.4) {
      if (run_len == 0) run_begin = i;
      if (++run_len > best_len) {
        best_len = run_len;
        best_begin = run_begin;
      }
    } else {
      run_len = 0;
    }
  }
  if (best_len < 2) return std::numeric_limits<double>::quiet_NaN();

  const std::size_t lo = best_begin, hi = best_begin + best_len;  // row range [lo, hi]
  for (std::size_t i = lo; i <= hi; ++i)
    if (rows[i].region_flag.empty()) rows[i].region_flag = "scaling";
  double mx = 0, my = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    mx += lc[i];
    my += ld[i];
  }
  const double m = double(hi - lo + 1);
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    sxx += (lc[i] - mx) * (lc[i] - mx);
    sxy += (lc[i] - mx) * (ld[i] - my);
  }
  return sxy / sxx;
}

inline long steps_for_cost(double cost, int q) { return std::lround(cost / q); }

}  // namespace detail

// Trotter-vs-exact error of every scheme at every cost on the Heisenberg
// chain.  One field draw (the config seed) is shared by all schemes, so
// rankings are paired.  Costs below one cycle are skipped with a note.
inline SweepResult cost_sweep_heisenberg(std::span<const SchemeRecord> schemes,
                                         const HeisenbergConfig& cfg,
                                         std::span<const double> costs, double omega0 = 1.0) {
  const auto model = build_heisenberg(cfg);
  const auto exact = exact_propagator(model.hamiltonian, cfg.t);
  const TrotterStepper stepper(grouped_terms(model, cfg.grouping));
  const std::string model_tag =
      cfg.sites == 6 ? "heisenberg" : fmt::format("heisenberg-L{}", cfg.sites);

  SweepResult result;
  for (const auto& rec : schemes) {
    const std::size_t first = result.rows.size();
    for (double cost : costs) {
      if (cost < rec.cycles()) {
        result.notes.push_back(fmt::format("{}: cost {} below one cycle of {}, skipped",
                                           rec.name, cost, rec.cycles()));
        continue;
      }
      BenchmarkRow row;
      row.model = model_tag;
      row.grouping = std::string(grouping_token(cfg.grouping));
      row.scheme = rec.name;
      row.order = rec.order;
      row.q = rec.cycles();
      row.n_t = detail::steps_for_cost(cost, row.q);
      row.h = cfg.t / double(row.n_t);
      row.delta = frobenius_error(exact, stepper.propagate(rec.scheme, row.h, row.n_t));
      row.eff_exp = experimental_efficiency(cfg.t, omega0, row.q, row.h, row.order, row.delta);
      result.rows.push_back(std::move(row));
    }
    result.scaling_slopes[rec.name] = detail::classify_rows(
        std::span<BenchmarkRow>(result.rows).subspan(first));
  }
  return result;
}

// Oscillator counterpart; the error is the truncated Frobenius norm over the
// lowest N_phi eigenstates.
inline SweepResult cost_sweep_oscillator(std::span<const SchemeRecord> schemes,
                                         const OscillatorConfig& cfg,
                                         std::span<const double> costs, double omega0 = 1.0) {
  const OscillatorModel model(cfg);
  SweepResult result;
  for (const auto& rec : schemes) {
    const std::size_t first = result.rows.size();
    for (double cost : costs) {
      if (cost < rec.cycles()) {
        result.notes.push_back(fmt::format("{}: cost {} below one cycle of {}, skipped",
                                           rec.name, cost, rec.cycles()));
        continue;
      }
      BenchmarkRow row;
      row.model = "oscillator";
      row.scheme = rec.name;
      row.order = rec.order;
      row.q = rec.cycles();
      row.n_t = detail::steps_for_cost(cost, row.q);
      row.h = cfg.t / double(row.n_t);
      row.delta = model.delta(rec.scheme, cfg.t, row.n_t);
      row.eff_exp = experimental_efficiency(cfg.t, omega0, row.q, row.h, row.order, row.delta);
      result.rows.push_back(std::move(row));
    }
    result.scaling_slopes[rec.name] = detail::classify_rows(
        std::span<BenchmarkRow>(result.rows).subspan(first));
  }
  return result;
}

struct ChainSweepResult {
  std::vector<BenchmarkRow> rows;
  // Relative spread (max - min) / min of delta across the swept lengths.
  std::map<std::string, double> spread;
  // Scheme names by ascending delta at each length.
  std::map<int, std::vector<std::string>> ranking;
};

// Delta per (scheme, L) at one fixed cost; the paper's size-independence
// check.  Each length draws its own fields from the shared seed; all schemes
// at one length see the same draw.
inline ChainSweepResult chain_length_sweep(std::span<const SchemeRecord> schemes,
                                           const HeisenbergConfig& base,
                                           std::span<const int> lengths, double cost,
                                           double omega0 = 1.0) {
  ChainSweepResult result;
  std::map<std::string, std::vector<double>> deltas;
  for (int L : lengths) {
    HeisenbergConfig cfg = base;
    cfg.sites = L;
    const double grid[] = {cost};
    auto sweep = cost_sweep_heisenberg(schemes, cfg, grid, omega0);
    std::vector<std::pair<double, std::string>> order;
    for (auto& row : sweep.rows) {
      deltas[row.scheme].push_back(row.delta);
      order.emplace_back(row.delta, row.scheme);
      result.rows.push_back(std::move(row));
    }
    std::sort(order.begin(), order.end());
    auto& names = result.ranking[L];
    for (const auto& [d, name] : order) names.push_back(name);
  }
  for (const auto& [name, ds] : deltas) {
    const auto [lo, hi] = std::minmax_element(ds.begin(), ds.end());
    result.spread[name] = (*hi - *lo) / *lo;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Origin-distance penalty study
// ---------------------------------------------------------------------------

struct PenaltyStudyConfig {
  HeisenbergConfig model;  // grouping, seed, t
  double cost = 1000.0;
  double r_min = 1e-9;
  double r_max = 1e-2;
  int r_points = 13;   // log-spaced interior grid; r = 0 is prepended
  LMConfig lm;         // for the penalized re-optimizations
  double omega0 = 1.0;

  void validate() const {
    model.validate();
    if (!(r_min > 0) || !(r_max > r_min) || r_max > 1.0)
      throw std::domain_error("penalty study: need 0 < r_min < r_max <= 1");
    if (r_points < 3) throw std::domain_error("penalty study: need at least 3 r points");
  }
};

struct PenaltyStudyResult {
  // r_grid[0] = 0, then the log-spaced points.
  std::vector<double> r_grid;
  // Pearson correlation between log combined_error(r) and log measured delta
  // across the catalog.
  std::vector<double> rho;
  // delta(penalized minimum) / delta(unpenalized minimum), for the catalog's
  // global minimum and its first local minimum.
  std::vector<double> ratio_global;
  std::vector<double> ratio_local;
  // Per-catalog-entry measurements the correlation is built from.
  std::vector<double> catalog_err, catalog_xbar, catalog_delta;
};

// Measures every catalog minimum on the model, correlates the penalized
// objective with the measured error across the r grid, and re-optimizes the
// two best minima under the penalty to report error ratios.
inline PenaltyStudyResult penalty_correlation_study(const MultistartCatalog& catalog,
                                                    const PenaltyStudyConfig& cfg) {
  cfg.validate();
  if (catalog.minima.size() < 3)
    throw std::runtime_error(
        "penalty study: catalog has fewer than 3 schemes; run a larger multistart");

  const auto model = build_heisenberg(cfg.model);
  const auto exact = exact_propagator(model.hamiltonian, cfg.model.t);
  const TrotterStepper stepper(grouped_terms(model, cfg.model.grouping));
  const int q = catalog.minima.front().scheme.cycles;
  const int order = catalog.minima.front().order;

  auto measure = [&](const TrotterScheme& s) {
    const long n_t = detail::steps_for_cost(cfg.cost, s.cycles);
    const double h = cfg.model.t / double(n_t);
    return frobenius_error(exact, stepper.propagate(s, h, n_t));
  };

  PenaltyStudyResult result;
  result.r_grid.push_back(0.0);
  for (int i = 0; i < cfg.r_points; ++i)
    result.r_grid.push_back(cfg.r_min * std::pow(cfg.r_max / cfg.r_min,
                                                 double(i) / double(cfg.r_points - 1)));

  for (const auto& m : catalog.minima) {
    if (m.scheme.cycles != q)
      throw std::domain_error("penalty study: catalog mixes cycle counts");
    result.catalog_err.push_back(m.err);
    result.catalog_xbar.push_back(m.origin_dist);
    result.catalog_delta.push_back(measure(m.scheme));
  }

  std::vector<double> log_delta(result.catalog_delta.size());
  for (std::size_t i = 0; i < log_delta.size(); ++i)
    log_delta[i] = std::log(result.catalog_delta[i]);
  for (double r : result.r_grid) {
    std::vector<double> log_combined(result.catalog_err.size());
    for (std::size_t i = 0; i < log_combined.size(); ++i)
      log_combined[i] =
          std::log(combined_error(result.catalog_err[i], result.catalog_xbar[i], r));
    result.rho.push_back(pearson_correlation(log_combined, log_delta));
  }

  const auto ratios_for = [&](const SchemeCandidate& seed) {
    const double base = measure(seed.scheme);
    std::vector<double> ratios;
    for (double r : result.r_grid) {
      const auto cand = optimize_penalized(q, order, r, seed.scheme, cfg.lm);
      ratios.push_back(measure(cand.scheme) / base);
    }
    return ratios;
  };
  result.ratio_global = ratios_for(catalog.minima[0]);
  result.ratio_local = ratios_for(catalog.minima[1]);
  return result;
}

// ---------------------------------------------------------------------------
// Row output: CSV and a JSON mirror, 17 significant digits.
// ---------------------------------------------------------------------------

inline void write_rows_csv(std::span<const BenchmarkRow> rows, std::ostream& os) {
  os << "model,grouping,scheme,order,q,n_t,h,delta,eff_exp,region_flag\n";
  for (const auto& r : rows)
    os << fmt::format("{},{},{},{},{},{},{:.17g},{:.17g},{:.17g},{}\n", r.model, r.grouping,
                      r.scheme, r.order, r.q, r.n_t, r.h, r.delta, r.eff_exp, r.region_flag);
}

inline nlohmann::json rows_to_json(std::span<const BenchmarkRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows)
    out.push_back({{"model", r.model},
                   {"grouping", r.grouping},
                   {"scheme", r.scheme},
                   {"order", r.order},
                   {"q", r.q},
                   {"n_t", r.n_t},
                   {"h", r.h},
                   {"delta", r.delta},
                   {"eff_exp", r.eff_exp},
                   {"region_flag", r.region_flag}});
  return out;
}

}  // namespace trotter
