#pragma once

// Figures of merit built on the leading-order error coefficients: the
// per-order error norms Err_n, the efficiency Eff_n = 1/(q^n Err_n), the
// weighted chi-square used by the optimizer, the distance from the uniform
// ramp, the penalty-mixed error, Pearson correlation, and the experimental
// efficiency of a benchmark run.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "scheme.hpp"

namespace trotter {

// Coefficient block responsible for the order-n error (degree n+1).
inline std::span<const Complex> order_error_block(const ErrorCoefficients& ec, int order) {
  switch (order) {
    case 2: return {ec.degree3.data(), ec.degree3.size()};
    case 4:
      if (ec.max_degree < 5)
        throw std::domain_error("order_error_block: series was truncated below degree 5");
      return {ec.degree5.data(), ec.degree5.size()};
    case 6:
      if (ec.max_degree < 7)
        throw std::domain_error("order_error_block: series was truncated below degree 7");
      return {ec.degree7.data(), ec.degree7.size()};
    default:
      throw std::domain_error("order_error_block: order must be 2, 4, or 6");
  }
}

// Err_n: Euclidean norm of the degree-(n+1) coefficient vector.
inline double error_norm(const ErrorCoefficients& ec, int order) {
  double s = 0;
  for (const auto& x : order_error_block(ec, order)) s += std::norm(x);
  return std::sqrt(s);
}

// Eff_n = 1 / (q^n Err_n); an exactly vanishing error yields +infinity.
inline double efficiency(double err, int q, int order) {
  if (q < 1) throw std::domain_error("efficiency: q must be positive");
  if (err < 0) throw std::domain_error("efficiency: negative error norm");
  if (err == 0) return std::numeric_limits<double>::infinity();
  return 1.0 / (std::pow(double(q), order) * err);
}

// Chi-square weights indexed by order; w0 weighs the degree-1 sum-rule
// residuals (only relevant when they are not eliminated exactly).
struct Weights {
  double w0 = 1.0;
  double w2 = 0.0;
  double w4 = 0.0;
  double w6 = 0.0;

  double at(int order) const {
    switch (order) {
      case 0: return w0;
      case 2: return w2;
      case 4: return w4;
      case 6: return w6;
      default: throw std::domain_error("weights: order must be 0, 2, 4, or 6");
    }
  }
  double& at(int order) {
    switch (order) {
      case 0: return w0;
      case 2: return w2;
      case 4: return w4;
      case 6: return w6;
      default: throw std::domain_error("weights: order must be 0, 2, 4, or 6");
    }
  }
};

// Production weight schedule, by cycle count.  w2 is always 1; the
// higher-order weights depend on the cycle window: w4 = 0.1 for q in [3,6],
// w4 = 100 for q in [7,8], and w4 = 500 with w6 = 1 for q in [9,14].
inline Weights default_weights(int q, int order) {
  if (!valid_cycle_range(order).contains(q))
    throw std::domain_error("default_weights: q outside the valid cycle range for this order");
  Weights w;
  w.w0 = 1.0;
  w.w2 = 1.0;
  if (order >= 4) {
    if (q <= 6)
      w.w4 = 0.1;
    else if (q <= 8)
      w.w4 = 100.0;
    else
      w.w4 = 500.0;
  }
  if (order >= 6) w.w6 = q <= 8 ? 0.0 : 1.0;
  return w;
}

inline double chi_squared(const ErrorCoefficients& ec, const Weights& w) {
  double s = w.w0 * (std::norm(ec.nu - 1.0) + std::norm(ec.sigma - 1.0));
  s += w.w2 * (std::norm(ec.degree3[0]) + std::norm(ec.degree3[1]));
  if (w.w4 != 0) {
    if (ec.max_degree < 5)
      throw std::domain_error("chi_squared: w4 set but series truncated below degree 5");
    for (const auto& x : ec.degree5) s += w.w4 * std::norm(x);
  }
  if (w.w6 != 0) {
    if (ec.max_degree < 7)
      throw std::domain_error("chi_squared: w6 set but series truncated below degree 7");
    for (const auto& x : ec.degree7) s += w.w6 * std::norm(x);
  }
  return s;
}

// Distance from the uniform ramp c_i = d_i = 1/(2q):
// xbar = sqrt(2 sum_i |c_i - 1/(2q)|^2).
inline double origin_distance(const TrotterScheme& s) {
  const auto c = s.ramp_c();
  const double u = 1.0 / (2.0 * s.cycles);
  double sum = 0;
  for (const auto& ci : c) sum += std::norm(ci - u);
  return std::sqrt(2.0 * sum);
}

// Penalty mix of the leading error with the origin distance:
// Err(r)^2 = ((1-r) Err_n)^2 + (r xbar)^2.
inline double combined_error(double err, double origin_dist, double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw std::domain_error("combined_error: ratio must lie in [0, 1]");
  const double a = (1.0 - ratio) * err, b = ratio * origin_dist;
  return std::hypot(a, b);
}

inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::domain_error("pearson_correlation: need two equally sized samples of size >= 2");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0)
    throw std::domain_error("pearson_correlation: a sample has zero variance");
  return sxy / std::sqrt(sxx * syy);
}

// Experimental efficiency of a measured error delta at evolution time t:
// Eff = t Omega^n / delta with Omega = omega0 q / h.
inline double experimental_efficiency(double t, double omega0, int q, double h, int order,
                                      double delta) {
  if (delta <= 0) throw std::domain_error("experimental_efficiency: delta must be positive");
  if (h <= 0 || t <= 0 || q < 1)
    throw std::domain_error("experimental_efficiency: invalid run parameters");
  const double omega = omega0 * double(q) / h;
  return t * std::pow(omega, order) / delta;
}

// Closed-form leading error of the one-parameter q = 2 family
//   e^{l h A} e^{h B / 2} e^{(1-2l) h A} e^{h B / 2} e^{l h A}:
// alpha(l) = 1/12 - l/2 + l^2/2 and beta(l) = 1/24 - l/4 multiply
// [A,[A,B]] and [B,[A,B]] respectively, so against the engine's
// [B,[B,A]] coordinate the sign of beta flips.  The parallel component
// (coefficient of [A,[A,B]] once [H,[H,B]] is separated off, H = A + B)
// is alpha - beta; it vanishes at l = (1 +- i/sqrt(3))/4 and its modulus
// attains the real-line minimum 1/96 at l = 1/4.
struct ParallelErrorFamily {
  Complex alpha;
  Complex beta;
  Complex parallel;
};

inline ParallelErrorFamily parallel_error_family(Complex lambda) {
  ParallelErrorFamily f;
  f.alpha = 1.0 / 12.0 - lambda / 2.0 + lambda * lambda / 2.0;
  f.beta = 1.0 / 24.0 - lambda / 4.0;
  f.parallel = f.alpha - f.beta;
  return f;
}

// Builds the q = 2 family member as an explicit scheme.
inline TrotterScheme parallel_family_scheme(Complex lambda) {
  return TrotterScheme::from_stages({lambda, 1.0 - 2.0 * lambda, lambda}, {0.5, 0.5});
}

// Summary of a scheme's theoretical merit.
struct MeritReport {
  int order = 0;
  int cycles = 0;
  double err = 0;          // Err_n at the declared order
  double eff = 0;          // Eff_n
  double origin_dist = 0;  // xbar
  double err2 = 0, err4 = 0, err6 = 0;
  double sum_rule_residual = 0;   // max |nu - 1|, |sigma - 1|
  double constraint_residual = 0; // max Err_k over orders k < n
  double max_even_norm = 0;
  bool valid = false;
  bool symmetric = false;
};

inline MeritReport make_merit_report(const TrotterScheme& s, int order,
                                     int max_degree = kDefaultMaxDegree) {
  const auto ec = compute_error_coefficients(s, max_degree);
  MeritReport r;
  r.order = order;
  r.cycles = s.cycles;
  r.err2 = error_norm(ec, 2);
  r.err4 = max_degree >= 5 ? error_norm(ec, 4) : 0.0;
  r.err6 = max_degree >= 7 ? error_norm(ec, 6) : 0.0;
  r.err = order == 2 ? r.err2 : order == 4 ? r.err4 : error_norm(ec, order);
  r.eff = efficiency(r.err, s.cycles, order);
  r.origin_dist = origin_distance(s);
  r.sum_rule_residual = std::max(std::abs(ec.nu - 1.0), std::abs(ec.sigma - 1.0));
  for (int k = 2; k < order; k += 2)
    r.constraint_residual = std::max(r.constraint_residual, error_norm(ec, k));
  r.max_even_norm = ec.max_even_norm;
  r.valid = s.is_valid();
  r.symmetric = s.symmetric;
  return r;
}

}  // namespace trotter
