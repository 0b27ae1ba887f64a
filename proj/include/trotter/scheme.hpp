#pragma once

// Product-formula schemes.  A scheme with q cycles is the stage product
//
//   S(h) = e^{a1 h A} e^{b1 h B} e^{a2 h A} ... e^{bq h B} e^{a_{q+1} h A}
//
// held canonically as the two stage lists.  The equivalent ramp form
// (forward ramp coefficients c_i, backward ramp coefficients d_i) is
// related by a1 = c1, b_i = c_i + d_i, a_{i+1} = d_i + c_{i+1} with
// c_{q+1} = 0; valid schemes have sum(c) = sum(d) = 1/2.  Symmetric
// (palindromic) schemes admit a middle-out half-parameter view in which the
// centre stage carries twice its half parameter; that view is what the
// optimizer works in.

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "commutator_basis.hpp"
#include "series.hpp"

namespace trotter {

using Complex = std::complex<double>;

namespace detail {

// Stage lists of a symmetric scheme from its middle-out half parameters.
// The map is linear, so it also transports half-parameter tangents to stage
// tangents; the optimizer relies on that.
template <class Scalar>
void place_symmetric_stages(int q, std::span<const Scalar> a_half,
                            std::span<const Scalar> b_half, std::vector<Scalar>& a,
                            std::vector<Scalar>& b) {
  if (q < 1) throw std::invalid_argument("scheme: q must be positive");
  a.assign(q + 1, Scalar(0));
  b.assign(q, Scalar(0));
  if (q % 2 == 0) {
    const int m = q / 2;
    if (int(a_half.size()) != m + 1 || int(b_half.size()) != m)
      throw std::invalid_argument("scheme: half-parameter lists have the wrong size");
    a[m] = Scalar(2) * a_half[0];
    for (int k = 1; k <= m; ++k) a[m - k] = a[m + k] = a_half[k];
    for (int k = 0; k < m; ++k) b[m - 1 - k] = b[m + k] = b_half[k];
  } else {
    const int m = (q - 1) / 2;
    if (int(a_half.size()) != m + 1 || int(b_half.size()) != m + 1)
      throw std::invalid_argument("scheme: half-parameter lists have the wrong size");
    b[m] = Scalar(2) * b_half[0];
    for (int k = 1; k <= m; ++k) b[m - k] = b[m + k] = b_half[k];
    for (int k = 0; k <= m; ++k) a[m - k] = a[m + 1 + k] = a_half[k];
  }
}

// Ramp coefficients recovered from stage lists via the defining recurrence
// c_i = a_i - d_{i-1}, d_i = b_i - c_i.
template <class Scalar>
void ramps_from_stages(std::span<const Scalar> a, std::span<const Scalar> b,
                       std::vector<Scalar>& c, std::vector<Scalar>& d) {
  const int q = int(b.size());
  c.resize(q);
  d.resize(q);
  Scalar prev_d(0);
  for (int i = 0; i < q; ++i) {
    c[i] = a[i] - prev_d;
    prev_d = d[i] = b[i] - c[i];
  }
}

}  // namespace detail

struct TrotterScheme {
  int cycles = 0;                // q
  std::vector<Complex> stage_a;  // q+1 entries
  std::vector<Complex> stage_b;  // q entries
  bool symmetric = false;

  static TrotterScheme from_stages(std::vector<Complex> a, std::vector<Complex> b) {
    TrotterScheme s;
    if (a.size() != b.size() + 1 || b.empty())
      throw std::invalid_argument("scheme: stage lists must have sizes q+1 and q");
    s.cycles = int(b.size());
    s.stage_a = std::move(a);
    s.stage_b = std::move(b);
    s.symmetric = s.detect_symmetric();
    return s;
  }

  static TrotterScheme from_ramps(const std::vector<Complex>& c,
                                  const std::vector<Complex>& d) {
    if (c.size() != d.size() || c.empty())
      throw std::invalid_argument("scheme: ramp lists must both have q entries");
    const int q = int(c.size());
    std::vector<Complex> a(q + 1), b(q);
    a[0] = c[0];
    for (int i = 0; i < q; ++i) {
      b[i] = c[i] + d[i];
      a[i + 1] = d[i] + (i + 1 < q ? c[i + 1] : Complex(0));
    }
    return from_stages(std::move(a), std::move(b));
  }

  // Middle-out half parameters of a symmetric scheme.  For even q the
  // centre stage is an A stage equal to twice a_half[0]; for odd q the
  // centre is a B stage equal to twice b_half[0].  Outer pairs follow in
  // order, so a_half.back() / b_half.back() are the outermost parameters.
  static TrotterScheme symmetric_from_half(int q, const std::vector<Complex>& a_half,
                                           const std::vector<Complex>& b_half) {
    std::vector<Complex> a, b;
    detail::place_symmetric_stages<Complex>(q, a_half, b_half, a, b);
    auto s = from_stages(std::move(a), std::move(b));
    s.symmetric = true;
    return s;
  }

  // Inverse of symmetric_from_half.
  void half_parameters(std::vector<Complex>& a_half, std::vector<Complex>& b_half) const {
    if (!symmetric)
      throw std::domain_error("scheme: half parameters require a symmetric scheme");
    const int q = cycles;
    if (q % 2 == 0) {
      const int m = q / 2;
      a_half.resize(m + 1);
      b_half.resize(m);
      a_half[0] = 0.5 * stage_a[m];
      for (int k = 1; k <= m; ++k) a_half[k] = stage_a[m + k];
      for (int k = 0; k < m; ++k) b_half[k] = stage_b[m + k];
    } else {
      const int m = (q - 1) / 2;
      a_half.resize(m + 1);
      b_half.resize(m + 1);
      b_half[0] = 0.5 * stage_b[m];
      for (int k = 1; k <= m; ++k) b_half[k] = stage_b[m + k];
      for (int k = 0; k <= m; ++k) a_half[k] = stage_a[m + 1 + k];
    }
  }

  std::vector<Complex> ramp_c() const {
    std::vector<Complex> c, d;
    detail::ramps_from_stages<Complex>(stage_a, stage_b, c, d);
    return c;
  }

  std::vector<Complex> ramp_d() const {
    std::vector<Complex> c, d;
    detail::ramps_from_stages<Complex>(stage_a, stage_b, c, d);
    return d;
  }

  // Sum rules sum(c) = sum(d) = 1/2 plus closure of the trailing stage.
  bool is_valid(double tol = 1e-12) const {
    const auto c = ramp_c();
    const auto d = ramp_d();
    Complex sc(0), sd(0);
    for (int i = 0; i < cycles; ++i) {
      sc += c[i];
      sd += d[i];
    }
    return std::abs(sc - 0.5) <= tol && std::abs(sd - 0.5) <= tol &&
           std::abs(stage_a[cycles] - d[cycles - 1]) <= tol;
  }

  bool is_real(double tol = 0.0) const {
    for (const auto& x : stage_a)
      if (std::abs(x.imag()) > tol) return false;
    for (const auto& x : stage_b)
      if (std::abs(x.imag()) > tol) return false;
    return true;
  }

 private:
  bool detect_symmetric(double tol = 1e-12) const {
    const int q = cycles;
    for (int i = 0; i <= q; ++i)
      if (std::abs(stage_a[i] - stage_a[q - i]) > tol) return false;
    for (int i = 0; i < q; ++i)
      if (std::abs(stage_b[i] - stage_b[q - 1 - i]) > tol) return false;
    return true;
  }
};

// Euclidean distance between the concatenated ramp vectors of two schemes
// with equal cycle count; used for catalog deduplication.
inline double ramp_distance(const TrotterScheme& s1, const TrotterScheme& s2) {
  if (s1.cycles != s2.cycles)
    throw std::invalid_argument("ramp_distance: schemes have different cycle counts");
  const auto c1 = s1.ramp_c(), d1 = s1.ramp_d(), c2 = s2.ramp_c(), d2 = s2.ramp_d();
  double sum = 0;
  for (int i = 0; i < s1.cycles; ++i)
    sum += std::norm(c1[i] - c2[i]) + std::norm(d1[i] - d2[i]);
  return std::sqrt(sum);
}

// Truncated series of the full stage product at step size h.
template <class Scalar>
BasicSeries<Scalar> build_stage_product(std::span<const Scalar> stage_a,
                                        std::span<const Scalar> stage_b, double h,
                                        int max_degree) {
  const int q = int(stage_b.size());
  BasicSeries<Scalar> p = BasicSeries<Scalar>::unit(max_degree);
  std::vector<Scalar> pows(max_degree + 1);
  auto append = [&](Generator g, Scalar t) {
    pows[0] = Scalar(1);
    for (int k = 1; k <= max_degree; ++k) pows[k] = pows[k - 1] * t / Scalar(double(k));
    p.mul_right_generator_poly(g, pows);
  };
  for (int i = 0; i < q; ++i) {
    append(Generator::A, stage_a[i] * Scalar(h));
    append(Generator::B, stage_b[i] * Scalar(h));
  }
  append(Generator::A, stage_a[q] * Scalar(h));
  return p;
}

inline TruncatedSeries build_product(const TrotterScheme& s, double h = 1.0,
                                     int max_degree = kDefaultMaxDegree) {
  return build_stage_product<Complex>(s.stage_a, s.stage_b, h, max_degree);
}

// Leading-order error data of a scheme: coordinates of log S(1) on the
// commutator bases, by degree.
struct ErrorCoefficients {
  int max_degree = kDefaultMaxDegree;
  Complex nu{0, 0};     // degree-1 A coordinate; 1 for valid schemes
  Complex sigma{0, 0};  // degree-1 B coordinate
  std::array<Complex, 2> degree3{};  // coordinates on [A,[A,B]], [B,[B,A]]
  std::array<Complex, 6> degree5{};
  std::vector<Complex> degree7;      // 18 coordinates when max_degree >= 7
  double max_even_norm = 0;          // diagnostic: largest even-degree residue

  Complex alpha() const { return degree3[0]; }
  Complex beta() const { return degree3[1]; }
};

inline ErrorCoefficients compute_error_coefficients(const TrotterScheme& s,
                                                    int max_degree = kDefaultMaxDegree) {
  if (max_degree < 3)
    throw std::invalid_argument("compute_error_coefficients: max_degree must be >= 3");
  ErrorCoefficients ec;
  ec.max_degree = max_degree;
  const TruncatedSeries logs = build_product(s, 1.0, max_degree).log();
  ec.nu = logs.coefficient(1, 0);
  ec.sigma = logs.coefficient(1, 1);
  {
    const auto v = project_onto_basis(logs, 3);
    ec.degree3 = {v[0], v[1]};
  }
  if (max_degree >= 5) {
    const auto v = project_onto_basis(logs, 5);
    std::copy(v.begin(), v.end(), ec.degree5.begin());
  }
  if (max_degree >= 7) {
    ec.degree7 = project_onto_basis(logs, 7);
  }
  for (int d = 2; d <= max_degree; d += 2)
    ec.max_even_norm = std::max(ec.max_even_norm, logs.degree_norm(d));
  return ec;
}

// Number of order conditions for a symmetric scheme of order n: the Witt
// dimensions of the odd degrees below n, including the two degree-1 sum
// rules.  n = 2, 4, 6, 8, 10 give 2, 4, 10, 28, 84.
inline int constraint_count(int order) {
  if (order < 2 || order > 10 || order % 2 != 0)
    throw std::domain_error("constraint_count: order must be one of 2, 4, 6, 8, 10");
  int count = 0;
  for (int d = 1; d < order; d += 2) count += lie_dimension(d);
  return count;
}

// Cycle-count window in which order n is reachable and not wasteful:
// [2^{n/2} - 1, 2^{n/2+1} - 2].
struct CycleRange {
  int lo = 0;
  int hi = 0;
  bool contains(int q) const { return q >= lo && q <= hi; }
};

inline CycleRange valid_cycle_range(int order) {
  constraint_count(order);  // validates the order argument
  return {(1 << (order / 2)) - 1, (1 << (order / 2 + 1)) - 2};
}

inline int free_parameter_count(int order, int q) {
  return std::max(0, q + 1 - constraint_count(order));
}

}  // namespace trotter
