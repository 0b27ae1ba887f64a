#pragma once

// Independent oracles used by the tests.  Everything here is derived by a
// different route than the library implementation: the alpha/beta values
// come from iterating the symmetric-conjugation recursion stage by stage
// rather than from expanding the full product, and the Jacobian oracle uses
// central finite differences.

#include <complex>
#include <random>
#include <vector>

#include <trotter/scheme.hpp>

namespace oracles {

using trotter::Complex;

// Degree-3 coefficients via the stage recursion for symmetric schemes.
// The state tracks (nu, sigma, alpha, beta) of the symmetrically grown
// product; conjugating by e^{a h A} or e^{b h B} updates them through the
// symmetric Baker-Campbell-Hausdorff prefactors -1/6 and 1/6.
struct RecursionState {
  Complex nu{0}, sigma{0}, alpha{0}, beta{0};

  void apply_a(Complex a) {
    constexpr double kAlphaBar = -1.0 / 6.0, kBetaBar = 1.0 / 6.0;
    alpha += kAlphaBar * a * a * sigma - kBetaBar * a * nu * sigma;
    beta += kBetaBar * a * sigma * sigma;
    nu += 2.0 * a;
  }
  void apply_b(Complex b) {
    constexpr double kAlphaBar = -1.0 / 6.0, kBetaBar = 1.0 / 6.0;
    alpha += kBetaBar * b * nu * nu;
    beta += kAlphaBar * b * b * nu - kBetaBar * b * nu * sigma;
    sigma += 2.0 * b;
  }
};

// Walks a symmetric scheme centre-out and returns (nu, sigma, alpha, beta).
inline RecursionState alpha_beta_recursion(const trotter::TrotterScheme& s) {
  std::vector<Complex> ah, bh;
  s.half_parameters(ah, bh);
  RecursionState st;
  if (s.cycles % 2 == 0) {
    st.apply_a(ah[0]);
    for (std::size_t k = 0; k < bh.size(); ++k) {
      st.apply_b(bh[k]);
      st.apply_a(ah[k + 1]);
    }
  } else {
    st.apply_b(bh[0]);
    for (std::size_t k = 0; k + 1 < bh.size(); ++k) {
      st.apply_a(ah[k]);
      st.apply_b(bh[k + 1]);
    }
    st.apply_a(ah.back());
  }
  return st;
}

inline trotter::TrotterScheme random_symmetric_scheme(int q, std::mt19937_64& rng,
                                                      bool complex_params = false) {
  std::normal_distribution<double> dist(0.0, 0.7);
  auto draw = [&] { return Complex(dist(rng), complex_params ? 0.3 * dist(rng) : 0.0); };
  std::vector<Complex> ah, bh;
  const int na = q % 2 == 0 ? q / 2 + 1 : (q + 1) / 2;
  const int nb = q % 2 == 0 ? q / 2 : (q + 1) / 2;
  for (int i = 0; i < na; ++i) ah.push_back(draw());
  for (int i = 0; i < nb; ++i) bh.push_back(draw());
  return trotter::TrotterScheme::symmetric_from_half(q, ah, bh);
}

}  // namespace oracles
