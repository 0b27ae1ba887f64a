#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <trotter/scheme.hpp>

#include "oracles.hpp"

using trotter::Complex;
using trotter::compute_error_coefficients;
using trotter::Generator;
using trotter::TrotterScheme;
using trotter::TruncatedSeries;

namespace {

TrotterScheme leapfrog() { return TrotterScheme::from_ramps({0.5}, {0.5}); }

std::vector<Complex> random_ramp(int q, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Complex> v(q);
  for (auto& x : v) x = Complex(u(rng), u(rng));
  return v;
}

}  // namespace

TEST_CASE("leapfrog ramp-to-stage") {
  auto s = leapfrog();
  REQUIRE(s.cycles == 1);
  CHECK(s.stage_a[0] == Complex(0.5));
  CHECK(s.stage_a[1] == Complex(0.5));
  CHECK(s.stage_b[0] == Complex(1.0));
  CHECK(s.symmetric);
  CHECK(s.is_valid());
}

TEST_CASE("uniform two-cycle ramp maps to the expected stages") {
  auto s = TrotterScheme::from_ramps({0.25, 0.25}, {0.25, 0.25});
  CHECK(s.stage_a == std::vector<Complex>{0.25, 0.5, 0.25});
  CHECK(s.stage_b == std::vector<Complex>{0.5, 0.5});
  CHECK(s.symmetric);
}

TEST_CASE("stage/ramp conversions are mutually inverse") {
  std::mt19937_64 rng(3);
  for (int q = 1; q <= 8; ++q) {
    for (int it = 0; it < 12; ++it) {
      auto c = random_ramp(q, rng);
      auto d = random_ramp(q, rng);
      auto s = TrotterScheme::from_ramps(c, d);
      auto c2 = s.ramp_c(), d2 = s.ramp_d();
      for (int i = 0; i < q; ++i) {
        CHECK(std::abs(c[i] - c2[i]) < 1e-14);
        CHECK(std::abs(d[i] - d2[i]) < 1e-14);
      }
      // Rebuilding from the recovered ramps reproduces the stages exactly.
      auto s2 = TrotterScheme::from_ramps(c2, d2);
      for (int i = 0; i <= q; ++i) CHECK(std::abs(s.stage_a[i] - s2.stage_a[i]) < 1e-14);
      for (int i = 0; i < q; ++i) CHECK(std::abs(s.stage_b[i] - s2.stage_b[i]) < 1e-14);
    }
  }
}

TEST_CASE("symmetric half-parameter view round trips") {
  std::mt19937_64 rng(17);
  for (int q = 1; q <= 9; ++q) {
    auto s = oracles::random_symmetric_scheme(q, rng, true);
    REQUIRE(s.symmetric);
    std::vector<Complex> ah, bh;
    s.half_parameters(ah, bh);
    auto s2 = TrotterScheme::symmetric_from_half(q, ah, bh);
    for (int i = 0; i <= q; ++i) CHECK(std::abs(s.stage_a[i] - s2.stage_a[i]) == 0.0);
    for (int i = 0; i < q; ++i) CHECK(std::abs(s.stage_b[i] - s2.stage_b[i]) == 0.0);
  }
}

TEST_CASE("mirrored ramps and symmetric stage sequences coincide") {
  // d_i = c_{q+1-i} produces a stage palindrome, and recovering ramps from
  // such a palindrome returns the mirrored pair.
  std::mt19937_64 rng(18);
  std::normal_distribution<double> g(0.0, 0.7);
  for (int q = 1; q <= 9; ++q) {
    std::vector<Complex> c(q);
    for (auto& x : c) x = Complex(g(rng), 0.3 * g(rng));
    std::vector<Complex> d(c.rbegin(), c.rend());
    auto s = TrotterScheme::from_ramps(c, d);
    CHECK(s.symmetric);
    auto c2 = s.ramp_c(), d2 = s.ramp_d();
    for (int i = 0; i < q; ++i) {
      CHECK(std::abs(c2[i] - c[i]) < 1e-14);
      CHECK(std::abs(c2[i] - d2[q - 1 - i]) < 1e-14);
    }
  }
}

TEST_CASE("stage list size mismatches are rejected") {
  CHECK_THROWS_AS(TrotterScheme::from_stages({0.5}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(TrotterScheme::from_ramps({0.5}, {0.5, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(TrotterScheme::symmetric_from_half(4, {0.1, 0.2}, {0.3}),
                  std::invalid_argument);
}

TEST_CASE("leapfrog product and error coefficients") {
  auto ec = compute_error_coefficients(leapfrog());
  CHECK(std::abs(ec.nu - 1.0) < 1e-15);
  CHECK(std::abs(ec.sigma - 1.0) < 1e-15);
  CHECK(std::abs(ec.alpha() - Complex(-1.0 / 24.0)) < 1e-14);
  CHECK(std::abs(ec.beta() - Complex(1.0 / 12.0)) < 1e-14);
  CHECK(ec.max_even_norm < 1e-13);
}

TEST_CASE("error coefficients scale as h^degree") {
  auto s = leapfrog();
  const double h = 0.5;
  auto p = trotter::build_product(s, h).log();
  auto full = trotter::build_product(s, 1.0).log();
  auto c3 = trotter::project_onto_basis(p, 3);
  auto c3f = trotter::project_onto_basis(full, 3);
  CHECK(std::abs(c3[0] - c3f[0] * h * h * h) < 1e-15);
  auto c5 = trotter::project_onto_basis(p, 5);
  auto c5f = trotter::project_onto_basis(full, 5);
  for (int i = 0; i < 6; ++i)
    CHECK(std::abs(c5[i] - c5f[i] * std::pow(h, 5)) < 1e-15);
}

TEST_CASE("letter exchange reverses coefficient vectors") {
  // Build the A<->B swapped product directly at series level and compare
  // degree-5 coordinate vectors: they must be each other's reversal.
  std::mt19937_64 rng(29);
  auto s = oracles::random_symmetric_scheme(4, rng);
  auto sum = [](const std::vector<Complex>& v) {
    Complex t(0);
    for (auto x : v) t += x;
    return t;
  };
  // Normalize so the scheme is valid (coefficient vectors well defined).
  std::vector<Complex> ah, bh;
  s.half_parameters(ah, bh);
  Complex sa = sum(ah), sb = sum(bh);
  for (auto& x : ah) x *= 0.5 / sa;
  for (auto& x : bh) x *= 0.5 / sb;
  s = TrotterScheme::symmetric_from_half(4, ah, bh);

  const int D = 7;
  TruncatedSeries swapped = TruncatedSeries::unit(D);
  std::vector<Complex> pows(D + 1);
  auto append = [&](Generator g, Complex t) {
    pows[0] = 1.0;
    for (int k = 1; k <= D; ++k) pows[k] = pows[k - 1] * t / double(k);
    swapped.mul_right_generator_poly(g, pows);
  };
  for (int i = 0; i < s.cycles; ++i) {
    append(Generator::B, s.stage_a[i]);  // letters exchanged
    append(Generator::A, s.stage_b[i]);
  }
  append(Generator::B, s.stage_a[s.cycles]);

  auto orig = trotter::build_product(s).log();
  auto co3 = trotter::project_onto_basis(orig, 3);
  auto co5 = trotter::project_onto_basis(orig, 5);
  auto co7 = trotter::project_onto_basis(orig, 7);
  auto logs = swapped.log();
  auto cs3 = trotter::project_onto_basis(logs, 3);
  auto cs5 = trotter::project_onto_basis(logs, 5);
  auto cs7 = trotter::project_onto_basis(logs, 7);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(cs3[i] - co3[1 - i]) < 1e-12);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(cs5[i] - co5[5 - i]) < 1e-12);
  for (int i = 0; i < 18; ++i) CHECK(std::abs(cs7[i] - co7[17 - i]) < 1e-12);
}

TEST_CASE("recursion oracle agrees with the series engine") {
  std::mt19937_64 rng(41);
  int checked = 0;
  while (checked < 50) {
    const int q = 1 + int(rng() % 6);
    auto s = oracles::random_symmetric_scheme(q, rng, checked % 3 == 0);
    auto st = oracles::alpha_beta_recursion(s);
    auto ec = compute_error_coefficients(s, 3);
    CHECK(std::abs(ec.nu - st.nu) < 1e-12);
    CHECK(std::abs(ec.sigma - st.sigma) < 1e-12);
    CHECK(std::abs(ec.alpha() - st.alpha) < 1e-12);
    CHECK(std::abs(ec.beta() - st.beta) < 1e-12);
    ++checked;
  }
}

TEST_CASE("symmetric schemes have vanishing even orders") {
  std::mt19937_64 rng(53);
  for (int q : {1, 2, 3, 5}) {
    auto s = oracles::random_symmetric_scheme(q, rng);
    auto ec = compute_error_coefficients(s);
    // Round-off in the even blocks scales with the size of the log series.
    const double scale = trotter::build_product(s).log().norm();
    CHECK(ec.max_even_norm < 1e-13 * (1.0 + scale));
  }
}

TEST_CASE("constraint counts and cycle windows") {
  CHECK(trotter::constraint_count(2) == 2);
  CHECK(trotter::constraint_count(4) == 4);
  CHECK(trotter::constraint_count(6) == 10);
  CHECK(trotter::constraint_count(8) == 28);
  CHECK(trotter::constraint_count(10) == 84);
  CHECK_THROWS_AS(trotter::constraint_count(3), std::domain_error);
  CHECK_THROWS_AS(trotter::constraint_count(12), std::domain_error);

  CHECK(trotter::valid_cycle_range(2).lo == 1);
  CHECK(trotter::valid_cycle_range(2).hi == 2);
  CHECK(trotter::valid_cycle_range(4).lo == 3);
  CHECK(trotter::valid_cycle_range(4).hi == 6);
  CHECK(trotter::valid_cycle_range(6).lo == 7);
  CHECK(trotter::valid_cycle_range(6).hi == 14);
  CHECK(trotter::valid_cycle_range(8).lo == 15);
  CHECK(trotter::valid_cycle_range(8).hi == 30);
  CHECK(trotter::valid_cycle_range(10).lo == 31);
  CHECK(trotter::valid_cycle_range(10).hi == 62);

  CHECK(trotter::free_parameter_count(4, 3) == 0);
  CHECK(trotter::free_parameter_count(4, 6) == 3);
  CHECK(trotter::free_parameter_count(6, 7) == 0);
  CHECK(trotter::free_parameter_count(6, 9) == 0);
  CHECK(trotter::free_parameter_count(6, 14) == 5);
  CHECK(trotter::free_parameter_count(2, 1) == 0);
}

TEST_CASE("validity flags broken sum rules") {
  auto bad = TrotterScheme::from_ramps({0.4}, {0.5});
  CHECK_FALSE(bad.is_valid());
  CHECK(leapfrog().is_valid());
}
