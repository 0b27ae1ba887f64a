#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <trotter/error_functions.hpp>

using namespace trotter;

namespace {
TrotterScheme leapfrog() { return TrotterScheme::from_ramps({0.5}, {0.5}); }
}

TEST_CASE("leapfrog error norm and efficiency") {
  auto ec = compute_error_coefficients(leapfrog());
  // Err_2 = sqrt((1/24)^2 + (1/12)^2) = sqrt(5)/24.
  CHECK(std::abs(error_norm(ec, 2) - std::sqrt(5.0) / 24.0) < 1e-15);
  CHECK(std::abs(efficiency(error_norm(ec, 2), 1, 2) - 24.0 / std::sqrt(5.0)) < 1e-12);
  CHECK(efficiency(0.0, 3, 4) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(efficiency(-1.0, 3, 4), std::domain_error);
}

TEST_CASE("chi squared with unit weight on order 2") {
  auto ec = compute_error_coefficients(leapfrog());
  Weights w;
  w.w0 = 1.0;
  w.w2 = 1.0;
  CHECK(std::abs(chi_squared(ec, w) - 5.0 / 576.0) < 1e-15);
}

TEST_CASE("default weight schedule follows the cycle windows") {
  CHECK(default_weights(3, 4).w4 == 0.1);
  CHECK(default_weights(6, 4).w4 == 0.1);
  CHECK(default_weights(7, 6).w4 == 100.0);
  CHECK(default_weights(8, 6).w6 == 0.0);
  CHECK(default_weights(9, 6).w4 == 500.0);
  CHECK(default_weights(14, 6).w6 == 1.0);
  CHECK(default_weights(1, 2).w2 == 1.0);
  CHECK_THROWS_AS(default_weights(7, 4), std::domain_error);
  CHECK_THROWS_AS(default_weights(2, 6), std::domain_error);
}

TEST_CASE("origin distance") {
  CHECK(origin_distance(leapfrog()) == 0.0);
  auto uniform = TrotterScheme::from_ramps({0.1, 0.1, 0.1, 0.1, 0.1},
                                           {0.1, 0.1, 0.1, 0.1, 0.1});
  CHECK(origin_distance(uniform) == 0.0);
  // One ramp parameter displaced by delta adds sqrt(2)*|delta|.
  auto shifted = TrotterScheme::from_ramps({0.25 + 0.125, 0.25 - 0.125}, {0.25, 0.25});
  CHECK(std::abs(origin_distance(shifted) - std::sqrt(2.0 * 2.0 * 0.125 * 0.125)) < 1e-15);
}

TEST_CASE("combined error mixes the two distances") {
  CHECK(combined_error(0.3, 10.0, 0.0) == 0.3);
  CHECK(combined_error(0.3, 10.0, 1.0) == 10.0);
  CHECK(std::abs(combined_error(1.0, 1.0, 0.5) - std::sqrt(0.5)) < 1e-15);
  CHECK_THROWS_AS(combined_error(1.0, 1.0, -0.1), std::domain_error);
  CHECK_THROWS_AS(combined_error(1.0, 1.0, 1.1), std::domain_error);
}

TEST_CASE("pearson correlation") {
  std::vector<double> x{1, 2, 3}, y{1, 3, 2};
  CHECK(std::abs(pearson_correlation(x, y) - 0.5) < 1e-15);
  std::vector<double> z{2, 4, 6};
  CHECK(std::abs(pearson_correlation(x, z) - 1.0) < 1e-15);
  std::vector<double> flat{1, 1, 1};
  CHECK_THROWS_AS(pearson_correlation(x, flat), std::domain_error);
  std::vector<double> shorter{1};
  CHECK_THROWS_AS(pearson_correlation(shorter, shorter), std::domain_error);
}

TEST_CASE("experimental efficiency formula") {
  // Eff = t (omega0 q / h)^n / delta.
  const double v = experimental_efficiency(10.0, 2.0, 3, 0.5, 2, 4.0);
  CHECK(std::abs(v - 10.0 * 144.0 / 4.0) < 1e-12);
  CHECK_THROWS_AS(experimental_efficiency(10.0, 2.0, 3, 0.5, 2, 0.0), std::domain_error);
}

TEST_CASE("parallel error family closed forms") {
  auto f0 = parallel_error_family(0.0);
  CHECK(std::abs(f0.alpha - Complex(1.0 / 12.0)) < 1e-16);
  CHECK(std::abs(f0.beta - Complex(1.0 / 24.0)) < 1e-16);

  auto fq = parallel_error_family(0.25);
  CHECK(std::abs(fq.parallel - Complex(1.0 / 96.0)) < 1e-16);

  // Complex zeros of the parallel component, exact to machine precision.
  const Complex root1 = 0.25 * Complex(1.0, 1.0 / std::sqrt(3.0));
  const Complex root2 = 0.25 * Complex(1.0, -1.0 / std::sqrt(3.0));
  CHECK(std::abs(parallel_error_family(root1).parallel) < 1e-15);
  CHECK(std::abs(parallel_error_family(root2).parallel) < 1e-15);
}

TEST_CASE("real-line minimum of the parallel component sits at 1/4") {
  // Independent grid oracle: scan the modulus on a dense real grid.
  double best = 1e300, best_l = 0;
  for (int i = 0; i <= 200000; ++i) {
    const double l = -1.0 + 2.0 * i / 200000.0;
    const double v = std::abs(parallel_error_family(l).parallel);
    if (v < best) {
      best = v;
      best_l = l;
    }
  }
  CHECK(std::abs(best_l - 0.25) < 1e-5);
  CHECK(std::abs(best - 1.0 / 96.0) < 1e-9);
}

TEST_CASE("family closed form matches the series engine") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (int it = 0; it < 20; ++it) {
    const Complex lambda(u(rng), 0.3 * u(rng));
    auto f = parallel_error_family(lambda);
    auto ec = compute_error_coefficients(parallel_family_scheme(lambda), 3);
    // The closed form quotes the coefficient of [B,[A,B]]; the engine
    // projects onto [B,[B,A]], hence the sign flip on beta.
    CHECK(std::abs(ec.alpha() - f.alpha) < 1e-12);
    CHECK(std::abs(ec.beta() + f.beta) < 1e-12);
  }
}

TEST_CASE("merit report summarizes a scheme") {
  auto r = make_merit_report(leapfrog(), 2);
  CHECK(r.order == 2);
  CHECK(r.cycles == 1);
  CHECK(std::abs(r.err - std::sqrt(5.0) / 24.0) < 1e-15);
  CHECK(r.origin_dist == 0.0);
  CHECK(r.sum_rule_residual < 1e-15);
  CHECK(r.constraint_residual == 0.0);
  CHECK(r.valid);
  CHECK(r.symmetric);
}
