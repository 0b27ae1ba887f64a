#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <trotter/commutator_basis.hpp>

using trotter::commutator_basis;
using trotter::CommutatorBasis;
using trotter::Generator;
using trotter::lie_dimension;
using trotter::TruncatedSeries;
using Complex = std::complex<double>;

TEST_CASE("Witt dimensions of the free Lie algebra on two generators") {
  CHECK(lie_dimension(1) == 2);
  CHECK(lie_dimension(2) == 1);
  CHECK(lie_dimension(3) == 2);
  CHECK(lie_dimension(4) == 3);
  CHECK(lie_dimension(5) == 6);
  CHECK(lie_dimension(7) == 18);
  CHECK(lie_dimension(9) == 56);
}

TEST_CASE("basis sizes per degree") {
  CHECK(commutator_basis(1).size() == 2);
  CHECK(commutator_basis(3).size() == 2);
  CHECK(commutator_basis(5).size() == 6);
  CHECK(commutator_basis(7).size() == 18);
  CHECK_THROWS_AS(commutator_basis(2), std::domain_error);
  CHECK_THROWS_AS(commutator_basis(9), std::domain_error);
}

TEST_CASE("degree-3 expansions are the textbook ones") {
  const auto& b = commutator_basis(3);
  REQUIRE(b.labels()[0] == "[A,[A,B]]");
  REQUIRE(b.labels()[1] == "[B,[B,A]]");
  // [A,[A,B]] = AAB - 2 ABA + BAA.
  CHECK(b.expansion()(0, 0b001) == 1.0);
  CHECK(b.expansion()(0, 0b010) == -2.0);
  CHECK(b.expansion()(0, 0b100) == 1.0);
  CHECK(b.expansion()(0, 0b000) == 0.0);
  CHECK(b.expansion()(0, 0b111) == 0.0);
  // [B,[B,A]] = BBA - 2 BAB + ABB.
  CHECK(b.expansion()(1, 0b110) == 1.0);
  CHECK(b.expansion()(1, 0b101) == -2.0);
  CHECK(b.expansion()(1, 0b011) == 1.0);
}

TEST_CASE("degree-5 basis follows the conventional ordering") {
  const auto& b = commutator_basis(5);
  CHECK(b.labels()[0] == "[A,[A,[A,[A,B]]]]");
  CHECK(b.labels()[1] == "[A,[A,[B,[A,B]]]]");
  CHECK(b.labels()[2] == "[B,[A,[A,[A,B]]]]");
  CHECK(b.labels()[3] == "[A,[B,[B,[B,A]]]]");
  CHECK(b.labels()[4] == "[B,[B,[A,[B,A]]]]");
  CHECK(b.labels()[5] == "[B,[B,[B,[B,A]]]]");
}

TEST_CASE("letter exchange reverses the basis ordering") {
  // Element k must be the A<->B mirror of element n+1-k; on word indices the
  // mirror is bitwise complement.
  for (int degree : {5, 7}) {
    const auto& b = commutator_basis(degree);
    const int n = b.size();
    const std::uint32_t mask = (1u << degree) - 1;
    for (int i = 0; i < n; ++i)
      for (std::uint32_t w = 0; w <= mask; ++w)
        CHECK(b.expansion()(i, w) == b.expansion()(n - 1 - i, (~w) & mask));
  }
}

TEST_CASE("degree-7 basis is right-nested with nonvanishing inner bracket") {
  const auto& b = commutator_basis(7);
  REQUIRE(b.size() == 18);
  for (const auto& seq : b.sequences()) {
    REQUIRE(seq.size() == 7);
    CHECK(seq[5] != seq[6]);
  }
  // Expansion has full row rank: projection of each element returns the unit
  // coordinate vector.
  for (int i = 0; i < 18; ++i) {
    std::vector<Complex> block(128, 0.0);
    for (int w = 0; w < 128; ++w) block[w] = b.expansion()(i, w);
    auto p = b.project<Complex>(block);
    CHECK(p.residual < 1e-10);
    for (int j = 0; j < 18; ++j)
      CHECK(std::abs(p.coords[j] - (i == j ? 1.0 : 0.0)) < 1e-10);
  }
}

TEST_CASE("projection recovers random Lie combinations") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int degree : {3, 5, 7}) {
    const auto& b = commutator_basis(degree);
    TruncatedSeries s(7);
    std::vector<Complex> coeff(b.size());
    for (int i = 0; i < b.size(); ++i) {
      coeff[i] = Complex(u(rng), u(rng));
      for (std::uint32_t w = 0; w < (1u << degree); ++w)
        s.coefficient(degree, w) += coeff[i] * b.expansion()(i, w);
    }
    auto got = trotter::project_onto_basis(s, degree);
    for (int i = 0; i < b.size(); ++i) CHECK(std::abs(got[i] - coeff[i]) < 1e-12);
  }
}

TEST_CASE("non-Lie components are rejected") {
  TruncatedSeries s(3);
  s.coefficient(3, 0b001) = 1.0;  // the bare word AAB is not a Lie element
  CHECK_THROWS_AS(trotter::project_onto_basis(s, 3), std::domain_error);
}

TEST_CASE("round-off sized blocks are treated as zero, not rejected") {
  TruncatedSeries s(3);
  s.coefficient(1, 0) = 1.0;       // O(1) series content
  s.coefficient(3, 0b001) = 1e-16; // degree-3 junk at the round-off floor
  auto got = trotter::project_onto_basis(s, 3);
  CHECK(std::abs(got[0]) < 1e-15);
  CHECK(std::abs(got[1]) < 1e-15);
}
