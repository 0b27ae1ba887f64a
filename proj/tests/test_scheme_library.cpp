#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <trotter/scheme_library.hpp>

using namespace trotter;
using Catch::Matchers::ContainsSubstring;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("trotter-test-" + name);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("built-in catalog has the reference schemes") {
  const auto& all = builtin_schemes();
  REQUIRE(all.size() == 3);

  const auto& lf = get_builtin("leapfrog");
  CHECK(lf.order == 2);
  CHECK(lf.cycles() == 1);
  CHECK(lf.scheme.ramp_c()[0] == Complex(0.5));
  CHECK(lf.scheme.ramp_d()[0] == Complex(0.5));
  CHECK(provenance_token(lf.provenance) == "paper-table");
  // Eff_2 = 24/sqrt(5) for the single-cycle second-order scheme.
  CHECK(std::stod(lf.metadata.at("eff")) == Catch::Approx(24.0 / std::sqrt(5.0)).epsilon(1e-12));

  const auto& t2 = get_builtin("paper-n4-q6");
  CHECK(t2.order == 4);
  CHECK(t2.cycles() == 6);
  CHECK(provenance_token(t2.provenance) == "paper-table");

  const auto& t3 = get_builtin("paper-n6-q14");
  CHECK(t3.order == 6);
  CHECK(t3.cycles() == 14);
  CHECK(t3.metadata.at("basis-id") == kCommutatorBasisId);
}

TEST_CASE("built-in ramps carry the tabulated digits") {
  const auto& t2 = get_builtin("paper-n4-q6");
  const auto c = t2.scheme.ramp_c();
  const auto d = t2.scheme.ramp_d();
  const double expected[] = {0.074082572180463262, 0.232923088374338803,
                             0.296820560634668408, 0.122086989386933251,
                             -0.350153632343424469, 0.124240421767020743};
  for (int i = 0; i < 6; ++i) {
    // Stage lists are canonical and ramps are derived views, so the table
    // digits are reproduced to rounding, not bitwise.
    CHECK(std::abs(c[i].real() - expected[i]) <= 5e-16);
    CHECK(std::abs(d[i].real() - expected[5 - i]) <= 5e-16);  // palindromic
    CHECK(c[i].imag() == 0.0);
  }
  Complex sum = 0;
  for (const auto& x : c) sum += x;
  CHECK(std::abs(sum - Complex(0.5)) < 1e-15);
}

TEST_CASE("built-ins pass full verification and carry merit metadata") {
  for (const auto& rec : builtin_schemes()) {
    CHECK_NOTHROW(verify_scheme_record(rec));
    CHECK(rec.metadata.count("err") == 1);
    CHECK(rec.metadata.count("eff") == 1);
    CHECK(rec.metadata.count("xbar") == 1);
    // Metadata is engine-computed, so it must agree with a fresh evaluation.
    const auto ec = compute_error_coefficients(rec.scheme);
    CHECK(std::stod(rec.metadata.at("err")) ==
          Catch::Approx(error_norm(ec, rec.order)).epsilon(1e-15));
  }
}

TEST_CASE("unknown built-in name lists the alternatives") {
  CHECK_THROWS_MATCHES(get_builtin("nope"), std::invalid_argument,
                       Catch::Matchers::MessageMatches(ContainsSubstring("leapfrog") &&
                                                       ContainsSubstring("paper-n6-q14")));
}

TEST_CASE("ramp record round-trips through a file") {
  SchemeRecord rec;
  rec.name = "third-split";
  rec.order = 2;
  rec.provenance = Provenance::Derived;
  rec.source = "synthetic scheme with non-terminating binary ramps";
  rec.metadata["note"] = "value with   spaces kept verbatim";
  rec.scheme = TrotterScheme::from_ramps({1.0 / 3.0, 1.0 / 6.0}, {1.0 / 7.0, 5.0 / 14.0});

  const auto path = temp_file("roundtrip.scheme");
  save_scheme(rec, path);
  const auto back = load_scheme(path);

  CHECK(back.name == rec.name);
  CHECK(back.order == rec.order);
  CHECK(back.provenance == rec.provenance);
  CHECK(back.source == rec.source);
  CHECK(back.representation == "ramp");
  CHECK(back.verify_order);
  CHECK(back.metadata.at("note") == "value with   spaces kept verbatim");
  const auto c0 = rec.scheme.ramp_c(), c1 = back.scheme.ramp_c();
  const auto d0 = rec.scheme.ramp_d(), d1 = back.scheme.ramp_d();
  for (std::size_t i = 0; i < c0.size(); ++i) {
    // Ramps are reconstructed from the canonical stage storage, so agreement
    // is to rounding, not necessarily bitwise.
    CHECK(std::abs(c1[i] - c0[i]) <= 1e-16);
    CHECK(std::abs(d1[i] - d0[i]) <= 1e-16);
  }
  std::filesystem::remove(path);
}

TEST_CASE("stage record with complex coefficients round-trips bitwise") {
  // Stage lists are the canonical storage, so this round trip is exact.
  const Complex a1(0.2, 0.05), b1(0.3, -0.1);
  const Complex a2 = Complex(1.0) - 2.0 * a1;
  const Complex b2 = Complex(1.0) - 2.0 * b1;
  SchemeRecord rec;
  rec.name = "complex-stages";
  rec.order = 2;
  rec.representation = "stage";
  rec.verify_order = false;  // the order check targets real schemes
  // Palindromic stage lists with exact sums 1, so the ramp sum rules hold.
  const std::vector<Complex> sa = {a1, a2 * 0.5, a2 * 0.5, a1};
  const std::vector<Complex> sb = {b1, b2, b1};
  rec.scheme = TrotterScheme::from_stages(sa, sb);

  const auto path = temp_file("complex.scheme");
  save_scheme(rec, path);
  const auto back = load_scheme(path);
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(back.scheme.stage_a[i] == sa[i]);
  for (std::size_t i = 0; i < sb.size(); ++i) CHECK(back.scheme.stage_b[i] == sb[i]);
  CHECK(back.representation == "stage");
  CHECK_FALSE(back.verify_order);
  std::filesystem::remove(path);
}

TEST_CASE("loading rejects broken files with specific messages") {
  const auto path = temp_file("broken.scheme");
  auto expect_throw = [&](const std::string& text, const std::string& needle) {
    write_file(path, text);
    CHECK_THROWS_MATCHES(load_scheme(path), std::runtime_error,
                         Catch::Matchers::MessageMatches(ContainsSubstring(needle)));
  };

  SECTION("ramp sums off 1/2") {
    expect_throw("version 1\nname bad\norder 2\ncycles 1\nramp-c 0.49\nramp-d 0.5\n",
                 "ramp sums must equal 1/2");
  }
  SECTION("declared order not reached") {
    expect_throw("version 1\nname bad\norder 4\ncycles 1\nramp-c 0.5\nramp-d 0.5\n",
                 "does not reach declared order 4");
  }
  SECTION("unsupported version") {
    expect_throw("version 2\nname bad\norder 2\ncycles 1\nramp-c 0.5\nramp-d 0.5\n",
                 "unsupported version");
  }
  SECTION("unknown key") {
    expect_throw("version 1\nname bad\norder 2\ncycles 1\nramps-c 0.5\nramp-d 0.5\n",
                 "unknown key 'ramps-c'");
  }
  SECTION("missing ramp-d") {
    expect_throw("version 1\nname bad\norder 2\ncycles 1\nramp-c 0.5\n",
                 "wants ramp-c and ramp-d");
  }
  SECTION("mixed representations") {
    expect_throw(
        "version 1\nname bad\norder 2\ncycles 1\nramp-c 0.5\nramp-d 0.5\nstage-b 1\n",
        "mixed ramp and stage");
  }
  SECTION("cycle count disagrees with the list") {
    expect_throw("version 1\nname bad\norder 2\ncycles 2\nramp-c 0.5\nramp-d 0.5\n",
                 "exactly 'cycles' entries");
  }
  SECTION("unknown provenance") {
    expect_throw(
        "version 1\nname bad\norder 2\ncycles 1\nprovenance guess\nramp-c 0.5\nramp-d 0.5\n",
        "unknown provenance");
  }
  SECTION("malformed number") {
    expect_throw("version 1\nname bad\norder 2\ncycles 1\nramp-c 0.5x\nramp-d 0.5\n",
                 "malformed number");
  }
  SECTION("missing file") {
    std::filesystem::remove(path);
    CHECK_THROWS_MATCHES(load_scheme(path), std::runtime_error,
                         Catch::Matchers::MessageMatches(ContainsSubstring("cannot open")));
  }
  std::filesystem::remove(path);
}

TEST_CASE("order verification beyond degree 7 uses the escape hatch") {
  // A genuine eighth-order scheme: the symmetric triple composition of the
  // sixth-order seven-cycle scheme with x1 = 1/(2 - 2^(1/7)).  Ramps of a
  // composition are the concatenated scaled ramp lists.
  const auto& y = load_scheme(default_scheme_directory() / "yoshida-n6-q7.scheme");
  const double x1 = 1.0 / (2.0 - std::pow(2.0, 1.0 / 7.0));
  const double x0 = 1.0 - 2.0 * x1;
  std::vector<Complex> c, d;
  for (double f : {x1, x0, x1}) {
    for (const auto& ci : y.scheme.ramp_c()) c.push_back(f * ci);
    for (const auto& di : y.scheme.ramp_d()) d.push_back(f * di);
  }
  SchemeRecord rec;
  rec.name = "triple-jump-n8";
  rec.order = 8;
  rec.scheme = TrotterScheme::from_ramps(c, d);
  // Order 8 is fully checkable at max degree 7: all lower odd blocks and the
  // even blocks must vanish.
  CHECK_NOTHROW(verify_scheme_record(rec));

  // An order-10 claim cannot be refuted at this truncation depth, so it also
  // passes the partial check; that is the documented semantics...
  rec.order = 10;
  CHECK_NOTHROW(verify_scheme_record(rec));
  // ...whereas claiming order 8 for the base sixth-order scheme fails on its
  // nonzero degree-7 block, and verify-order=false waives the check.
  SchemeRecord claim = y;
  claim.order = 8;
  CHECK_THROWS_MATCHES(verify_scheme_record(claim), std::runtime_error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("degree-7")));
  claim.verify_order = false;
  CHECK_NOTHROW(verify_scheme_record(claim));
}

TEST_CASE("bundled data directory loads, verifies, and is byte-stable") {
  const auto dir = default_scheme_directory();
  REQUIRE(std::filesystem::exists(dir));
  const auto files = load_scheme_directory(dir);
  REQUIRE(files.size() >= 6);

  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".scheme") continue;
    const auto rec = load_scheme(entry.path());
    const auto copy = temp_file("resave.scheme");
    save_scheme(rec, copy);
    INFO(entry.path().filename().string());
    CHECK(read_file(copy) == read_file(entry.path()));
    std::filesystem::remove(copy);
  }

  const auto all = bundled_schemes(dir);
  CHECK(all.size() == files.size() + builtin_schemes().size());
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i - 1].name != all[i].name);
    CHECK(std::tie(all[i - 1].order, all[i - 1].scheme.cycles) <=
          std::tie(all[i].order, all[i].scheme.cycles));
  }
  // The expected bundle.
  for (const char* name : {"leapfrog", "omelyan-n2-q2", "forest-ruth-n4-q3", "suzuki-n4-q5",
                           "blanes-moan-n4-q6", "paper-n4-q6", "yoshida-n6-q7", "opt-n6-q10",
                           "paper-n6-q14"})
    CHECK_NOTHROW(find_scheme(name, dir));
  CHECK_THROWS_AS(find_scheme("missing-scheme", dir), std::invalid_argument);
}

TEST_CASE("duplicate names across built-ins and files are rejected") {
  const auto dir = temp_file("dupdir");
  std::filesystem::create_directories(dir);
  SchemeRecord rec = get_builtin("leapfrog");
  save_scheme(rec, dir / "leapfrog.scheme");
  CHECK_THROWS_MATCHES(bundled_schemes(dir), std::runtime_error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("duplicate scheme name")));
  std::filesystem::remove_all(dir);
}

TEST_CASE("scheme directory resolution honours the environment override") {
  const auto dir = temp_file("envdir");
  std::filesystem::create_directories(dir);
  setenv("TROTTER_DATA_DIR", dir.c_str(), 1);
  CHECK(default_scheme_directory() == dir);
  unsetenv("TROTTER_DATA_DIR");
#ifdef TROTTER_DATA_DIR
  CHECK(default_scheme_directory() == std::filesystem::path(TROTTER_DATA_DIR));
#endif
  CHECK(load_scheme_directory(dir).empty());
  CHECK(load_scheme_directory(dir / "does-not-exist").empty());
  std::filesystem::remove_all(dir);
}
