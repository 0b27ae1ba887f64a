#pragma once
// Named scheme catalog: a small set of built-in coefficient tables plus a
// line-oriented text format for saving and loading schemes from disk.
//
// Built-ins cover the reference schemes the rest of the toolkit benchmarks
// against; the data directory bundled with the repository adds the classical
// compositions and schemes produced by the optimizer in this project.  Files
// are the extension point for user schemes: anything that passes the sum
// rules (and, unless disabled, the declared-order check) participates in
// benchmarks exactly like a built-in.

#include <trotter/error_functions.hpp>
#include <trotter/scheme.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace trotter {

// Identifier for the degree-7 commutator basis built by commutator_basis(7).
// Order-6 error norms depend on this choice, so catalog metadata that records
// them carries the id; readers can tell whether a stored err/eff value is
// comparable with the engine they are running.
inline constexpr std::string_view kCommutatorBasisId = "lyndon-dfs-v1";

enum class Provenance {
  PaperTable,    // coefficients transcribed from a published table
  Derived,       // produced by this toolkit (optimizer or closed form)
  ExternalFile,  // transcribed from third-party literature or user files
};

inline std::string_view provenance_token(Provenance p) {
  switch (p) {
    case Provenance::PaperTable: return "paper-table";
    case Provenance::Derived: return "derived";
    case Provenance::ExternalFile: return "external-file";
  }
  throw std::logic_error("provenance_token: unhandled enum value");
}

inline std::optional<Provenance> parse_provenance(std::string_view s) {
  if (s == "paper-table") return Provenance::PaperTable;
  if (s == "derived") return Provenance::Derived;
  if (s == "external-file") return Provenance::ExternalFile;
  return std::nullopt;
}

// A catalog entry: the scheme itself plus everything needed to cite it,
// verify it, and format it for output.
struct SchemeRecord {
  std::string name;
  int order = 2;  // convergence order the entry claims
  TrotterScheme scheme;
  Provenance provenance = Provenance::Derived;
  std::string representation = "ramp";  // coefficient form of the source: ramp|stage
  bool verify_order = true;             // check the claim on load (degrees <= 7)
  std::string source;                   // free-text origin note
  std::map<std::string, std::string> metadata;  // err / eff / xbar / basis-id ...

  int cycles() const { return scheme.cycles; }
};

namespace detail {

// Shortest decimal string that round-trips to the same double.
inline std::string format_real(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::logic_error("format_real: to_chars failed");
  return std::string(buf, ptr);
}

// Real values print bare; complex ones as "re,im" (no spaces, so the token
// survives whitespace splitting).
inline std::string format_coefficient(const Complex& z) {
  if (z.imag() == 0.0) return format_real(z.real());
  return format_real(z.real()) + "," + format_real(z.imag());
}

inline double parse_real_token(std::string_view tok, const std::string& context) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw std::runtime_error(context + ": malformed number '" + std::string(tok) + "'");
  return v;
}

inline Complex parse_coefficient_token(std::string_view tok, const std::string& context) {
  const auto comma = tok.find(',');
  if (comma == std::string_view::npos) return Complex(parse_real_token(tok, context), 0.0);
  return Complex(parse_real_token(tok.substr(0, comma), context),
                 parse_real_token(tok.substr(comma + 1), context));
}

inline std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<Complex> parse_coefficient_list(std::span<const std::string_view> toks,
                                                   const std::string& context) {
  std::vector<Complex> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(parse_coefficient_token(t, context));
  return out;
}

}  // namespace detail

// Structural validation shared by loading and catalog construction: the sum
// rules always, the declared order only when the record asks for it.  The
// order check covers everything observable at max_degree 7 — odd blocks of
// degree < order and, from order 3 up, the even blocks — so claims up to
// order 8 are fully checked and higher claims only partially (use
// verify_order = false for those).
inline void verify_scheme_record(const SchemeRecord& rec) {
  const auto c = rec.scheme.ramp_c();
  const auto d = rec.scheme.ramp_d();
  Complex sc = 0, sd = 0;
  for (const auto& x : c) sc += x;
  for (const auto& x : d) sd += x;
  constexpr double kSumTol = 1e-12;
  if (std::abs(sc - Complex(0.5)) > kSumTol || std::abs(sd - Complex(0.5)) > kSumTol)
    throw std::runtime_error("scheme '" + rec.name + "': ramp sums must equal 1/2 (got " +
                             detail::format_real(sc.real()) + ", " +
                             detail::format_real(sd.real()) + ")");
  if (rec.order < 1) throw std::runtime_error("scheme '" + rec.name + "': order must be >= 1");
  if (!rec.verify_order) return;

  const auto ec = compute_error_coefficients(rec.scheme);
  constexpr double kBlockTol = 1e-10;
  auto fail = [&](const std::string& what, double norm) {
    throw std::runtime_error("scheme '" + rec.name + "' does not reach declared order " +
                             std::to_string(rec.order) + ": " + what + " norm is " +
                             detail::format_real(norm));
  };
  if (std::abs(ec.nu - 1.0) > kBlockTol || std::abs(ec.sigma - 1.0) > kBlockTol)
    fail("degree-1 (consistency)", std::max(std::abs(ec.nu - 1.0), std::abs(ec.sigma - 1.0)));
  if (rec.order >= 3 && ec.max_even_norm > kBlockTol) fail("even-degree", ec.max_even_norm);
  for (int deg = 3; deg <= 7; deg += 2)
    if (deg < rec.order && error_norm(ec, deg - 1) > kBlockTol)
      fail("degree-" + std::to_string(deg), error_norm(ec, deg - 1));
}

// ---------------------------------------------------------------------------
// Text file format
//
//   # comment
//   version 1
//   name omelyan-n2-q2
//   order 2
//   cycles 2
//   representation ramp            (or: stage)
//   provenance derived             (paper-table | derived | external-file)
//   verify-order true              (optional, default true)
//   source free text to end of line   (optional)
//   ramp-c <q coefficients>        (representation ramp)
//   ramp-d <q coefficients>
//   stage-a <q+1 coefficients>     (representation stage)
//   stage-b <q coefficients>
//   meta <key> <value to end of line>  (optional, repeatable)
//
// Coefficients are shortest round-trip decimals; complex entries are a
// single "re,im" token.  Keys may appear in any order; unknown keys are
// rejected so typos fail loudly.
// ---------------------------------------------------------------------------

inline void save_scheme(const SchemeRecord& rec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_scheme: cannot open " + path.string());
  out << "version 1\n";
  out << "name " << rec.name << "\n";
  out << "order " << rec.order << "\n";
  out << "cycles " << rec.cycles() << "\n";
  out << "representation " << rec.representation << "\n";
  out << "provenance " << provenance_token(rec.provenance) << "\n";
  if (!rec.verify_order) out << "verify-order false\n";
  if (!rec.source.empty()) out << "source " << rec.source << "\n";
  auto write_list = [&](const char* key, std::span<const Complex> xs) {
    out << key;
    for (const auto& x : xs) out << ' ' << detail::format_coefficient(x);
    out << "\n";
  };
  if (rec.representation == "stage") {
    write_list("stage-a", rec.scheme.stage_a);
    write_list("stage-b", rec.scheme.stage_b);
  } else {
    write_list("ramp-c", rec.scheme.ramp_c());
    write_list("ramp-d", rec.scheme.ramp_d());
  }
  for (const auto& [k, v] : rec.metadata) out << "meta " << k << ' ' << v << "\n";
  if (!out) throw std::runtime_error("save_scheme: write to " + path.string() + " failed");
}

inline SchemeRecord load_scheme(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_scheme: cannot open " + path.string());

  SchemeRecord rec;
  std::optional<int> version, order, cycles;
  std::optional<std::vector<Complex>> ramp_c, ramp_d, stage_a, stage_b;
  std::string line;
  int line_no = 0;
  auto where = [&] { return path.filename().string() + ":" + std::to_string(line_no); };

  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = detail::split_tokens(line);
    if (toks.empty() || toks[0].front() == '#') continue;
    const std::string_view key = toks[0];
    const auto rest = std::span<const std::string_view>(toks).subspan(1);
    auto rest_text = [&]() -> std::string {
      const auto pos = line.find(std::string(key)) + key.size();
      const auto text = line.substr(pos);
      const auto start = text.find_first_not_of(" \t");
      return start == std::string::npos ? std::string() : text.substr(start);
    };
    auto one_int = [&](std::string_view what) {
      if (rest.size() != 1)
        throw std::runtime_error(where() + ": '" + std::string(what) + "' wants one value");
      return int(detail::parse_real_token(rest[0], where()));
    };
    if (key == "version") {
      version = one_int(key);
      if (*version != 1)
        throw std::runtime_error(where() + ": unsupported version " + std::to_string(*version));
    } else if (key == "name") {
      if (rest.size() != 1) throw std::runtime_error(where() + ": 'name' wants one token");
      rec.name = std::string(rest[0]);
    } else if (key == "order") {
      order = one_int(key);
    } else if (key == "cycles") {
      cycles = one_int(key);
    } else if (key == "representation") {
      if (rest.size() != 1 || (rest[0] != "ramp" && rest[0] != "stage"))
        throw std::runtime_error(where() + ": representation must be 'ramp' or 'stage'");
      rec.representation = std::string(rest[0]);
    } else if (key == "provenance") {
      if (rest.size() != 1)
        throw std::runtime_error(where() + ": 'provenance' wants one token");
      const auto p = parse_provenance(rest[0]);
      if (!p)
        throw std::runtime_error(where() + ": unknown provenance '" + std::string(rest[0]) +
                                 "' (expected paper-table, derived, or external-file)");
      rec.provenance = *p;
    } else if (key == "verify-order") {
      if (rest.size() != 1 || (rest[0] != "true" && rest[0] != "false"))
        throw std::runtime_error(where() + ": verify-order must be true or false");
      rec.verify_order = rest[0] == "true";
    } else if (key == "source") {
      rec.source = rest_text();
    } else if (key == "ramp-c") {
      ramp_c = detail::parse_coefficient_list(rest, where());
    } else if (key == "ramp-d") {
      ramp_d = detail::parse_coefficient_list(rest, where());
    } else if (key == "stage-a") {
      stage_a = detail::parse_coefficient_list(rest, where());
    } else if (key == "stage-b") {
      stage_b = detail::parse_coefficient_list(rest, where());
    } else if (key == "meta") {
      if (rest.size() < 2)
        throw std::runtime_error(where() + ": 'meta' wants a key and a value");
      const auto pos = line.find(std::string(rest[0])) + rest[0].size();
      const auto text = line.substr(pos);
      const auto start = text.find_first_not_of(" \t");
      rec.metadata[std::string(rest[0])] = text.substr(start);
    } else {
      throw std::runtime_error(where() + ": unknown key '" + std::string(key) + "'");
    }
  }

  if (!version) throw std::runtime_error(path.string() + ": missing 'version'");
  if (rec.name.empty()) throw std::runtime_error(path.string() + ": missing 'name'");
  if (!order) throw std::runtime_error(path.string() + ": missing 'order'");
  if (!cycles) throw std::runtime_error(path.string() + ": missing 'cycles'");
  rec.order = *order;

  if (rec.representation == "stage") {
    if (!stage_a || !stage_b)
      throw std::runtime_error(path.string() + ": stage representation wants stage-a and stage-b");
    if (ramp_c || ramp_d)
      throw std::runtime_error(path.string() + ": mixed ramp and stage coefficient lines");
    if (int(stage_b->size()) != *cycles || int(stage_a->size()) != *cycles + 1)
      throw std::runtime_error(path.string() + ": stage lists want cycles+1 and cycles entries");
    rec.scheme = TrotterScheme::from_stages(std::move(*stage_a), std::move(*stage_b));
  } else {
    if (!ramp_c || !ramp_d)
      throw std::runtime_error(path.string() + ": ramp representation wants ramp-c and ramp-d");
    if (stage_a || stage_b)
      throw std::runtime_error(path.string() + ": mixed ramp and stage coefficient lines");
    if (int(ramp_c->size()) != *cycles || int(ramp_d->size()) != *cycles)
      throw std::runtime_error(path.string() + ": ramp lists want exactly 'cycles' entries");
    rec.scheme = TrotterScheme::from_ramps(std::move(*ramp_c), std::move(*ramp_d));
  }

  verify_scheme_record(rec);
  return rec;
}

// ---------------------------------------------------------------------------
// Built-in schemes and the bundled data directory
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<Complex> parse_ramp_strings(std::span<const std::string_view> digits) {
  std::vector<Complex> out;
  out.reserve(digits.size());
  for (const auto& s : digits) out.emplace_back(parse_real_token(s, "builtin ramp"), 0.0);
  return out;
}

// err / eff / xbar / basis-id metadata computed with the running engine, so
// stored values always match what eval would print today.
inline void attach_merit_metadata(SchemeRecord& rec) {
  const auto ec = compute_error_coefficients(rec.scheme);
  const double err = error_norm(ec, rec.order);
  rec.metadata["err"] = format_real(err);
  rec.metadata["eff"] = format_real(efficiency(err, rec.cycles(), rec.order));
  rec.metadata["xbar"] = format_real(origin_distance(rec.scheme));
  if (rec.order >= 6) rec.metadata["basis-id"] = std::string(kCommutatorBasisId);
}

inline SchemeRecord make_builtin(std::string name, int order,
                                 std::span<const std::string_view> half_ramp,
                                 Provenance prov, std::string source) {
  SchemeRecord rec;
  rec.name = std::move(name);
  rec.order = order;
  rec.provenance = prov;
  rec.source = std::move(source);
  auto c = parse_ramp_strings(half_ramp);
  auto d = c;
  std::reverse(d.begin(), d.end());
  rec.scheme = TrotterScheme::from_ramps(std::move(c), std::move(d));
  attach_merit_metadata(rec);
  verify_scheme_record(rec);
  return rec;
}

}  // namespace detail

// The reference tables every benchmark leans on.  Ramps are embedded as the
// printed decimal strings and parsed once, so the stage product is built from
// exactly the tabulated digits (the derived ramp views reproduce them to
// rounding).
inline const std::vector<SchemeRecord>& builtin_schemes() {
  static const std::vector<SchemeRecord> schemes = [] {
    using sv = std::string_view;
    std::vector<SchemeRecord> out;

    static constexpr sv kLeapfrog[] = {"0.5"};
    out.push_back(detail::make_builtin(
        "leapfrog", 2, kLeapfrog, Provenance::PaperTable,
        "classical second-order splitting (Strang / velocity Verlet)"));

    static constexpr sv kN4Q6[] = {
        "0.074082572180463262",  "0.232923088374338803", "0.296820560634668408",
        "0.122086989386933251",  "-0.350153632343424469", "0.124240421767020743"};
    out.push_back(detail::make_builtin(
        "paper-n4-q6", 4, kN4Q6, Provenance::PaperTable,
        "tabulated fourth-order scheme, 6 cycles, highest-efficiency entry"));

    static constexpr sv kN6Q14[] = {
        "0.037251326545569924",  "0.120600278793781562",  "0.266062994460763541",
        "0.163668553338143183",  "0.071316838327437583",  "0.058117508592333414",
        "0.188707697234255120",  "-0.200016005078878524", "0.074145714537530386",
        "0.087345801243357893",  "0.044234977360777830",  "-0.230821838291030424",
        "-0.237197828922049295", "0.056583981858007803"};
    out.push_back(detail::make_builtin(
        "paper-n6-q14", 6, kN6Q14, Provenance::PaperTable,
        "tabulated sixth-order scheme, 14 cycles, highest-efficiency entry"));

    return out;
  }();
  return schemes;
}

inline const SchemeRecord& get_builtin(std::string_view name) {
  const auto& all = builtin_schemes();
  for (const auto& rec : all)
    if (rec.name == name) return rec;
  std::string msg = "unknown built-in scheme '" + std::string(name) + "'; available:";
  for (const auto& rec : all) msg += " " + rec.name;
  throw std::invalid_argument(msg);
}

// Bundled data directory: $TROTTER_DATA_DIR overrides the compiled-in path.
inline std::filesystem::path default_scheme_directory() {
  if (const char* env = std::getenv("TROTTER_DATA_DIR"); env && *env)
    return std::filesystem::path(env);
#ifdef TROTTER_DATA_DIR
  return std::filesystem::path(TROTTER_DATA_DIR);
#else
  return std::filesystem::path("data");
#endif
}

// Every *.scheme file in the directory, sorted by (order, cycles, name).
// Missing directory means an empty catalog, not an error.
inline std::vector<SchemeRecord> load_scheme_directory(const std::filesystem::path& dir) {
  std::vector<SchemeRecord> out;
  if (!std::filesystem::exists(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".scheme")
      out.push_back(load_scheme(entry.path()));
  std::sort(out.begin(), out.end(), [](const SchemeRecord& a, const SchemeRecord& b) {
    return std::tie(a.order, a.scheme.cycles, a.name) <
           std::tie(b.order, b.scheme.cycles, b.name);
  });
  return out;
}

// Built-ins plus the bundled directory, with duplicate names rejected loudly.
inline std::vector<SchemeRecord> bundled_schemes(
    const std::filesystem::path& dir = default_scheme_directory()) {
  std::vector<SchemeRecord> out = builtin_schemes();
  for (auto& rec : load_scheme_directory(dir)) {
    for (const auto& existing : out)
      if (existing.name == rec.name)
        throw std::runtime_error("duplicate scheme name '" + rec.name + "' in " + dir.string());
    out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end(), [](const SchemeRecord& a, const SchemeRecord& b) {
    return std::tie(a.order, a.scheme.cycles, a.name) <
           std::tie(b.order, b.scheme.cycles, b.name);
  });
  return out;
}

// Catalog lookup over built-ins plus the bundled directory.
inline SchemeRecord find_scheme(std::string_view name,
                                const std::filesystem::path& dir = default_scheme_directory()) {
  for (const auto& rec : bundled_schemes(dir))
    if (rec.name == name) return rec;
  std::string msg = "unknown scheme '" + std::string(name) + "'; available:";
  for (const auto& rec : bundled_schemes(dir)) msg += " " + rec.name;
  throw std::invalid_argument(msg);
}

}  // namespace trotter
