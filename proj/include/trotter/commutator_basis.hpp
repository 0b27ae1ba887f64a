#pragma once

// Nested-commutator bases of the free Lie algebra on {A, B} at the odd
// degrees used by the error analysis, plus least-squares projection of a
// degree component of a series onto its basis.
//
// Degrees 1, 3, 5 use the conventional bases
//   degree 1:  A, B
//   degree 3:  [A,[A,B]], [B,[B,A]]
//   degree 5:  [A,[A,[A,[A,B]]]], [A,[A,[B,[A,B]]]], [B,[A,[A,[A,B]]]],
//              [A,[B,[B,[B,A]]]], [B,[B,[A,[B,A]]]], [B,[B,[B,[B,A]]]]
// so that a degree-5 coefficient vector reverses under the A<->B exchange.
// Degree 7 has no conventional published basis; it is generated
// deterministically from the Lyndon words of length 7: each of the nine
// Lyndon classes with at most three B's contributes the right-nested
// bracket of one of its rotations (the final two letters must differ or the
// bracket vanishes), chosen by a depth-first search — classes in lexical
// order, rotation offsets in increasing order — that keeps the set together
// with its A<->B mirrors at full rank.  Elements 10..18 are the mirrors of
// elements 9..1, mirroring the degree-5 ordering convention.  The realized
// set is checked to have full rank 18 (the Witt dimension at degree 7).

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <string>
#include <vector>

#include "series.hpp"

namespace trotter {

// Dimension of the degree-d component of the free Lie algebra on two
// generators (Witt's formula).
inline int lie_dimension(int degree) {
  if (degree < 1) throw std::domain_error("lie_dimension: degree must be positive");
  auto mobius = [](int n) {
    int result = 1;
    for (int p = 2; p * p <= n; ++p) {
      if (n % p == 0) {
        n /= p;
        if (n % p == 0) return 0;
        result = -result;
      }
    }
    if (n > 1) result = -result;
    return result;
  };
  long sum = 0;
  for (int e = 1; e <= degree; ++e)
    if (degree % e == 0) sum += mobius(e) * (1L << (degree / e));
  return int(sum / degree);
}

namespace detail {

// Word-algebra expansion of the right-nested bracket
// [x1,[x2,...[x_{d-1}, x_d]...]] as a dense vector over degree-d words.
inline Eigen::VectorXd right_nested_expansion(const std::vector<Generator>& letters) {
  const int d = int(letters.size());
  Eigen::VectorXd cur = Eigen::VectorXd::Zero(2);
  cur[letters.back() == Generator::A ? 0 : 1] = 1.0;
  for (int j = d - 2; j >= 0; --j) {
    const int deg = d - 1 - j;                      // degree of cur
    const std::uint32_t bit = letters[j] == Generator::A ? 0u : 1u;
    Eigen::VectorXd next = Eigen::VectorXd::Zero(1L << (deg + 1));
    for (std::uint32_t w = 0; w < (1u << deg); ++w) {
      if (cur[w] == 0.0) continue;
      next[(std::uint64_t(bit) << deg) | w] += cur[w];  // x * cur
      next[(std::uint64_t(w) << 1) | bit] -= cur[w];    // - cur * x
    }
    cur = std::move(next);
  }
  return cur;
}

inline std::string bracket_label(const std::vector<Generator>& letters) {
  std::string s;
  for (std::size_t j = 0; j + 1 < letters.size(); ++j) {
    s += '[';
    s += letters[j] == Generator::A ? 'A' : 'B';
    s += ',';
  }
  s += letters.back() == Generator::A ? 'A' : 'B';
  s.append(letters.size() - 1, ']');
  return s;
}

}  // namespace detail

class CommutatorBasis {
 public:
  explicit CommutatorBasis(int degree) : degree_(degree) {
    switch (degree) {
      case 1:
        add({Generator::A});
        add({Generator::B});
        break;
      case 3:
        add(parse("AAB"));
        add(parse("BBA"));
        break;
      case 5:
        add(parse("AAAAB"));
        add(parse("AABAB"));
        add(parse("BAAAB"));
        add(parse("ABBBA"));
        add(parse("BBABA"));
        add(parse("BBBBA"));
        break;
      case 7:
        build_degree7();
        break;
      default:
        throw std::domain_error("commutator basis: only odd degrees 1, 3, 5, 7 are defined");
    }
    finalize();
  }

  int degree() const { return degree_; }
  int size() const { return int(sequences_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::vector<Generator>>& sequences() const { return sequences_; }

  // n x 2^degree matrix; row i is the word expansion of basis element i.
  const Eigen::MatrixXd& expansion() const { return expansion_; }

  // Least-squares coordinates of a degree block in this basis, together
  // with the residual norm of the non-Lie remainder.
  template <class Scalar>
  struct Projection {
    std::vector<Scalar> coords;
    double residual = 0;
    double block_norm = 0;
  };

  template <class Scalar>
  Projection<Scalar> project(std::span<const Scalar> block) const {
    if (block.size() != std::size_t(1) << degree_)
      throw std::invalid_argument("commutator basis: degree block has the wrong size");
    Projection<Scalar> p;
    p.coords.resize(size());
    if constexpr (std::is_same_v<Scalar, double>) {
      Eigen::Map<const Eigen::VectorXd> w(block.data(), block.size());
      Eigen::VectorXd x = qr_.solve(w);
      p.residual = (expansion_.transpose() * x - w).norm();
      p.block_norm = w.norm();
      for (int i = 0; i < size(); ++i) p.coords[i] = x[i];
    } else {
      Eigen::VectorXd re(block.size()), im(block.size());
      for (std::size_t i = 0; i < block.size(); ++i) {
        re[i] = block[i].real();
        im[i] = block[i].imag();
      }
      Eigen::VectorXd xr = qr_.solve(re), xi = qr_.solve(im);
      p.residual = std::hypot((expansion_.transpose() * xr - re).norm(),
                              (expansion_.transpose() * xi - im).norm());
      p.block_norm = std::hypot(re.norm(), im.norm());
      for (int i = 0; i < size(); ++i) p.coords[i] = Scalar(xr[i], xi[i]);
    }
    return p;
  }

 private:
  static std::vector<Generator> parse(std::string_view s) {
    std::vector<Generator> v;
    for (char ch : s) v.push_back(ch == 'A' ? Generator::A : Generator::B);
    return v;
  }

  void add(std::vector<Generator> seq) {
    labels_.push_back(detail::bracket_label(seq));
    rows_.push_back(detail::right_nested_expansion(seq));
    sequences_.push_back(std::move(seq));
  }

  static std::vector<Generator> mirrored(const std::vector<Generator>& seq) {
    std::vector<Generator> m;
    m.reserve(seq.size());
    for (auto g : seq) m.push_back(g == Generator::A ? Generator::B : Generator::A);
    return m;
  }

  void build_degree7() {
    // Lyndon words of length 7 over {A < B} via Duval's algorithm.
    std::vector<std::vector<Generator>> lyndon;
    std::vector<int> w{-1};
    while (!w.empty()) {
      ++w.back();
      const int m = int(w.size());
      if (m == 7) {
        std::vector<Generator> seq;
        for (int x : w) seq.push_back(x == 0 ? Generator::A : Generator::B);
        lyndon.push_back(std::move(seq));
      }
      while (int(w.size()) < 7) w.push_back(w[w.size() - m]);
      while (!w.empty() && w.back() == 1) w.pop_back();
    }
    // One rotation per Lyndon class with at most three B's, paired with its
    // A<->B mirror.  Right-nested brackets of different rotations are often
    // collinear, so a pure first-fit choice can paint itself into a corner;
    // a depth-first search over the eligible rotations (classes in lexical
    // order, rotation offsets in increasing order) finds the canonical first
    // full-rank assignment.
    std::vector<std::vector<std::vector<Generator>>> options;
    for (const auto& word : lyndon) {
      int nb = 0;
      for (auto g : word) nb += g == Generator::B ? 1 : 0;
      if (nb > 3) continue;
      std::vector<std::vector<Generator>> el;
      for (int r = 0; r < 7; ++r) {
        std::vector<Generator> rot(word.begin() + r, word.end());
        rot.insert(rot.end(), word.begin(), word.begin() + r);
        if (rot[5] != rot[6]) el.push_back(std::move(rot));
      }
      options.push_back(std::move(el));
    }
    Eigen::MatrixXd stacked(18, 128);
    std::vector<std::vector<Generator>> picked;
    auto dfs = [&](auto&& self, std::size_t k, int rows) -> bool {
      if (k == options.size()) return rows == 18;
      for (const auto& rot : options[k]) {
        stacked.row(rows) = detail::right_nested_expansion(rot).transpose();
        stacked.row(rows + 1) = detail::right_nested_expansion(mirrored(rot)).transpose();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> test(
            stacked.topRows(rows + 2).transpose());
        test.setThreshold(1e-9);
        if (test.rank() == rows + 2) {
          picked.push_back(rot);
          if (self(self, k + 1, rows + 2)) return true;
          picked.pop_back();
        }
      }
      return false;
    };
    if (!dfs(dfs, 0, 0))
      throw std::logic_error("commutator basis: degree-7 construction failed");
    for (const auto& seq : picked) add(seq);
    for (auto it = picked.rbegin(); it != picked.rend(); ++it) add(mirrored(*it));
  }

  void finalize() {
    expansion_.resize(size(), 1L << degree_);
    for (int i = 0; i < size(); ++i) expansion_.row(i) = rows_[i].transpose();
    qr_.compute(expansion_.transpose());
    if (qr_.rank() != size())
      throw std::logic_error("commutator basis: expansion matrix is rank deficient");
  }

  int degree_;
  std::vector<std::vector<Generator>> sequences_;
  std::vector<std::string> labels_;
  std::vector<Eigen::VectorXd> rows_;
  Eigen::MatrixXd expansion_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

// Shared, lazily constructed bases.
inline const CommutatorBasis& commutator_basis(int degree) {
  static const CommutatorBasis b1(1), b3(3), b5(5), b7(7);
  switch (degree) {
    case 1: return b1;
    case 3: return b3;
    case 5: return b5;
    case 7: return b7;
    default:
      throw std::domain_error("commutator basis: only odd degrees 1, 3, 5, 7 are defined");
  }
}

// Coordinates of the degree-d component of a series in the commutator
// basis.  Throws if the component has a genuine non-Lie part (relative
// residual above 1e-10), which signals a broken invariant upstream.  Blocks
// at the round-off floor of the whole series are treated as zero rather
// than rejected, so that e.g. the vanishing degree-5 component of an
// order-6 scheme projects cleanly.
template <class Scalar>
std::vector<Scalar> project_onto_basis(const BasicSeries<Scalar>& s, int degree) {
  const auto& basis = commutator_basis(degree);
  auto p = basis.project<Scalar>(s.degree_block(degree));
  if (p.residual > 1e-10 * p.block_norm && p.residual > 1e-13 * (1.0 + s.norm()))
    throw std::domain_error(
        "project_onto_basis: degree component has a non-Lie part (residual " +
        std::to_string(p.residual) + " vs block norm " + std::to_string(p.block_norm) + ")");
  return std::move(p.coords);
}

}  // namespace trotter
