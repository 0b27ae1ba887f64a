#pragma once

// Truncated power series over the free associative algebra on two
// non-commuting generators A and B.  A series holds one coefficient per
// word up to a maximum word length ("degree").  Words of degree d are
// indexed by d-bit integers: the most significant bit encodes the first
// letter of the word, bit value 0 = A, 1 = B.  Concatenation of words is
// therefore (w1 << d2) | w2, and the product of two series is the
// coefficient-wise convolution over concatenation, truncated at the
// maximum degree.

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace trotter {

enum class Generator : int { A = 0, B = 1 };

inline constexpr int kDefaultMaxDegree = 7;

namespace detail {

// Slots preceding the degree-d block: 2^0 + ... + 2^(d-1) = 2^d - 1.
constexpr int word_offset(int degree) { return (1 << degree) - 1; }
constexpr int slot_count(int max_degree) { return (1 << (max_degree + 1)) - 1; }

inline double abs2(double x) { return x * x; }
inline double abs2(const std::complex<double>& x) { return std::norm(x); }

}  // namespace detail

template <class Scalar>
class BasicSeries {
 public:
  explicit BasicSeries(int max_degree = kDefaultMaxDegree)
      : max_degree_(max_degree), c_(detail::slot_count(max_degree), Scalar(0)) {
    if (max_degree < 1 || max_degree > 15)
      throw std::invalid_argument("series: max_degree must be in [1, 15]");
  }

  static BasicSeries unit(int max_degree = kDefaultMaxDegree) {
    BasicSeries s(max_degree);
    s.c_[0] = Scalar(1);
    return s;
  }

  static BasicSeries generator(Generator g, int max_degree = kDefaultMaxDegree) {
    BasicSeries s(max_degree);
    s.coefficient(1, g == Generator::A ? 0u : 1u) = Scalar(1);
    return s;
  }

  // exp(t g) truncated: coefficient t^k / k! on the word g^k.
  static BasicSeries exponential(Generator g, Scalar t, int max_degree = kDefaultMaxDegree) {
    BasicSeries s(max_degree);
    Scalar term(1);
    s.c_[0] = term;
    for (int k = 1; k <= max_degree; ++k) {
      term *= t / Scalar(double(k));
      s.coefficient(k, g == Generator::A ? 0u : (1u << k) - 1u) = term;
    }
    return s;
  }

  int max_degree() const { return max_degree_; }

  const Scalar& coefficient(int degree, std::uint32_t word) const {
    check_index(degree, word);
    return c_[detail::word_offset(degree) + word];
  }
  Scalar& coefficient(int degree, std::uint32_t word) {
    check_index(degree, word);
    return c_[detail::word_offset(degree) + word];
  }

  std::span<const Scalar> degree_block(int degree) const {
    check_index(degree, 0);
    return {c_.data() + detail::word_offset(degree), std::size_t(1) << degree};
  }
  std::span<Scalar> degree_block(int degree) {
    check_index(degree, 0);
    return {c_.data() + detail::word_offset(degree), std::size_t(1) << degree};
  }

  // Flat storage view: the unit slot first, then the degree blocks in order.
  std::span<const Scalar> slots() const { return c_; }
  std::span<Scalar> slots() { return c_; }

  bool operator==(const BasicSeries& o) const {
    return max_degree_ == o.max_degree_ && c_ == o.c_;
  }

  BasicSeries& operator+=(const BasicSeries& o) {
    check_shape(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  BasicSeries& operator-=(const BasicSeries& o) {
    check_shape(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  BasicSeries& operator*=(Scalar t) {
    for (auto& x : c_) x *= t;
    return *this;
  }
  BasicSeries& add_scaled(const BasicSeries& o, Scalar t) {
    check_shape(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += t * o.c_[i];
    return *this;
  }

  friend BasicSeries operator+(BasicSeries x, const BasicSeries& y) { return x += y; }
  friend BasicSeries operator-(BasicSeries x, const BasicSeries& y) { return x -= y; }
  friend BasicSeries operator*(BasicSeries x, Scalar t) { return x *= t; }
  friend BasicSeries operator*(Scalar t, BasicSeries x) { return x *= t; }

  // Truncating product: words beyond max_degree are dropped.
  friend BasicSeries operator*(const BasicSeries& x, const BasicSeries& y) {
    x.check_shape(y);
    const int D = x.max_degree_;
    BasicSeries r(D);
    for (int d1 = 0; d1 <= D; ++d1) {
      if (x.block_empty(d1)) continue;
      const Scalar* xb = x.c_.data() + detail::word_offset(d1);
      for (int d2 = 0; d2 + d1 <= D; ++d2) {
        if (y.block_empty(d2)) continue;
        const Scalar* yb = y.c_.data() + detail::word_offset(d2);
        Scalar* rb = r.c_.data() + detail::word_offset(d1 + d2);
        const std::uint32_t n1 = 1u << d1, n2 = 1u << d2;
        for (std::uint32_t w1 = 0; w1 < n1; ++w1) {
          const Scalar c1 = xb[w1];
          if (c1 == Scalar(0)) continue;
          Scalar* dst = rb + (std::size_t(w1) << d2);
          for (std::uint32_t w2 = 0; w2 < n2; ++w2) dst[w2] += c1 * yb[w2];
        }
      }
    }
    return r;
  }

  // In-place right multiplication by the single-generator polynomial
  // sum_k pow_coeff[k] g^k.  This is the work horse for appending stage
  // exponentials to a product: exp(t g) has pow_coeff[k] = t^k/k!, and the
  // cost is linear in the slot count rather than quadratic.
  BasicSeries& mul_right_generator_poly(Generator g, std::span<const Scalar> pow_coeff) {
    const int D = max_degree_;
    const int kmax = std::min<int>(D, int(pow_coeff.size()) - 1);
    if (kmax < 0) {
      for (auto& x : c_) x = Scalar(0);
      return *this;
    }
    for (int dd = D; dd >= 0; --dd) {  // destination degree, high to low
      Scalar* out = c_.data() + detail::word_offset(dd);
      const std::uint32_t nd = 1u << dd;
      // k = 0 term scales the block in place; k > 0 reads lower (still
      // untouched) blocks.
      const Scalar p0 = pow_coeff[0];
      if (p0 != Scalar(1))
        for (std::uint32_t w = 0; w < nd; ++w) out[w] *= p0;
      for (int k = 1; k <= kmax && k <= dd; ++k) {
        const int ds = dd - k;
        if (block_empty(ds)) continue;
        const Scalar pk = pow_coeff[k];
        if (pk == Scalar(0)) continue;
        const Scalar* src = c_.data() + detail::word_offset(ds);
        const std::uint32_t ns = 1u << ds;
        const std::uint32_t tail = g == Generator::A ? 0u : (1u << k) - 1u;
        for (std::uint32_t w = 0; w < ns; ++w) {
          const Scalar cs = src[w];
          if (cs == Scalar(0)) continue;
          out[(w << k) | tail] += cs * pk;
        }
      }
    }
    return *this;
  }

  // exp of a series with zero constant term.
  BasicSeries exp() const {
    if (c_[0] != Scalar(0))
      throw std::domain_error("series: exp requires a zero constant term");
    BasicSeries r = unit(max_degree_);
    BasicSeries term = unit(max_degree_);
    for (int k = 1; k <= max_degree_; ++k) {
      term = term * (*this);
      term *= Scalar(1.0 / double(k));
      r += term;
    }
    return r;
  }

  // log of a series with unit constant term.
  BasicSeries log() const {
    if (std::abs(c_[0] - Scalar(1)) > 1e-12)
      throw std::domain_error("series: log requires a unit constant term");
    BasicSeries u = *this;
    u.c_[0] -= Scalar(1);
    BasicSeries r(max_degree_);
    BasicSeries upow = unit(max_degree_);
    for (int k = 1; k <= max_degree_; ++k) {
      upow = upow * u;
      r += upow * Scalar((k % 2 ? 1.0 : -1.0) / double(k));
    }
    return r;
  }

  double norm() const {
    double s = 0;
    for (const auto& x : c_) s += detail::abs2(x);
    return std::sqrt(s);
  }

  double degree_norm(int degree) const {
    double s = 0;
    for (const auto& x : degree_block(degree)) s += detail::abs2(x);
    return std::sqrt(s);
  }

 private:
  void check_index(int degree, std::uint32_t word) const {
    if (degree < 0 || degree > max_degree_)
      throw std::out_of_range("series: degree out of range");
    if (word >= (1u << degree)) throw std::out_of_range("series: word out of range");
  }
  void check_shape(const BasicSeries& o) const {
    if (max_degree_ != o.max_degree_)
      throw std::invalid_argument("series: operands have mismatched max_degree");
  }
  bool block_empty(int d) const {
    const Scalar* b = c_.data() + detail::word_offset(d);
    for (std::uint32_t w = 0; w < (1u << d); ++w)
      if (b[w] != Scalar(0)) return false;
    return true;
  }

  int max_degree_;
  std::vector<Scalar> c_;
};

using TruncatedSeries = BasicSeries<std::complex<double>>;
using RealSeries = BasicSeries<double>;

// log of a product P together with its directional derivatives.  On entry
// tangents[j] holds dP for direction j; on return it holds d(log P).
template <class Scalar>
BasicSeries<Scalar> log_with_tangents(const BasicSeries<Scalar>& value,
                                      std::span<BasicSeries<Scalar>> tangents) {
  const int D = value.max_degree();
  BasicSeries<Scalar> u = value;
  u.coefficient(0, 0) -= Scalar(1);
  if (std::abs(value.coefficient(0, 0) - Scalar(1)) > 1e-12)
    throw std::domain_error("series: log requires a unit constant term");

  BasicSeries<Scalar> result(D);
  std::vector<BasicSeries<Scalar>> dresult(tangents.size(), BasicSeries<Scalar>(D));
  BasicSeries<Scalar> upow = u;
  std::vector<BasicSeries<Scalar>> dupow(tangents.begin(), tangents.end());
  for (int k = 1; k <= D; ++k) {
    if (k > 1) {
      for (std::size_t j = 0; j < tangents.size(); ++j)
        dupow[j] = dupow[j] * u + upow * tangents[j];
      upow = upow * u;
    }
    const Scalar f((k % 2 ? 1.0 : -1.0) / double(k));
    result += upow * f;
    for (std::size_t j = 0; j < tangents.size(); ++j) dresult[j] += dupow[j] * f;
  }
  for (std::size_t j = 0; j < tangents.size(); ++j) tangents[j] = std::move(dresult[j]);
  return result;
}

}  // namespace trotter
