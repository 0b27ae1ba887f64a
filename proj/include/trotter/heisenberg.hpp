#pragma once
// Dense Heisenberg-chain benchmark model: periodic spin chain with per-site
// random z fields, exact propagator by diagonalization, and Trotter
// propagators assembled from a scheme's ramps under two operator groupings.
//
// The chain Hamiltonian is H = sum_i sum_alpha H_i^alpha with the bond terms
//   H_i^alpha = J^alpha sigma_i^alpha sigma_{i+1}^alpha + delta_{alpha z} h_i sigma_i^z
// and periodic wrap (site L+1 = site 1).  Everything is dense, sized for desk
// scale (dimension 2^L, L <= 12).

#include <trotter/scheme.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace trotter {

// How the 3L bond terms are split into product-formula stages: one stage per
// term (site-major sweep), or one stage per coupling axis after summing the
// mutually commuting bond terms of that axis.
enum class Grouping { Local, Global };

inline std::string_view grouping_token(Grouping g) {
  return g == Grouping::Local ? "local" : "global";
}

struct HeisenbergConfig {
  int sites = 6;
  std::array<double, 3> coupling{1.0, 1.0, 1.0};  // J^x, J^y, J^z
  double field_range = 0.1;  // h_i drawn uniformly from [-field_range, field_range]
  std::uint64_t rng_seed = 1;
  Grouping grouping = Grouping::Local;
  double t = 10.0;

  void validate() const {
    if (sites < 2) throw std::domain_error("heisenberg: need at least 2 sites");
    if (sites > 12)
      throw std::domain_error("heisenberg: dense mode supports at most 12 sites");
    if (field_range < 0) throw std::domain_error("heisenberg: field_range must be >= 0");
    if (t <= 0) throw std::domain_error("heisenberg: evolution time must be positive");
  }
};

struct HeisenbergModel {
  HeisenbergConfig config;
  std::vector<double> fields;                // one z field per site
  std::vector<Eigen::MatrixXcd> site_terms;  // 3L terms, site-major, axes x,y,z
  Eigen::MatrixXcd hamiltonian;              // sum of all terms
};

namespace detail {

// Action of sigma^alpha (alpha: 0=x, 1=y, 2=z) on the given bit of a basis
// index; bit value 0 is the +1 eigenstate of sigma^z.
inline std::pair<std::uint32_t, Complex> pauli_apply(int alpha, int bit, std::uint32_t s) {
  const bool set = (s >> bit) & 1u;
  switch (alpha) {
    case 0: return {s ^ (1u << bit), Complex(1.0, 0.0)};
    case 1: return {s ^ (1u << bit), set ? Complex(0.0, -1.0) : Complex(0.0, 1.0)};
    default: return {s, set ? Complex(-1.0, 0.0) : Complex(1.0, 0.0)};
  }
}

}  // namespace detail

inline std::vector<double> random_fields(const HeisenbergConfig& cfg) {
  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> dist(-cfg.field_range, cfg.field_range);
  std::vector<double> h(cfg.sites);
  for (auto& hi : h) hi = dist(rng);
  return h;
}

inline HeisenbergModel build_heisenberg(const HeisenbergConfig& cfg) {
  cfg.validate();
  HeisenbergModel model;
  model.config = cfg;
  model.fields = random_fields(cfg);
  const int L = cfg.sites;
  const std::uint32_t dim = 1u << L;
  model.hamiltonian = Eigen::MatrixXcd::Zero(dim, dim);
  model.site_terms.reserve(3 * std::size_t(L));
  for (int site = 0; site < L; ++site) {
    for (int alpha = 0; alpha < 3; ++alpha) {
      Eigen::MatrixXcd term = Eigen::MatrixXcd::Zero(dim, dim);
      const int next = (site + 1) % L;
      for (std::uint32_t s = 0; s < dim; ++s) {
        const auto [s1, a1] = detail::pauli_apply(alpha, site, s);
        const auto [s2, a2] = detail::pauli_apply(alpha, next, s1);
        term(s2, s) += cfg.coupling[std::size_t(alpha)] * a1 * a2;
        if (alpha == 2) term(s, s) += model.fields[std::size_t(site)] *
                                      (((s >> site) & 1u) ? -1.0 : 1.0);
      }
      model.hamiltonian += term;
      model.site_terms.push_back(std::move(term));
    }
  }
  return model;
}

// Stage operator list for the requested grouping.  Local: the 3L bond terms
// in the site-major sweep order.  Global: the three axis sums (all bond terms
// of one axis commute, so the axis exponential is a single stage).
inline std::vector<Eigen::MatrixXcd> grouped_terms(const HeisenbergModel& model, Grouping g) {
  if (g == Grouping::Local) return model.site_terms;
  std::vector<Eigen::MatrixXcd> out(3);
  const int L = model.config.sites;
  for (int alpha = 0; alpha < 3; ++alpha) {
    out[std::size_t(alpha)] = model.site_terms[std::size_t(alpha)];
    for (int site = 1; site < L; ++site)
      out[std::size_t(alpha)] += model.site_terms[std::size_t(3 * site + alpha)];
  }
  return out;
}

inline void require_hermitian(const Eigen::MatrixXcd& H, double tol, const char* what) {
  if ((H - H.adjoint()).norm() > tol * (1.0 + H.norm()))
    throw std::domain_error(std::string(what) + ": operator is not Hermitian");
}

// U(t) = exp(-i H t) by full diagonalization.
inline Eigen::MatrixXcd exact_propagator(const Eigen::MatrixXcd& H, double t) {
  require_hermitian(H, 1e-13, "exact_propagator");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("exact_propagator: eigendecomposition failed");
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    phases[i] = std::exp(Complex(0.0, -es.eigenvalues()[i] * t));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Normalized Frobenius distance (1/sqrt(N)) ||U - V||_F; at most 2 for
// unitaries.
inline double frobenius_error(const Eigen::MatrixXcd& U, const Eigen::MatrixXcd& V) {
  if (U.rows() != V.rows() || U.cols() != V.cols())
    throw std::domain_error("frobenius_error: dimension mismatch");
  return (U - V).norm() / std::sqrt(double(U.rows()));
}

inline double unitarity_defect(const Eigen::MatrixXcd& U) {
  const auto I = Eigen::MatrixXcd::Identity(U.rows(), U.cols());
  return (U.adjoint() * U - I).norm() / std::sqrt(double(U.rows()));
}

// Builds Trotter steps for a fixed Hermitian term list.  Terms are
// diagonalized once; each stage exponential exp(-i theta T) then costs two
// dense multiplications.  The ramp sweep of cycle i applies every term
// forward with c_i and backward with d_i, and adjacent stages of the same
// term merge into one exponential, which reproduces the two-operator stage
// product exactly when the list has two terms.
class TrotterStepper {
 public:
  explicit TrotterStepper(const std::vector<Eigen::MatrixXcd>& terms) {
    if (terms.empty()) throw std::domain_error("TrotterStepper: empty term list");
    eigs_.reserve(terms.size());
    for (const auto& T : terms) {
      require_hermitian(T, 1e-13, "TrotterStepper");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(T);
      if (es.info() != Eigen::Success)
        throw std::runtime_error("TrotterStepper: eigendecomposition failed");
      eigs_.push_back({es.eigenvectors(), es.eigenvalues()});
    }
    dim_ = eigs_.front().vectors.rows();
  }

  // One step S(h): the ramp product over all cycles.
  Eigen::MatrixXcd step(const TrotterScheme& scheme, double h) const {
    const auto c = scheme.ramp_c();
    const auto d = scheme.ramp_d();
    // Sweep sequence with adjacent same-term runs merged.
    std::vector<std::pair<std::size_t, Complex>> stages;
    stages.reserve(2 * c.size() * eigs_.size());
    auto push = [&](std::size_t term, Complex theta) {
      if (!stages.empty() && stages.back().first == term)
        stages.back().second += theta;
      else
        stages.emplace_back(term, theta);
    };
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t m = 0; m < eigs_.size(); ++m) push(m, c[i] * h);
      for (std::size_t m = eigs_.size(); m-- > 0;) push(m, d[i] * h);
    }
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Identity(dim_, dim_);
    for (const auto& [term, theta] : stages) S = S * exponential(term, theta);
    return S;
  }

  // S(h)^{N_t} by binary exponentiation.
  Eigen::MatrixXcd propagate(const TrotterScheme& scheme, double h, long n_t) const {
    if (n_t < 1) throw std::domain_error("TrotterStepper: need at least one step");
    Eigen::MatrixXcd base = step(scheme, h);
    Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(dim_, dim_);
    for (long e = n_t; e > 0; e >>= 1) {
      if (e & 1) result = result * base;
      if (e > 1) base = base * base;
    }
    return result;
  }

 private:
  struct TermEigen {
    Eigen::MatrixXcd vectors;
    Eigen::VectorXd values;
  };

  // exp(-i theta T) from the cached eigensystem; complex theta supported so
  // complex-ramp schemes stay representable (the result is then not unitary).
  Eigen::MatrixXcd exponential(std::size_t term, Complex theta) const {
    const auto& te = eigs_[term];
    Eigen::VectorXcd phases(te.values.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k)
      phases[k] = std::exp(Complex(0.0, -1.0) * theta * te.values[k]);
    return te.vectors * phases.asDiagonal() * te.vectors.adjoint();
  }

  std::vector<TermEigen> eigs_;
  Eigen::Index dim_ = 0;
};

}  // namespace trotter
