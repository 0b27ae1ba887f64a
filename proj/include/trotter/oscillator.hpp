#pragma once
// Harmonic-oscillator benchmark: split-step Trotter evolution on a periodic
// position grid versus exact evolution by eigenfunction expansion.
//
// H = p^2/(2m) + (m/2) omega^2 x^2 on x in [-x0, x0] discretized to N_x
// points.  The Trotter path applies potential phases in position space and
// kinetic phases in momentum space (spectral transform on the periodic
// grid); the exact path expands states in the lowest N_cut+1 oscillator
// eigenfunctions with E_n = omega (n + 1/2).

#include <trotter/scheme.hpp>

#include <Eigen/Dense>
#include <fftw3.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace trotter {

struct OscillatorConfig {
  double x0 = 10.0;  // half box width
  int n_x = 2000;    // grid points
  double mass = 1.0;
  double omega = 1.0;
  int n_cut = 23;  // exact path keeps modes 0..n_cut
  int n_phi = 5;   // error is averaged over the lowest n_phi eigenstates
  double t = 200.0;

  void validate() const {
    if (!(x0 > 0)) throw std::domain_error("oscillator: x0 must be positive");
    if (n_x < 16 || n_x % 2 != 0)
      throw std::domain_error("oscillator: n_x must be even and at least 16");
    if (!(mass > 0) || !(omega > 0))
      throw std::domain_error("oscillator: mass and omega must be positive");
    if (n_cut < 0) throw std::domain_error("oscillator: n_cut must be >= 0");
    if (n_phi < 1 || n_phi > n_cut)
      throw std::domain_error("oscillator: need 1 <= n_phi <= n_cut");
    if (!(t > 0)) throw std::domain_error("oscillator: evolution time must be positive");
  }
};

// Owns the grid, the eigenfunction table, and the FFTW plans.  Instances are
// not thread-safe (the transform buffer is shared); use one per thread.
class OscillatorModel {
 public:
  explicit OscillatorModel(const OscillatorConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int n = cfg_.n_x;
    const double dx = 2.0 * cfg_.x0 / n;
    grid_.resize(n);
    for (int j = 0; j < n; ++j) grid_[j] = -cfg_.x0 + j * dx;

    potential_.resize(n);
    for (int j = 0; j < n; ++j)
      potential_[j] = 0.5 * cfg_.mass * cfg_.omega * cfg_.omega * grid_[j] * grid_[j];

    kinetic_.resize(n);
    const double dk = M_PI / cfg_.x0;  // 2*pi / (box width)
    for (int j = 0; j < n; ++j) {
      const double f = j < n / 2 ? double(j) : double(j - n);
      const double k = dk * f;
      kinetic_[j] = k * k / (2.0 * cfg_.mass);
    }

    build_eigenstates();

    buffer_.resize(std::size_t(n));
    auto* raw = reinterpret_cast<fftw_complex*>(buffer_.data());
    forward_ = fftw_plan_dft_1d(n, raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(n, raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!forward_ || !backward_) throw std::runtime_error("oscillator: FFTW plan failed");
  }

  ~OscillatorModel() {
    if (forward_) fftw_destroy_plan(forward_);
    if (backward_) fftw_destroy_plan(backward_);
  }
  OscillatorModel(const OscillatorModel&) = delete;
  OscillatorModel& operator=(const OscillatorModel&) = delete;

  const OscillatorConfig& config() const { return cfg_; }
  const Eigen::VectorXd& grid() const { return grid_; }

  // n-th eigenfunction sampled on the grid, unit norm in the discrete l2
  // sense.
  Eigen::VectorXcd eigenstate(int n) const {
    if (n < 0 || n > cfg_.n_cut)
      throw std::domain_error("oscillator: eigenstate index beyond n_cut");
    return modes_.col(n).cast<Complex>();
  }

  double energy(int n) const { return cfg_.omega * (n + 0.5); }

  // Exact path: project onto modes 0..n_cut, attach phases exp(-i E_n t),
  // reconstruct.  Content outside the kept modes is discarded (the
  // documented cutoff).
  Eigen::VectorXcd exact_evolve(const Eigen::VectorXcd& psi, double t) const {
    check_size(psi);
    Eigen::VectorXcd coeff = modes_.transpose() * psi;  // real modes: adjoint = transpose
    for (int n = 0; n <= cfg_.n_cut; ++n) coeff[n] *= std::exp(Complex(0.0, -energy(n) * t));
    return modes_ * coeff;
  }

  // Split-step Trotter path: stage product with potential stages in position
  // space and kinetic stages in momentum space, repeated n_t times.
  Eigen::VectorXcd trotter_evolve(const TrotterScheme& scheme, const Eigen::VectorXcd& psi,
                                  double h, long n_t) const {
    check_size(psi);
    if (n_t < 1) throw std::domain_error("oscillator: need at least one step");
    const int n = cfg_.n_x;
    for (int j = 0; j < n; ++j) buffer_[std::size_t(j)] = psi[j];
    const auto& a = scheme.stage_a;
    const auto& b = scheme.stage_b;
    for (long s = 0; s < n_t; ++s) {
      for (std::size_t i = 0; i < b.size(); ++i) {
        apply_phase(potential_, a[i] * h);
        fftw_execute(forward_);
        apply_phase(kinetic_, b[i] * h);
        fftw_execute(backward_);
        const double scale = 1.0 / n;
        for (auto& z : buffer_) z *= scale;
      }
      apply_phase(potential_, a.back() * h);
    }
    Eigen::VectorXcd out(n);
    for (int j = 0; j < n; ++j) out[j] = buffer_[std::size_t(j)];
    return out;
  }

  // Truncated normalized Frobenius error over the lowest n_phi eigenstates:
  // sqrt((1/N_phi) sum_v ||U_exact v - U_trotter v||^2).
  double delta(const TrotterScheme& scheme, double t, long n_t) const {
    const double h = t / double(n_t);
    double acc = 0;
    for (int v = 0; v < cfg_.n_phi; ++v) {
      const Eigen::VectorXcd psi = eigenstate(v);
      acc += (exact_evolve(psi, t) - trotter_evolve(scheme, psi, h, n_t)).squaredNorm();
    }
    return std::sqrt(acc / cfg_.n_phi);
  }

 private:
  void check_size(const Eigen::VectorXcd& psi) const {
    if (psi.size() != cfg_.n_x)
      throw std::domain_error("oscillator: state size does not match the grid");
  }

  // exp(-i theta V) elementwise on the buffer; complex theta keeps
  // complex-ramp schemes representable.
  void apply_phase(const std::vector<double>& values, Complex theta) const {
    const Complex mi(0.0, -1.0);
    for (std::size_t j = 0; j < buffer_.size(); ++j)
      buffer_[j] *= std::exp(mi * theta * values[j]);
  }

  // Normalized Hermite functions via the stable recurrence
  //   psi_0 = (m w / pi)^{1/4} exp(-xi^2 / 2),    xi = sqrt(m w) x,
  //   psi_{n+1} = sqrt(2/(n+1)) xi psi_n - sqrt(n/(n+1)) psi_{n-1},
  // then renormalized to unit discrete l2 norm.
  void build_eigenstates() {
    const int n = cfg_.n_x;
    const int m = cfg_.n_cut + 1;
    modes_.resize(n, m);
    const double s = std::sqrt(cfg_.mass * cfg_.omega);
    for (int j = 0; j < n; ++j) {
      const double xi = s * grid_[j];
      modes_(j, 0) = std::pow(cfg_.mass * cfg_.omega / M_PI, 0.25) * std::exp(-0.5 * xi * xi);
      if (m > 1) modes_(j, 1) = std::sqrt(2.0) * xi * modes_(j, 0);
      for (int k = 2; k < m; ++k)
        modes_(j, k) = std::sqrt(2.0 / k) * xi * modes_(j, k - 1) -
                       std::sqrt(double(k - 1) / k) * modes_(j, k - 2);
    }
    for (int k = 0; k < m; ++k) modes_.col(k).normalize();
  }

  OscillatorConfig cfg_;
  Eigen::VectorXd grid_;
  std::vector<double> potential_;
  std::vector<double> kinetic_;
  Eigen::MatrixXd modes_;  // n_x x (n_cut + 1)
  mutable std::vector<Complex> buffer_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace trotter
