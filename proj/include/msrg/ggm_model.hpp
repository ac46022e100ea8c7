#pragma once

// Gaussian graphical model on the torus, diagonalised by the DFT.
//
// Per mode (k, l) with Laplacian eigenvalue lambda, write
//   c = gamma + alpha * lambda      (prior precision of the mode)
//   s = beta + c
// A data coefficient G then has variance 1/beta + 1/c = s / (beta c), and the
// log evidence of the retained modes, divided by their count m, is
//   -1/2 ln(2 pi / beta) + 1/(2m) sum [ ln(c/s) - |G|^2 beta c / s ].

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "msrg/error.hpp"
#include "msrg/spectral_core.hpp"
#include "msrg/summation.hpp"

namespace msrg {

/// (alpha, beta, gamma): smoothness, noise and ridge precisions.
class Hyperparams {
 public:
  Hyperparams(double alpha, double beta, double gamma) : alpha_(alpha), beta_(beta), gamma_(gamma) {
    check("alpha", alpha);
    check("beta", beta);
    check("gamma", gamma);
  }

  static Hyperparams from_log(const std::array<double, 3>& theta) {
    return {std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2])};
  }

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }

  std::array<double, 3> log() const noexcept { return {std::log(alpha_), std::log(beta_), std::log(gamma_)}; }

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;

 private:
  static void check(const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be positive and finite");
  }

  double alpha_;
  double beta_;
  double gamma_;
};

/// Exponents of the power-law prefactors applied when coarse-graining f and g.
struct ScaleExponents {
  double psi = 0.0;
  double phi = 0.0;
};

/// |F(k,l)|^2 of a field, FFT-natural layout.
class PowerSpectrum {
 public:
  PowerSpectrum(LatticeSize n, std::vector<double> power) : n_(n), power_(std::move(power)) {
    if (power_.size() != n_.sites()) throw Error(ErrorCode::InvalidArgument, "power spectrum has wrong size");
    for (double p : power_)
      if (!(p >= 0.0)) throw Error(ErrorCode::InvalidArgument, "power spectrum must be non-negative");
  }

  static PowerSpectrum of(const SpectralField& spectrum) {
    std::vector<double> p(spectrum.coeffs().size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(spectrum.coeffs()[i]);
    return {spectrum.size(), std::move(p)};
  }

  static PowerSpectrum of(const PixelField& field) { return of(forward_dft(field)); }

  LatticeSize size() const noexcept { return n_; }
  double at(int k, int l) const noexcept {
    const int n = n_.value();
    return power_[static_cast<std::size_t>(wrap_index(l, n)) * n + wrap_index(k, n)];
  }
  std::span<const double> values() const noexcept { return power_; }

  /// Mean square of the originating pixel field.
  double mean_square() const { return pairwise_sum(power_) / static_cast<double>(n_.sites()); }

  /// Population variance of the originating pixel field.
  double pixel_variance() const {
    const double n2 = static_cast<double>(n_.sites());
    return mean_square() - power_[0] / n2;
  }

 private:
  LatticeSize n_;
  std::vector<double> power_;
};

/// Ground truth used when averaging over the noise: beta* and |F*|^2.
struct TrueModel {
  TrueModel(double beta_star_, PowerSpectrum truth_spectrum_)
      : beta_star(beta_star_), truth_spectrum(std::move(truth_spectrum_)) {
    if (!(beta_star > 0.0) || !std::isfinite(beta_star))
      throw Error(ErrorCode::InvalidArgument, "beta_star must be positive and finite");
  }

  double beta_star;
  PowerSpectrum truth_spectrum;
};

struct ModeStats {
  double lambda;
  double data_power;
};

struct LatticeEigenvalue {
  double operator()(int k, int l, LatticeSize n) const noexcept { return lattice_eigenvalue(k, l, n); }
};

/// |G|^2 and lambda for every retained mode. The eigenvalue function is a
/// parameter so validation can inject a faulty one.
template <class Eigenvalue = LatticeEigenvalue>
std::vector<ModeStats> empirical_mode_stats(const WindowedCoefficients& g, Eigenvalue eigenvalue = {}) {
  const FrequencyWindow w(g.n);
  if (g.values.size() != w.count())
    throw Error(ErrorCode::WindowMismatch, "coefficient count does not match window(" + std::to_string(g.n.value()) + ")");
  std::vector<ModeStats> stats;
  stats.reserve(w.count());
  for (std::size_t i = 0; i < w.count(); ++i) {
    const auto& m = w.indices()[i];
    stats.push_back({eigenvalue(m.k, m.l, g.full), std::norm(g.values[i])});
  }
  return stats;
}

/// E|G|^2 = |F*|^2 + 1/beta* on every mode of W(n).
inline std::vector<ModeStats> expected_mode_stats(const TrueModel& tm, LatticeSize n) {
  const LatticeSize full = tm.truth_spectrum.size();
  if (!(n <= full))
    throw Error(ErrorCode::WindowTooLarge, "window " + std::to_string(n.value()) + " exceeds lattice " +
                                               std::to_string(full.value()));
  const FrequencyWindow w(n);
  std::vector<ModeStats> stats;
  stats.reserve(w.count());
  const double noise = 1.0 / tm.beta_star;
  for (const auto& m : w.indices())
    stats.push_back({lattice_eigenvalue(m.k, m.l, full), tm.truth_spectrum.at(m.k, m.l) + noise});
  return stats;
}

inline double prior_mode_variance(const Hyperparams& h, double lambda) noexcept {
  return 1.0 / (h.gamma() + h.alpha() * lambda);
}

inline double marginal_mode_variance(const Hyperparams& h, double lambda) noexcept {
  return 1.0 / h.beta() + prior_mode_variance(h, lambda);
}

/// Posterior-mean gain beta / (beta + gamma + alpha lambda).
inline double wiener_gain(const Hyperparams& h, double lambda) noexcept {
  return h.beta() / (h.beta() + h.gamma() + h.alpha() * lambda);
}

namespace detail {

// ln(c / (beta + c)) without cancellation when beta << c.
inline double log_prior_fraction(double beta, double c) noexcept {
  const double s = beta + c;
  const double ratio = beta / s;
  return ratio < 0.5 ? std::log1p(-ratio) : std::log(c) - std::log(s);
}

}  // namespace detail

/// phi ln(n/N): the only place the scale exponents enter the objective.
inline double exponent_offset(LatticeSize n, LatticeSize full, const ScaleExponents& e) {
  return e.phi * std::log(static_cast<double>(n.value()) / full.value());
}

/// Exponent-free log evidence per retained mode.
inline double log_evidence(const Hyperparams& h, std::span<const ModeStats> stats) {
  const double m = static_cast<double>(stats.size());
  const double beta = h.beta();
  const double sum = pairwise_sum(0, stats.size(), [&](std::size_t i) {
    const double c = h.gamma() + h.alpha() * stats[i].lambda;
    const double s = beta + c;
    return detail::log_prior_fraction(beta, c) - stats[i].data_power * beta * c / s;
  });
  return -0.5 * std::log(2.0 * std::numbers::pi / beta) + sum / (2.0 * m);
}

inline double empirical_objective(const Hyperparams& h, const WindowedCoefficients& g, LatticeSize n,
                                  const ScaleExponents& e = {}) {
  if (!(g.n == n))
    throw Error(ErrorCode::WindowMismatch, "coefficients were selected with window " + std::to_string(g.n.value()) +
                                               ", not " + std::to_string(n.value()));
  const auto stats = empirical_mode_stats(g);
  return exponent_offset(n, g.full, e) + log_evidence(h, stats);
}

/// Expected renormalised log evidence L_n, evaluated term by term.
inline double expected_objective(const Hyperparams& h, const TrueModel& tm, LatticeSize n, const ScaleExponents& e = {}) {
  const LatticeSize full = tm.truth_spectrum.size();
  if (!(n <= full))
    throw Error(ErrorCode::WindowTooLarge, "window " + std::to_string(n.value()) + " exceeds lattice " +
                                               std::to_string(full.value()));
  const FrequencyWindow w(n);
  const auto modes = w.indices();
  const double m = static_cast<double>(w.count());
  const double beta = h.beta();
  std::vector<double> c(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i)
    c[i] = h.gamma() + h.alpha() * lattice_eigenvalue(modes[i].k, modes[i].l, full);

  const double log_term =
      pairwise_sum(0, c.size(), [&](std::size_t i) { return detail::log_prior_fraction(beta, c[i]); });
  const double noise_term =
      pairwise_sum(0, c.size(), [&](std::size_t i) { return beta * c[i] / (tm.beta_star * (beta + c[i])); });
  const double signal_term = pairwise_sum(0, c.size(), [&](std::size_t i) {
    return tm.truth_spectrum.at(modes[i].k, modes[i].l) * beta * c[i] / (beta + c[i]);
  });
  return exponent_offset(n, full, e) - 0.5 * std::log(2.0 * std::numbers::pi / beta) + log_term / (2.0 * m) -
         noise_term / (2.0 * m) - signal_term / (2.0 * m);
}

struct Gradient {
  double d_alpha;
  double d_beta;
  double d_gamma;
};

/// Analytic partial derivatives of log_evidence (the exponent offset is
/// constant in the hyperparameters).
inline Gradient objective_gradient(const Hyperparams& h, std::span<const ModeStats> stats) {
  const double m = static_cast<double>(stats.size());
  const double beta = h.beta();
  // d/dalpha = lambda * d/dgamma per mode, so sum both with one pass each.
  auto d_gamma_term = [&](std::size_t i) {
    const double c = h.gamma() + h.alpha() * stats[i].lambda;
    const double s = beta + c;
    return beta / (c * s) - stats[i].data_power * beta * beta / (s * s);
  };
  const double g_gamma = pairwise_sum(0, stats.size(), d_gamma_term);
  const double g_alpha =
      pairwise_sum(0, stats.size(), [&](std::size_t i) { return stats[i].lambda * d_gamma_term(i); });
  const double g_beta = pairwise_sum(0, stats.size(), [&](std::size_t i) {
    const double c = h.gamma() + h.alpha() * stats[i].lambda;
    const double s = beta + c;
    return -1.0 / s - stats[i].data_power * c * c / (s * s);
  });
  return {g_alpha / (2.0 * m), 0.5 / beta + g_beta / (2.0 * m), g_gamma / (2.0 * m)};
}

/// Gradient of the expected objective L_n.
inline Gradient objective_gradient(const Hyperparams& h, const TrueModel& tm, LatticeSize n) {
  const auto stats = expected_mode_stats(tm, n);
  return objective_gradient(h, stats);
}

/// Chain rule onto (ln alpha, ln beta, ln gamma).
inline std::array<double, 3> log_gradient(const Hyperparams& h, const Gradient& g) noexcept {
  return {h.alpha() * g.d_alpha, h.beta() * g.d_beta, h.gamma() * g.d_gamma};
}

}  // namespace msrg
