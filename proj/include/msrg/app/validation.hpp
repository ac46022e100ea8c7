#pragma once

// Self-check suites behind `msrg validate`: dense-oracle agreement, gradient,
// Parseval, expectation identity and seeded Monte-Carlo checks.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "msrg/dense_oracle.hpp"
#include "msrg/evaluation.hpp"
#include "msrg/ggm_model.hpp"
#include "msrg/restoration.hpp"
#include "msrg/spectral_core.hpp"
#include "msrg/synthesis.hpp"

namespace msrg::validation {

struct SuiteResult {
  std::string name;
  bool passed;
  std::string detail;
};

namespace detail {

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline PixelField random_field(LatticeSize n, SeededRng& rng, double scale) {
  PixelField f(n);
  for (double& v : f.values()) v = scale * rng.normal();
  return f;
}

inline Hyperparams random_hyperparams(SeededRng& rng) {
  // log-uniform over a few decades around the unit scale
  auto draw = [&](double lo, double hi) { return std::exp(lo + (hi - lo) * rng.uniform()); };
  return {draw(-3.0, 2.0), draw(-3.0, 2.0), draw(-4.0, 1.0)};
}

inline std::string format(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

}  // namespace detail

/// Spectral log evidence (n = N) times N^2 against the dense Gaussian
/// integral, plus spectral against dense posterior mean.
template <class Eigenvalue = LatticeEigenvalue>
SuiteResult dense_oracle_suite(Eigenvalue eigenvalue = {}, int instances = 20, std::uint64_t seed = 11) {
  double worst_ml = 0.0, worst_pm = 0.0;
  const LatticeSize n(8);
  for (int i = 0; i < instances; ++i) {
    SeededRng rng = SeededRng::derived(seed, static_cast<std::uint64_t>(i));
    const Hyperparams h = detail::random_hyperparams(rng);
    const PixelField g = detail::random_field(n, rng, 3.0);
    const auto stats = empirical_mode_stats(select_window(forward_dft(g), n), eigenvalue);
    const double spectral = log_evidence(h, stats) * static_cast<double>(n.sites());
    worst_ml = std::max(worst_ml, detail::relative_error(spectral, dense::log_marginal(g, h)));

    const PixelField dense_mean = dense::posterior_mean_dense(g, h);
    const PixelField spectral_mean = posterior_mean(g, h).restored;
    double diff = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < g.values().size(); ++j) {
      diff = std::max(diff, std::abs(spectral_mean.values()[j] - dense_mean.values()[j]));
      scale = std::max(scale, std::abs(dense_mean.values()[j]));
    }
    worst_pm = std::max(worst_pm, diff / scale);
  }
  const bool ok = worst_ml <= 1e-8 && worst_pm <= 1e-8;
  return {"dense_oracle", ok,
          "log-evidence rel err " + detail::format(worst_ml) + ", posterior mean rel err " + detail::format(worst_pm)};
}

/// U C U^dagger is diagonal with entries gamma + alpha lambda.
inline SuiteResult eigenstructure_suite(std::uint64_t seed = 12) {
  double worst = 0.0;
  for (int side = 1; side <= 8; ++side) {
    SeededRng rng(seed + static_cast<std::uint64_t>(side));
    const Hyperparams h = detail::random_hyperparams(rng);
    const LatticeSize n(side);
    const Eigen::MatrixXcd u = dense::dft_matrix(n);
    const Eigen::MatrixXcd d = u * dense::precision_matrix(h, n).cast<std::complex<double>>() * u.adjoint();
    for (int l = 0; l < side; ++l)
      for (int k = 0; k < side; ++k)
        for (int l2 = 0; l2 < side; ++l2)
          for (int k2 = 0; k2 < side; ++k2) {
            const auto r = dense::pixel_index(k, l, side), c = dense::pixel_index(k2, l2, side);
            const double expected = (r == c) ? h.gamma() + h.alpha() * lattice_eigenvalue(k, l, n) : 0.0;
            worst = std::max(worst, std::abs(d(r, c) - expected));
          }
  }
  return {"eigenstructure", worst <= 1e-10, "max deviation " + detail::format(worst)};
}

/// Analytic gradient against central differences with step 1e-6 |h_i|.
inline SuiteResult gradient_suite(int instances = 50, std::uint64_t seed = 13) {
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    SeededRng rng = SeededRng::derived(seed, static_cast<std::uint64_t>(i));
    const Hyperparams h = detail::random_hyperparams(rng);
    const int side = 4 + static_cast<int>(rng.uniform() * 12);
    const LatticeSize n(side);
    const auto stats = empirical_mode_stats(select_window(forward_dft(detail::random_field(n, rng, 2.0)), n));
    const Gradient g = objective_gradient(h, stats);
    const double analytic[3] = {g.d_alpha, g.d_beta, g.d_gamma};
    const double base[3] = {h.alpha(), h.beta(), h.gamma()};
    const double f0 = log_evidence(h, stats);
    for (int c = 0; c < 3; ++c) {
      const double step = 1e-6 * base[c];
      double plus[3] = {base[0], base[1], base[2]}, minus[3] = {base[0], base[1], base[2]};
      plus[c] += step;
      minus[c] -= step;
      const double fd = (log_evidence(Hyperparams(plus[0], plus[1], plus[2]), stats) -
                         log_evidence(Hyperparams(minus[0], minus[1], minus[2]), stats)) /
                        (2.0 * step);
      // Below ~1e-6 (1 + |f|) / h_i the difference quotient is rounding noise.
      const double floor = 1e-6 * (1.0 + std::abs(f0)) / base[c];
      worst = std::max(worst, std::abs(fd - analytic[c]) / std::max(std::abs(analytic[c]), floor));
    }
  }
  return {"gradient", worst <= 1e-5, "max rel err " + detail::format(worst)};
}

/// Parseval and round trip of the FFT-backed transform, and agreement with a
/// direct O(N^4) sum.
inline SuiteResult parseval_suite(std::uint64_t seed = 14) {
  double worst_parseval = 0.0, worst_roundtrip = 0.0, worst_direct = 0.0;
  for (int side : {1, 2, 3, 4, 5, 7, 8, 12}) {
    SeededRng rng(seed + static_cast<std::uint64_t>(side));
    const LatticeSize n(side);
    const PixelField f = detail::random_field(n, rng, 5.0);
    const SpectralField F = forward_dft(f);
    double pixel = 0.0, spectral = 0.0;
    for (double v : f.values()) pixel += v * v;
    for (const auto& c : F.coeffs()) spectral += std::norm(c);
    worst_parseval = std::max(worst_parseval, detail::relative_error(spectral, pixel));
    const PixelField back = inverse_dft(F).field;
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < f.values().size(); ++i) {
      err = std::max(err, std::abs(back.values()[i] - f.values()[i]));
      scale = std::max(scale, std::abs(f.values()[i]));
    }
    worst_roundtrip = std::max(worst_roundtrip, err / scale);
    for (int l = 0; l < side; ++l)
      for (int k = 0; k < side; ++k) {
        std::complex<double> acc = 0.0;
        for (int y = 0; y < side; ++y)
          for (int x = 0; x < side; ++x)
            acc += f.at(x, y) * std::polar(1.0, -2.0 * std::numbers::pi * ((k * x + l * y) % side) / side);
        worst_direct = std::max(worst_direct, std::abs(acc / static_cast<double>(side) - F.at(k, l)) / scale);
      }
  }
  const bool ok = worst_parseval <= 1e-10 && worst_roundtrip <= 1e-10 && worst_direct <= 1e-10;
  return {"parseval", ok,
          "parseval " + detail::format(worst_parseval) + ", round trip " + detail::format(worst_roundtrip) +
              ", direct DFT " + detail::format(worst_direct)};
}

/// |G|^2 -> |F*|^2 + 1/beta* in the empirical objective equals L_n.
inline SuiteResult expectation_identity_suite(int instances = 20, std::uint64_t seed = 15) {
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    SeededRng rng = SeededRng::derived(seed, static_cast<std::uint64_t>(i));
    const int side = 4 + static_cast<int>(rng.uniform() * 20);
    const LatticeSize full(side);
    const LatticeSize n(1 + static_cast<int>(rng.uniform() * side));
    const PixelField truth = detail::random_field(full, rng, 4.0);
    const SpectralField F = forward_dft(truth);
    const TrueModel tm(std::exp(-3.0 + 4.0 * rng.uniform()), PowerSpectrum::of(F));
    const Hyperparams h = detail::random_hyperparams(rng);
    const ScaleExponents e{rng.normal(), rng.normal()};

    WindowedCoefficients substituted = select_window(F, n);
    for (auto& c : substituted.values) c = std::sqrt(std::norm(c) + 1.0 / tm.beta_star);
    worst = std::max(worst, std::abs(empirical_objective(h, substituted, n, e) - expected_objective(h, tm, n, e)));
  }
  return {"expectation_identity", worst <= 1e-12, "max abs diff " + detail::format(worst)};
}

/// Seeded Monte-Carlo: closed-form risk against the empirical MSE of the
/// restorer, and the per-mode variance of prior samples.
inline SuiteResult monte_carlo_suite(std::uint64_t seed = 16) {
  std::ostringstream detail_text;
  bool ok = true;
  {
    const LatticeSize n(32);
    SeededRng truth_rng(seed);
    const PixelField truth = sample_prior(Hyperparams(0.05, 1.0, 1e-3), n, truth_rng);
    const NoiseSpec noise(2.0);
    const Hyperparams h(0.2, 0.3, 0.01);
    const RiskReport risk = closed_form_risk(h, TrueModel(noise.beta_star(), PowerSpectrum::of(truth)));
    const auto mc = monte_carlo_risk(h, truth, noise, 100, seed + 1);
    const double z = std::abs(mc.mean - risk.d_n) / mc.standard_error;
    ok = ok && z <= 3.0;
    detail_text << "risk z=" << detail::format(z);
  }
  {
    const LatticeSize n(16);
    const Hyperparams h(0.7, 1.0, 0.2);
    const int draws = 1000;
    double sum_dc = 0.0, sum_dc4 = 0.0, sum_k = 0.0, sum_k4 = 0.0;
    for (int d = 0; d < draws; ++d) {
      SeededRng rng = SeededRng::derived(seed + 2, static_cast<std::uint64_t>(d));
      const SpectralField F = forward_dft(sample_prior(h, n, rng));
      const double p0 = std::norm(F.at(0, 0)), p1 = std::norm(F.at(1, 0));
      sum_dc += p0;
      sum_dc4 += p0 * p0;
      sum_k += p1;
      sum_k4 += p1 * p1;
    }
    auto z_of = [&](double s, double s2, double expected) {
      const double mean = s / draws;
      const double var = s2 / draws - mean * mean;
      return std::abs(mean - expected) / std::sqrt(var / draws);
    };
    const double z0 = z_of(sum_dc, sum_dc4, prior_mode_variance(h, 0.0));
    const double z1 = z_of(sum_k, sum_k4, prior_mode_variance(h, lattice_eigenvalue(1, 0, n)));
    ok = ok && z0 <= 3.0 && z1 <= 3.0;
    detail_text << ", prior DC z=" << detail::format(z0) << ", prior (1,0) z=" << detail::format(z1);
  }
  return {"monte_carlo", ok, detail_text.str()};
}

template <class Eigenvalue = LatticeEigenvalue>
std::vector<SuiteResult> run_all(Eigenvalue eigenvalue = {}) {
  return {dense_oracle_suite(eigenvalue), eigenstructure_suite(), gradient_suite(),
          parseval_suite(),               expectation_identity_suite(), monte_carlo_suite()};
}

}  // namespace msrg::validation
