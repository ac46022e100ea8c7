#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "msrg/ggm_model.hpp"
#include "msrg/restoration.hpp"
#include "msrg/synthesis.hpp"

namespace msrg {

struct RiskReport {
  double d_n;
  double variance_term;
  double bias_term;
  double snr_db;
};

inline double snr_db(double var_truth, double d_n) {
  if (!(var_truth > 0.0) || !(d_n > 0.0))
    throw Error(ErrorCode::NonPositiveInput, "snr_db needs positive variance and risk");
  return 10.0 * std::log10(var_truth / d_n);
}

/// Population variance (divide by N^2), computed in two passes.
inline double variance_of(const PixelField& f) {
  const auto v = f.values();
  const double count = static_cast<double>(v.size());
  const double mean = pairwise_sum(v) / count;
  return pairwise_sum(0, v.size(), [&](std::size_t i) { return (v[i] - mean) * (v[i] - mean); }) / count;
}

/// Per-pixel expected squared error of the posterior mean restorer run at
/// full resolution with hyperparameters h, averaged over the noise.
/// snr_db is NaN when the truth has zero variance.
inline RiskReport closed_form_risk(const Hyperparams& h, const TrueModel& tm) {
  const PowerSpectrum& p = tm.truth_spectrum;
  const int n = p.size().value();
  const std::size_t count = p.size().sites();
  auto gain_at = [&](std::size_t i) {
    const int k = static_cast<int>(i % n);
    const int l = static_cast<int>(i / n);
    return wiener_gain(h, lattice_eigenvalue(k, l, p.size()));
  };
  const double variance_term = pairwise_sum(0, count, [&](std::size_t i) {
                                 const double gain = gain_at(i);
                                 return gain * gain / tm.beta_star;
                               }) / static_cast<double>(count);
  const double bias_term = pairwise_sum(0, count, [&](std::size_t i) {
                             const double shrink = 1.0 - gain_at(i);
                             return p.values()[i] * shrink * shrink;
                           }) / static_cast<double>(count);
  const double d_n = variance_term + bias_term;
  const double var = p.pixel_variance();
  return {d_n, variance_term, bias_term, var > 0.0 ? snr_db(var, d_n) : std::nan("")};
}

struct MonteCarloEstimate {
  double mean;
  double standard_error;
  int draws;
};

/// Empirical mean of ||f* - f_hat(g)||^2 / N^2 over g = f* + noise, one derived
/// RNG stream per draw.
inline MonteCarloEstimate monte_carlo_risk(const Hyperparams& h, const PixelField& truth, const NoiseSpec& noise,
                                           int draws, std::uint64_t seed) {
  std::vector<double> losses(static_cast<std::size_t>(draws));
  const double count = static_cast<double>(truth.size().sites());
  for (int d = 0; d < draws; ++d) {
    SeededRng rng = SeededRng::derived(seed, static_cast<std::uint64_t>(d));
    const PixelField g = degrade(truth, noise, rng);
    const PixelField fhat = posterior_mean(g, h).restored;
    const auto a = truth.values();
    const auto b = fhat.values();
    losses[static_cast<std::size_t>(d)] =
        pairwise_sum(0, a.size(), [&](std::size_t i) { return (a[i] - b[i]) * (a[i] - b[i]); }) / count;
  }
  const double mean = pairwise_sum(losses) / draws;
  const double ss = pairwise_sum(0, losses.size(), [&](std::size_t i) { return (losses[i] - mean) * (losses[i] - mean); });
  const double sd = draws > 1 ? std::sqrt(ss / (draws - 1)) : 0.0;
  return {mean, sd / std::sqrt(static_cast<double>(draws)), draws};
}

}  // namespace msrg
