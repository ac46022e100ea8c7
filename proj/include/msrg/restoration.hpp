#pragma once

#include <algorithm>
#include <limits>

#include "msrg/ggm_model.hpp"
#include "msrg/spectral_core.hpp"

namespace msrg {

struct GainSummary {
  double min;
  double mean;
  double max;
};

struct RestorationOutput {
  PixelField restored;
  GainSummary gains;
};

/// Posterior mean of the Gaussian posterior: each Fourier mode of g is scaled
/// by its Wiener gain, always at the full resolution of g.
inline RestorationOutput posterior_mean(const SpectralField& g_hat, const Hyperparams& h) {
  const int n = g_hat.side();
  SpectralField filtered(g_hat.size(), g_hat.hermitian());
  std::vector<double> gains(g_hat.size().sites());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int l = 0; l < n; ++l) {
    for (int k = 0; k < n; ++k) {
      const double gain = wiener_gain(h, lattice_eigenvalue(k, l, g_hat.size()));
      gains[static_cast<std::size_t>(l) * n + k] = gain;
      lo = std::min(lo, gain);
      hi = std::max(hi, gain);
      filtered.at(k, l) = gain * g_hat.at(k, l);
    }
  }
  const double mean = pairwise_sum(gains) / static_cast<double>(gains.size());
  return {inverse_dft(filtered).field, {lo, mean, hi}};
}

inline RestorationOutput posterior_mean(const PixelField& g, const Hyperparams& h) {
  return posterior_mean(forward_dft(g), h);
}

}  // namespace msrg
