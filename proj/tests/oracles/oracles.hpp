#pragma once

// Test-only reference computations. None of these share code paths with the
// library implementations they are used to check.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "msrg/ggm_model.hpp"
#include "msrg/spectral_core.hpp"
#include "msrg/synthesis.hpp"

namespace oracle {

/// Direct O(N^4) unitary DFT; result in FFT-natural layout, row l, column k.
inline std::vector<std::complex<double>> direct_dft(const msrg::PixelField& f) {
  const int n = f.side();
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n) * n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) {
      std::complex<double> acc = 0.0;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          const double phase = -2.0 * std::numbers::pi * (static_cast<double>(k) * x + static_cast<double>(l) * y) / n;
          acc += f.at(x, y) * std::complex<double>(std::cos(phase), std::sin(phase));
        }
      out[static_cast<std::size_t>(l) * n + k] = acc / static_cast<double>(n);
    }
  return out;
}

/// Per-mode log evidence written out from the Gaussian density of each mode,
/// summed naively: -1/2 ln(2 pi v) - P / (2 v), v = 1/beta + 1/(gamma + alpha lambda),
/// divided by the mode count.
inline double naive_log_evidence(const msrg::Hyperparams& h, std::span<const msrg::ModeStats> stats) {
  double acc = 0.0;
  for (const auto& s : stats) {
    const double v = 1.0 / h.beta() + 1.0 / (h.gamma() + h.alpha() * s.lambda);
    acc += -0.5 * std::log(2.0 * std::numbers::pi * v) - 0.5 * s.data_power / v;
  }
  return acc / static_cast<double>(stats.size());
}

struct GridMax {
  msrg::Hyperparams best;
  double value;
};

/// Exhaustive search over a points^3 log-spaced grid in [lo, hi]^3.
template <class Objective>
GridMax grid_search(const Objective& objective, double lo, double hi, int points) {
  GridMax out{msrg::Hyperparams(lo, lo, lo), -INFINITY};
  auto at = [&](int i) { return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (points - 1)); };
  for (int a = 0; a < points; ++a)
    for (int b = 0; b < points; ++b)
      for (int c = 0; c < points; ++c) {
        const msrg::Hyperparams h(at(a), at(b), at(c));
        const double v = objective(h);
        if (v > out.value) out = {h, v};
      }
  return out;
}

/// Fisher information of (ln alpha, ln beta, ln gamma) for a single draw of
/// the data on the given modes, each mode Gaussian with variance v(lambda).
inline Eigen::Matrix3d log_fisher_information(const msrg::Hyperparams& h, std::span<const double> lambdas) {
  Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
  for (double lambda : lambdas) {
    const double c = h.gamma() + h.alpha() * lambda;
    const double v = 1.0 / h.beta() + 1.0 / c;
    // dv/dln(theta_i)
    const Eigen::Vector3d dv(-h.alpha() * lambda / (c * c), -1.0 / h.beta(), -h.gamma() / (c * c));
    info += 0.5 * dv * dv.transpose() / (v * v);
  }
  return info;
}

inline msrg::PixelField random_field(msrg::LatticeSize n, msrg::SeededRng& rng, double scale = 1.0) {
  msrg::PixelField f(n);
  for (double& v : f.values()) v = scale * rng.normal();
  return f;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline double max_abs(std::span<const double> a) {
  double worst = 0.0;
  for (double v : a) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace oracle
