#pragma once

// Draws from the prior and the degradation channel.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by the
// C++ standard, mapped to uniforms with 53-bit resolution and to normals with
// the basic Box-Muller transform. Nothing here depends on the
// implementation-defined std::normal_distribution, so streams are portable.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "msrg/ggm_model.hpp"
#include "msrg/spectral_core.hpp"

namespace msrg {

class SeededRng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64+box-muller";

  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::string algorithm() const { return kAlgorithm; }

  /// Uniform on (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    cached_ = true;
    return radius * std::cos(angle);
  }

  /// Independent stream for item `index` of a family seeded with `seed`
  /// (splitmix64 finaliser).
  static SeededRng derived(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return SeededRng(z ^ (z >> 31));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool cached_ = false;
  double spare_ = 0.0;
};

struct NoiseSpec {
  explicit NoiseSpec(double sigma_) : sigma(sigma_) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  }
  double sigma;
  double beta_star() const noexcept { return 1.0 / (sigma * sigma); }
};

/// Hermitian-symmetric Gaussian spectrum with E|F(k,l)|^2 = 1/(gamma + alpha lambda).
/// Self-conjugate modes get one real draw; each conjugate pair shares one
/// complex draw with variance split evenly between real and imaginary parts.
inline SpectralField sample_prior_spectrum(const Hyperparams& h, LatticeSize n, SeededRng& rng) {
  SpectralField f(n, true);
  const int side = n.value();
  for (int l = 0; l < side; ++l) {
    for (int k = 0; k < side; ++k) {
      const int kc = wrap_index(-k, side);
      const int lc = wrap_index(-l, side);
      const long self = static_cast<long>(l) * side + k;
      const long partner = static_cast<long>(lc) * side + kc;
      if (partner < self) continue;
      const double variance = prior_mode_variance(h, lattice_eigenvalue(k, l, n));
      if (partner == self) {
        f.at(k, l) = std::sqrt(variance) * rng.normal();
      } else {
        const double sd = std::sqrt(0.5 * variance);
        const double re = sd * rng.normal();
        const double im = sd * rng.normal();
        f.at(k, l) = {re, im};
        f.at(kc, lc) = {re, -im};
      }
    }
  }
  return f;
}

inline PixelField sample_prior(const Hyperparams& h, LatticeSize n, SeededRng& rng) {
  return inverse_dft(sample_prior_spectrum(h, n, rng)).field;
}

/// g = f + white Gaussian noise of standard deviation sigma.
inline PixelField degrade(const PixelField& f, const NoiseSpec& noise, SeededRng& rng) {
  PixelField g = f;
  for (double& v : g.values()) v += noise.sigma * rng.normal();
  return g;
}

}  // namespace msrg
