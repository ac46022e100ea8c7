#pragma once

// Lattice Fourier machinery for the N x N periodic square grid.
//
// Conventions used throughout the library:
//   * PixelField stores f(x, y) row-major with y as the row: values[y * N + x].
//   * SpectralField stores F(k, l) in FFT-natural order with l as the row:
//     coeffs[(l mod N) * N + (k mod N)]. Signed labels (k, l) from the
//     frequency window W(N) map onto that layout by reduction mod N.
//   * The transform is the unitary 2-D DFT
//       F(k, l) = (1/N) sum_{x,y} f(x, y) exp(-i 2 pi (k x + l y) / N),
//     so sum |F|^2 == sum f^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "msrg/error.hpp"

namespace msrg {

using Complex = std::complex<double>;

/// Side length of a square torus lattice, always >= 1.
class LatticeSize {
 public:
  explicit LatticeSize(int n) : n_(n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "lattice size must be >= 1, got " + std::to_string(n));
  }

  int value() const noexcept { return n_; }
  std::size_t sites() const noexcept { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }

  friend bool operator==(LatticeSize a, LatticeSize b) noexcept { return a.n_ == b.n_; }
  friend bool operator<=(LatticeSize a, LatticeSize b) noexcept { return a.n_ <= b.n_; }

 private:
  int n_;
};

/// Reduce any integer into [0, n).
inline int wrap_index(int i, int n) noexcept {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

struct ModeIndex {
  int k;
  int l;
  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

/// The n^2 momenta {-floor((n-1)/2), ..., floor(n/2)}^2, ordered with l as the
/// outer (row) index and k as the inner one.
class FrequencyWindow {
 public:
  explicit FrequencyWindow(LatticeSize n) : n_(n) {
    indices_.reserve(n.sites());
    for (int l = lowest(n); l <= highest(n); ++l)
      for (int k = lowest(n); k <= highest(n); ++k) indices_.push_back({k, l});
  }

  static int lowest(LatticeSize n) noexcept { return -((n.value() - 1) / 2); }
  static int highest(LatticeSize n) noexcept { return n.value() / 2; }

  LatticeSize size() const noexcept { return n_; }
  std::span<const ModeIndex> indices() const noexcept { return indices_; }
  std::size_t count() const noexcept { return indices_.size(); }

  bool contains(int k, int l) const noexcept {
    return k >= lowest(n_) && k <= highest(n_) && l >= lowest(n_) && l <= highest(n_);
  }

 private:
  LatticeSize n_;
  std::vector<ModeIndex> indices_;
};

inline FrequencyWindow window(LatticeSize n) { return FrequencyWindow(n); }

/// Eigenvalue 4 - 2cos(2 pi k/N) - 2cos(2 pi l/N) of the torus graph Laplacian.
inline double lattice_eigenvalue(int k, int l, LatticeSize N) noexcept {
  const double two_pi_over_n = 2.0 * std::numbers::pi / N.value();
  const int kr = wrap_index(k, N.value());
  const int lr = wrap_index(l, N.value());
  return 4.0 - 2.0 * std::cos(two_pi_over_n * kr) - 2.0 * std::cos(two_pi_over_n * lr);
}

/// Real intensities on the N x N torus. Indexing wraps periodically.
class PixelField {
 public:
  explicit PixelField(LatticeSize n) : n_(n), values_(n.sites(), 0.0) {}
  PixelField(LatticeSize n, std::vector<double> values) : n_(n), values_(std::move(values)) {
    if (values_.size() != n_.sites())
      throw Error(ErrorCode::InvalidArgument, "pixel buffer has " + std::to_string(values_.size()) +
                                                  " values, expected " + std::to_string(n_.sites()));
  }

  LatticeSize size() const noexcept { return n_; }
  int side() const noexcept { return n_.value(); }

  double& at(int x, int y) noexcept { return values_[offset(x, y)]; }
  double at(int x, int y) const noexcept { return values_[offset(x, y)]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t offset(int x, int y) const noexcept {
    const int n = n_.value();
    return static_cast<std::size_t>(wrap_index(y, n)) * n + wrap_index(x, n);
  }

  LatticeSize n_;
  std::vector<double> values_;
};

/// Fourier coefficients of a lattice field in FFT-natural layout.
class SpectralField {
 public:
  SpectralField(LatticeSize n, bool hermitian) : n_(n), coeffs_(n.sites()), hermitian_(hermitian) {}
  SpectralField(LatticeSize n, std::vector<Complex> coeffs, bool hermitian)
      : n_(n), coeffs_(std::move(coeffs)), hermitian_(hermitian) {
    if (coeffs_.size() != n_.sites())
      throw Error(ErrorCode::InvalidArgument, "spectral buffer has wrong size");
  }

  LatticeSize size() const noexcept { return n_; }
  int side() const noexcept { return n_.value(); }
  bool hermitian() const noexcept { return hermitian_; }

  /// Signed or natural labels; both wrap mod N.
  Complex& at(int k, int l) noexcept { return coeffs_[offset(k, l)]; }
  const Complex& at(int k, int l) const noexcept { return coeffs_[offset(k, l)]; }

  std::span<Complex> coeffs() noexcept { return coeffs_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }

 private:
  std::size_t offset(int k, int l) const noexcept {
    const int n = n_.value();
    return static_cast<std::size_t>(wrap_index(l, n)) * n + wrap_index(k, n);
  }

  LatticeSize n_;
  std::vector<Complex> coeffs_;
  bool hermitian_;
};

/// Largest |F(k,l) - conj(F(-k,-l))| over all modes.
inline double hermitian_defect(const SpectralField& f) {
  double worst = 0.0;
  const int n = f.side();
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(f.at(k, l) - std::conj(f.at(-k, -l))));
  return worst;
}

/// Coefficients of a spectral field restricted to W(n), in window(n) order.
struct WindowedCoefficients {
  LatticeSize n;
  LatticeSize full;
  std::vector<Complex> values;
};

namespace detail {

// Unscaled separable 2-D transform on a row-major n x n buffer.
inline void fft2d(std::vector<Complex>& data, int n, bool inverse) {
  // kissfft mis-sizes its scratch buffer for length 1; the transform is the
  // identity there anyway.
  if (n == 1) return;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<Complex> line(n), out(n);
  auto run = [&]() {
    if (inverse)
      fft.inv(out, line);
    else
      fft.fwd(out, line);
  };
  for (int r = 0; r < n; ++r) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(r) * n, n, line.begin());
    run();
    std::copy_n(out.begin(), n, data.begin() + static_cast<std::ptrdiff_t>(r) * n);
  }
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) line[r] = data[static_cast<std::size_t>(r) * n + c];
    run();
    for (int r = 0; r < n; ++r) data[static_cast<std::size_t>(r) * n + c] = out[r];
  }
}

}  // namespace detail

inline SpectralField forward_dft(const PixelField& f) {
  const int n = f.side();
  std::vector<Complex> data(f.values().begin(), f.values().end());
  detail::fft2d(data, n, false);
  const double scale = 1.0 / n;
  for (auto& c : data) c *= scale;
  return SpectralField(f.size(), std::move(data), true);
}

struct InverseResult {
  PixelField field;
  /// max |Im f(x, y)| before the real part was taken.
  double imaginary_residual = 0.0;
  /// Set when the residual exceeds 1e-8 of the field's max magnitude.
  bool non_hermitian = false;
};

inline InverseResult inverse_dft(const SpectralField& spectrum) {
  const int n = spectrum.side();
  std::vector<Complex> data(spectrum.coeffs().begin(), spectrum.coeffs().end());
  detail::fft2d(data, n, true);
  const double scale = 1.0 / n;
  std::vector<double> real(data.size());
  double imag_max = 0.0;
  double abs_max = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Complex v = data[i] * scale;
    real[i] = v.real();
    imag_max = std::max(imag_max, std::abs(v.imag()));
    abs_max = std::max(abs_max, std::abs(v));
  }
  const bool flagged = imag_max > 1e-8 * abs_max;
  return {PixelField(spectrum.size(), std::move(real)), imag_max, flagged};
}

/// Band-limit selector: keep the coefficients labelled by W(n), no rescaling.
inline WindowedCoefficients select_window(const SpectralField& spectrum, LatticeSize n) {
  if (!(n <= spectrum.size()))
    throw Error(ErrorCode::WindowTooLarge, "window " + std::to_string(n.value()) + " exceeds lattice " +
                                               std::to_string(spectrum.side()));
  const FrequencyWindow w(n);
  WindowedCoefficients out{n, spectrum.size(), {}};
  out.values.reserve(w.count());
  for (const auto& m : w.indices()) out.values.push_back(spectrum.at(m.k, m.l));
  return out;
}

/// (n/N)^exponent times the band-limited spectrum, re-indexed onto the n x n
/// lattice. inverse_dft of the result is the coarse pixel field.
inline SpectralField coarse_grain(const SpectralField& spectrum, LatticeSize n, double exponent) {
  const WindowedCoefficients sel = select_window(spectrum, n);
  const double factor = std::pow(static_cast<double>(n.value()) / spectrum.side(), exponent);
  // Even n < N drops the conjugate partner of the Nyquist line.
  const bool hermitian = spectrum.hermitian() && (n.value() % 2 == 1 || n == spectrum.size());
  SpectralField out(n, hermitian);
  const FrequencyWindow w(n);
  for (std::size_t i = 0; i < w.count(); ++i) {
    const auto& m = w.indices()[i];
    out.at(m.k, m.l) = factor * sel.values[i];
  }
  return out;
}

}  // namespace msrg
