#pragma once

// Brute-force pixel-space references for small lattices. Everything here is
// assembled from the per-site sums of the model, never from the Fourier
// diagonalisation, so it can check the spectral code paths independently.

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "msrg/ggm_model.hpp"
#include "msrg/spectral_core.hpp"

namespace msrg::dense {

inline constexpr int kMaxSide = 16;

inline void check_size(LatticeSize n) {
  if (n.value() > kMaxSide)
    throw Error(ErrorCode::SizeLimitExceeded,
                "dense oracle supports N <= " + std::to_string(kMaxSide) + ", got " + std::to_string(n.value()));
}

inline Eigen::Index pixel_index(int x, int y, int n) {
  return static_cast<Eigen::Index>(wrap_index(y, n)) * n + wrap_index(x, n);
}

/// gamma I + alpha Q, with Q accumulated edge by edge from
/// sum_{x,y} (f(x,y) - f(x+1,y))^2 + (f(x,y) - f(x,y+1))^2 on the torus.
inline Eigen::MatrixXd precision_matrix(const Hyperparams& h, LatticeSize size) {
  check_size(size);
  const int n = size.value();
  const auto dim = static_cast<Eigen::Index>(size.sites());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
  auto add_edge = [&](Eigen::Index a, Eigen::Index b) {
    q(a, a) += 1.0;
    q(b, b) += 1.0;
    q(a, b) -= 1.0;
    q(b, a) -= 1.0;
  };
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      add_edge(pixel_index(x, y, n), pixel_index(x + 1, y, n));
      add_edge(pixel_index(x, y, n), pixel_index(x, y + 1, n));
    }
  }
  return h.gamma() * Eigen::MatrixXd::Identity(dim, dim) + h.alpha() * q;
}

/// Unitary DFT matrix with rows in FFT-natural (l, k) order and columns in
/// pixel (y, x) order.
inline Eigen::MatrixXcd dft_matrix(LatticeSize size) {
  check_size(size);
  const int n = size.value();
  const auto dim = static_cast<Eigen::Index>(size.sites());
  Eigen::MatrixXcd u(dim, dim);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          const double phase = -2.0 * std::numbers::pi * static_cast<double>((k * x + l * y) % n) / n;
          u(pixel_index(k, l, n), pixel_index(x, y, n)) = std::polar(1.0 / n, phase);
        }
  return u;
}

inline Eigen::VectorXd as_vector(const PixelField& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.values().data(), static_cast<Eigen::Index>(f.values().size()));
}

/// ln of the Gaussian evidence of g under Sigma = C^{-1} + I / beta.
inline double log_marginal(const PixelField& g, const Hyperparams& h) {
  check_size(g.size());
  const Eigen::MatrixXd c = precision_matrix(h, g.size());
  const auto dim = c.rows();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::LLT<Eigen::MatrixXd> c_llt(c);
  const Eigen::MatrixXd sigma = c_llt.solve(identity) + identity / h.beta();
  Eigen::LLT<Eigen::MatrixXd> s_llt(sigma);
  if (s_llt.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "marginal covariance is not positive definite");
  const Eigen::MatrixXd l = s_llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const Eigen::VectorXd gv = as_vector(g);
  const double quad = gv.dot(s_llt.solve(gv));
  return -0.5 * (static_cast<double>(dim) * std::log(2.0 * std::numbers::pi) + log_det + quad);
}

/// Solves (beta I + C) f = beta g.
inline PixelField posterior_mean_dense(const PixelField& g, const Hyperparams& h) {
  check_size(g.size());
  Eigen::MatrixXd a = precision_matrix(h, g.size());
  a.diagonal().array() += h.beta();
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  const Eigen::VectorXd f = llt.solve(h.beta() * as_vector(g));
  return PixelField(g.size(), std::vector<double>(f.data(), f.data() + f.size()));
}

}  // namespace msrg::dense
