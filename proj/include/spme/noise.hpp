#pragma once

// Diagonal Hilbert-Schmidt diffusion B(X) g_k = rho(||X||_H) sigma_k s_k.

#include <cstddef>
#include <span>
#include <vector>

#include "spme/rng.hpp"
#include "spme/triple.hpp"

namespace spme {

/// Scalar factor rho(||X||_H): a constant, or a/(1+x) with Lipschitz constant a.
struct Multiplier {
  enum class Kind { Constant, Inverse };

  Kind kind = Kind::Constant;
  double value = 1.0;

  double operator()(double x) const;
  double lipschitz() const;
  double upper() const;
};

struct NoiseSpec {
  std::vector<double> sigma;  ///< per-mode amplitudes, zero-based modes
  Multiplier mult;

  /// sigma_k = sigma0·k^{-beta}, k = 1..n_modes.
  static NoiseSpec decay(std::size_t n_modes, double sigma0, double beta, Multiplier mult = {});

  std::size_t n_modes() const noexcept { return sigma.size(); }
  bool additive() const noexcept {
    return mult.kind == Multiplier::Kind::Constant;
  }
  bool zero() const;
  void validate(const SpectralDomain& dom) const;
};

/// Independent N(0, dt) draws, one per mode.
std::vector<double> sample_increment(std::size_t n_modes, double dt, rng::SplitMix64& gen);

/// HS0^2 = sum_k sigma_k^2 / lambda_k.
double hs0_sq(const NoiseSpec& spec, const SpectralDomain& dom);

/// ||B(X)||_HS^2 = rho(||X||_H)^2 HS0^2.
double hs_norm_sq(const NoiseSpec& spec, const Field& x);

/// Per-mode diffusion coefficients rho(||X||_H)·sigma_k given the H-norm of X.
std::vector<double> diffusion_coeffs(const NoiseSpec& spec, double x_h_norm);

/// B(X) dW as a field; dW must have n_modes entries.
Field apply_B(const NoiseSpec& spec, const Field& x, std::span<const double> dw);

}  // namespace spme
