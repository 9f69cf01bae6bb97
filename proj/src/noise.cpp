#include "spme/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "spme/errors.hpp"

namespace spme {

double Multiplier::operator()(double x) const {
  return kind == Kind::Constant ? value : value / (1.0 + x);
}

double Multiplier::lipschitz() const { return kind == Kind::Constant ? 0.0 : std::abs(value); }

double Multiplier::upper() const { return std::abs(value); }

NoiseSpec NoiseSpec::decay(std::size_t n_modes, double sigma0, double beta, Multiplier mult) {
  NoiseSpec s;
  s.sigma.resize(n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    s.sigma[k] = sigma0 * std::pow(static_cast<double>(k + 1), -beta);
  }
  s.mult = mult;
  return s;
}

bool NoiseSpec::zero() const {
  return mult.value == 0.0 ||
         std::all_of(sigma.begin(), sigma.end(), [](double s) { return s == 0.0; });
}

void NoiseSpec::validate(const SpectralDomain& dom) const {
  if (sigma.size() > dom.n_grid()) {
    throw ValidationError("noise.sigma: more modes (" + std::to_string(sigma.size()) +
                          ") than grid points");
  }
  for (double s : sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("noise.sigma: entries must be >= 0");
  }
  if (!std::isfinite(mult.value) || mult.value < 0.0) {
    throw ValidationError("noise.mult: factor must be finite and >= 0");
  }
}

std::vector<double> sample_increment(std::size_t n_modes, double dt, rng::SplitMix64& gen) {
  std::vector<double> dw(n_modes, 0.0);
  if (dt == 0.0) return dw;
  if (dt < 0.0) throw std::invalid_argument("sample_increment: dt must be >= 0");
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  for (double& w : dw) w = normal(gen);
  return dw;
}

double hs0_sq(const NoiseSpec& spec, const SpectralDomain& dom) {
  const auto eig = dom.eigenvalues();
  long double acc = 0.0L;
  for (std::size_t k = 0; k < spec.sigma.size(); ++k) {
    acc += static_cast<long double>(spec.sigma[k]) * spec.sigma[k] / eig[k];
  }
  return static_cast<double>(acc);
}

double hs_norm_sq(const NoiseSpec& spec, const Field& x) {
  const double rho = spec.mult(h_norm(x));
  return rho * rho * hs0_sq(spec, x.domain());
}

std::vector<double> diffusion_coeffs(const NoiseSpec& spec, double x_h_norm) {
  const double rho = spec.mult(x_h_norm);
  std::vector<double> z(spec.sigma.size());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = rho * spec.sigma[k];
  return z;
}

Field apply_B(const NoiseSpec& spec, const Field& x, std::span<const double> dw) {
  if (dw.size() != spec.sigma.size()) {
    throw std::invalid_argument("apply_B: dW has " + std::to_string(dw.size()) +
                                " entries, expected " + std::to_string(spec.sigma.size()));
  }
  const auto z = diffusion_coeffs(spec, h_norm(x));
  std::vector<double> c(x.size(), 0.0);
  for (std::size_t k = 0; k < z.size(); ++k) c[k] = z[k] * dw[k];
  return Field::from_coeffs(x.domain_ptr(), std::move(c));
}

}  // namespace spme
