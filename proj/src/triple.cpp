#include "spme/triple.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spme/errors.hpp"

namespace spme {

namespace {

orlicz::DiscreteMeasure uniform_measure(std::size_t n, bool finite_mass) {
  if (n == 0) throw ValidationError("n_grid must be >= 1");
  return orlicz::DiscreteMeasure(std::vector<double>(n, 1.0 / static_cast<double>(n + 1)),
                                 finite_mass);
}

void require_same_domain(const Field& a, const Field& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("fields live on different domains");
  }
}

}  // namespace

SpectralDomain::SpectralDomain(std::size_t n_grid, double alpha, bool finite_mass)
    : n_(n_grid),
      h_(1.0 / static_cast<double>(n_grid + 1)),
      alpha_(alpha),
      measure_(uniform_measure(n_grid, finite_mass)) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
  const double pi = std::numbers::pi;
  eig_.resize(n_);
  for (std::size_t k = 0; k < n_; ++k) {
    const double kk = static_cast<double>(k + 1);
    // 1 - cos(x) = 2 sin^2(x/2) avoids cancellation for the low modes.
    const double s = std::sin(0.5 * kk * pi * h_);
    const double fd = 4.0 * s * s / (h_ * h_);
    eig_[k] = alpha == 1.0 ? fd : std::pow(fd, alpha);
  }
  basis_.resize(n_ * n_);
  const double amp = std::numbers::sqrt2;
  for (std::size_t k = 0; k < n_; ++k) {
    for (std::size_t i = 0; i < n_; ++i) {
      // Reduce k*i modulo 2(n+1) so the sine argument stays small.
      const std::size_t period = 2 * (n_ + 1);
      const std::size_t ki = ((k + 1) * (i + 1)) % period;
      basis_[k * n_ + i] = amp * std::sin(static_cast<double>(ki) * pi * h_);
    }
  }
}

std::shared_ptr<const SpectralDomain> SpectralDomain::create(std::size_t n_grid, double alpha,
                                                             bool finite_mass) {
  return std::make_shared<const SpectralDomain>(n_grid, alpha, finite_mass);
}

std::vector<double> SpectralDomain::to_spectral(std::span<const double> values) const {
  return to_spectral(values, n_);
}

std::vector<double> SpectralDomain::to_spectral(std::span<const double> values,
                                                std::size_t n_modes) const {
  if (values.size() != n_) throw std::invalid_argument("to_spectral: size mismatch");
  std::vector<double> c(n_modes, 0.0);
  for (std::size_t k = 0; k < n_modes; ++k) {
    const double* row = &basis_[k * n_];
    long double acc = 0.0L;
    for (std::size_t i = 0; i < n_; ++i) acc += static_cast<long double>(row[i]) * values[i];
    c[k] = static_cast<double>(acc * h_);
  }
  return c;
}

std::vector<double> SpectralDomain::from_spectral(std::span<const double> coeffs) const {
  if (coeffs.size() > n_) throw std::invalid_argument("from_spectral: too many coefficients");
  std::vector<long double> acc(n_, 0.0L);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double c = coeffs[k];
    if (c == 0.0) continue;
    const double* row = &basis_[k * n_];
    for (std::size_t i = 0; i < n_; ++i) acc[i] += static_cast<long double>(c) * row[i];
  }
  return std::vector<double>(acc.begin(), acc.end());
}

// ---------------------------------------------------------------------------

Field::Field(DomainPtr dom, std::vector<double> values, std::vector<double> coeffs)
    : dom_(std::move(dom)), values_(std::move(values)), coeffs_(std::move(coeffs)) {}

Field Field::from_values(DomainPtr dom, std::vector<double> values) {
  auto c = dom->to_spectral(values);
  return Field(std::move(dom), std::move(values), std::move(c));
}

Field Field::from_coeffs(DomainPtr dom, std::vector<double> coeffs) {
  coeffs.resize(dom->n_grid(), 0.0);
  auto v = dom->from_spectral(coeffs);
  return Field(std::move(dom), std::move(v), std::move(coeffs));
}

Field Field::zero(DomainPtr dom) {
  const std::size_t n = dom->n_grid();
  return Field(std::move(dom), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
}

Field Field::mode(DomainPtr dom, std::size_t k, double amplitude) {
  if (k >= dom->n_grid()) throw std::out_of_range("Field::mode: index " + std::to_string(k));
  std::vector<double> c(dom->n_grid(), 0.0);
  c[k] = amplitude;
  return from_coeffs(std::move(dom), std::move(c));
}

// ---------------------------------------------------------------------------

Field apply_L(const Field& f) {
  const auto eig = f.domain().eigenvalues();
  std::vector<double> c(f.coeffs().begin(), f.coeffs().end());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= -eig[k];
  return Field::from_coeffs(f.domain_ptr(), std::move(c));
}

Field apply_Linv(const Field& f) {
  const auto eig = f.domain().eigenvalues();
  std::vector<double> c(f.coeffs().begin(), f.coeffs().end());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] /= -eig[k];
  return Field::from_coeffs(f.domain_ptr(), std::move(c));
}

double h_inner(const SpectralDomain& dom, std::span<const double> u, std::span<const double> v) {
  const std::size_t n = std::min(u.size(), v.size());
  const auto eig = dom.eigenvalues();
  long double acc = 0.0L;
  for (std::size_t k = 0; k < n; ++k) acc += static_cast<long double>(u[k]) * v[k] / eig[k];
  return static_cast<double>(acc);
}

double h_inner(const Field& u, const Field& v) {
  require_same_domain(u, v);
  return h_inner(u.domain(), u.coeffs(), v.coeffs());
}

double h_norm_sq(const SpectralDomain& dom, std::span<const double> coeffs) {
  return h_inner(dom, coeffs, coeffs);
}

double h_norm(const Field& u) { return std::sqrt(h_norm_sq(u.domain(), u.coeffs())); }

double l2_norm(const Field& u) {
  return std::sqrt(u.domain().measure().integrate_product(u.values(), u.values()));
}

double lp_norm(std::span<const double> values, const orlicz::DiscreteMeasure& m, double p) {
  const auto w = m.weights();
  long double acc = 0.0L;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += static_cast<long double>(w[i]) * std::pow(std::abs(values[i]), p);
  }
  return std::pow(static_cast<double>(acc), 1.0 / p);
}

double v_norm(const orlicz::YoungFunction& n, const Field& u) {
  return orlicz::luxemburg_norm(u.values(), n, u.domain().measure()) + h_norm(u);
}

Field project(std::size_t n_modes, const Field& u) {
  if (n_modes < 1 || n_modes > u.size()) {
    throw PreconditionError("project: n_modes=" + std::to_string(n_modes) +
                            " outside [1, " + std::to_string(u.size()) + "]");
  }
  std::vector<double> c(u.coeffs().begin(), u.coeffs().end());
  std::fill(c.begin() + static_cast<std::ptrdiff_t>(n_modes), c.end(), 0.0);
  return Field::from_coeffs(u.domain_ptr(), std::move(c));
}

double pairing_quadrature(const Field& psi, const Field& u) {
  require_same_domain(psi, u);
  return -psi.domain().measure().integrate_product(psi.values(), u.values());
}

double pairing_spectral(const Field& psi, const Field& u) {
  return h_inner(apply_L(psi), u);
}

}  // namespace spme
