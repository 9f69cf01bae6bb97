#pragma once

// Discretized Gelfand triple V in H in V* on (0,1) with Dirichlet boundary:
// the (fractional) finite-difference Laplacian in its sine eigenbasis, the
// Green-space inner product and Galerkin projections.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "spme/orlicz.hpp"

namespace spme {

/// Interior grid x_i = i h, h = 1/(n_grid+1), with eigenpairs
/// lambda_k = ((2/h^2)(1 - cos(k pi h)))^alpha and
/// s_k(x_i) = sqrt(2) sin(k pi x_i), orthonormal under h·sum.
/// Mode index k is zero-based throughout (k = 0 is the first mode).
class SpectralDomain {
 public:
  static std::shared_ptr<const SpectralDomain> create(std::size_t n_grid, double alpha = 1.0,
                                                      bool finite_mass = true);

  std::size_t n_grid() const noexcept { return n_; }
  double h() const noexcept { return h_; }
  double alpha() const noexcept { return alpha_; }
  double x(std::size_t i) const noexcept { return static_cast<double>(i + 1) * h_; }

  std::span<const double> eigenvalues() const noexcept { return eig_; }
  double eigenvalue(std::size_t k) const { return eig_.at(k); }

  /// s_k at grid point i.
  double basis(std::size_t k, std::size_t i) const noexcept { return basis_[k * n_ + i]; }

  const orlicz::DiscreteMeasure& measure() const noexcept { return measure_; }

  /// c_k = h sum_i v_i s_k(i) for k < n_modes (default: all modes).
  std::vector<double> to_spectral(std::span<const double> values) const;
  std::vector<double> to_spectral(std::span<const double> values, std::size_t n_modes) const;
  /// v_i = sum_k c_k s_k(i); coeffs may be shorter than n_grid.
  std::vector<double> from_spectral(std::span<const double> coeffs) const;

  SpectralDomain(std::size_t n_grid, double alpha, bool finite_mass);

 private:
  std::size_t n_;
  double h_;
  double alpha_;
  std::vector<double> eig_;
  std::vector<double> basis_;
  orlicz::DiscreteMeasure measure_;
};

using DomainPtr = std::shared_ptr<const SpectralDomain>;

/// Grid values and the matching spectral coefficients of a state.
class Field {
 public:
  static Field from_values(DomainPtr dom, std::vector<double> values);
  static Field from_coeffs(DomainPtr dom, std::vector<double> coeffs);
  static Field zero(DomainPtr dom);
  static Field mode(DomainPtr dom, std::size_t k, double amplitude = 1.0);

  const SpectralDomain& domain() const noexcept { return *dom_; }
  const DomainPtr& domain_ptr() const noexcept { return dom_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  Field(DomainPtr dom, std::vector<double> values, std::vector<double> coeffs);

  DomainPtr dom_;
  std::vector<double> values_;
  std::vector<double> coeffs_;
};

/// (L f)^_k = -lambda_k f^_k.
Field apply_L(const Field& f);
/// (L^{-1} f)^_k = -f^_k / lambda_k.
Field apply_Linv(const Field& f);

/// <u,v>_H = sum_k u^_k v^_k / lambda_k.
double h_inner(const Field& u, const Field& v);
double h_inner(const SpectralDomain& dom, std::span<const double> u_coeffs,
               std::span<const double> v_coeffs);
double h_norm(const Field& u);
double h_norm_sq(const SpectralDomain& dom, std::span<const double> coeffs);
/// sqrt(m(u^2)).
double l2_norm(const Field& u);
/// (m(|u|^p))^{1/p}.
double lp_norm(std::span<const double> values, const orlicz::DiscreteMeasure& m, double p);

/// ||u||_V = ||u||_{L_N} + ||u||_H.
double v_norm(const orlicz::YoungFunction& n, const Field& u);

/// Zeroes every coefficient with index >= n_modes.
Field project(std::size_t n_modes, const Field& u);

/// <L psi, u>_{V*,V} as -m(psi u).
double pairing_quadrature(const Field& psi, const Field& u);
/// The same pairing as <L psi, u>_H in spectral coordinates.
double pairing_spectral(const Field& psi, const Field& u);

}  // namespace spme
