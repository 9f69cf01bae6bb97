#pragma once

// Sample-based certificates for the structural conditions on Psi, Phi and
// the assembled drift: (A1), (A2), (H1)-(H4) and the declared constants.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spme/csv.hpp"
#include "spme/drift.hpp"
#include "spme/noise.hpp"
#include "spme/triple.hpp"

namespace spme {

/// Ordered key/value record of constants and worst-case margins.
struct ConditionReport {
  std::string name;
  bool pass = true;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::string> failures;

  void set(const std::string& key, double value);
  double get(const std::string& key) const;
  bool has(const std::string& key) const;
  void fail(std::string message);
  CsvTable to_csv() const;
};

/// 0, +-s for s log-spaced on [lo, hi].
std::vector<double> symmetric_log_grid(double lo = 1e-4, double hi = 1e4, std::size_t points = 81);

/// (Psi1) monotonicity, (Psi2)/(Psi3) with the reported c and f, (Psi4),
/// and Delta_2 regularity of N and N*. Keys: c, f, f_required,
/// psi1_margin, psi3_ratio, psi4_value, q_N, q_Nstar.
ConditionReport check_A1(const DriftSpec& spec, bool finite_measure = true,
                         std::span<const double> grid = {});

/// max over random fields of ||L^{-1}u||_p / ||u||_p, inflated by 1.5.
double estimate_Linv_norm(const SpectralDomain& dom, double p, std::uint64_t seed = 7,
                          std::size_t samples = 200);

/// (Psi1)' with mu_i = a_min 2^{1-r_i} |delta_i|, (Psi2)', (Phi1), (Phi2).
/// Keys: kappa_<i>, mu_<i>, eps_required, psi1p_margin, phi1_margin,
/// c, ctilde. Throws UnsupportedError for exponents below 1.
ConditionReport check_A2(const DriftSpec& spec, const SpectralDomain& dom,
                         std::span<const double> grid = {}, std::uint64_t seed = 7);

/// Constants declared for (H2)-(H4) from the (A1)/(A2) certificates.
struct HConstants {
  double c = 0.0;    ///< (H2)
  double c1 = 0.0;   ///< (H3)
  double c2 = 0.0;   ///< (H3)
  double f = 0.0;    ///< (H3)
  double c3 = 0.0;   ///< (H4)
  double g = 0.0;    ///< (H4)
  double eps = 0.0;  ///< Phi0 share of the dissipation
  double c_psi = 1.0;
  double f_psi = 0.0;
};

HConstants declare_constants(const SpectralDomain& dom, const DriftSpec& drift,
                             const NoiseSpec& noise, bool finite_measure = true);

/// R(v) = m(N(v)) + ||v||_H^2.
double r_functional(const orlicz::YoungFunction& n, const Field& v);

/// Gaussian random field with coefficients ~ N(0,1) (k+1)^{-gamma}, scaled so
/// that its max norm equals `scale`, on the first n_modes modes.
Field random_field(const DomainPtr& dom, std::uint64_t key, double gamma, double scale,
                   std::size_t n_modes = 0);

struct HCheckOptions {
  std::size_t n_samples = 1000;
  std::uint64_t seed = 11;
  std::size_t n_modes = 0;  ///< 0 = all modes
  double gamma = 1.0;
  std::size_t h1_samples = 8;
  std::optional<HConstants> declared;  ///< defaults to declare_constants
};

/// Empirical (H2) constant and (H3)/(H4) margins against the declared
/// constants on random pairs; (H1) via a lambda sweep. Keys: c_declared,
/// c_empirical, c1, c2, f, h3_margin, c3, g, h4_margin, h1_ratio.
ConditionReport check_H(const DomainPtr& dom, const DriftSpec& drift, const NoiseSpec& noise,
                        const HCheckOptions& options = {});

/// Sub-additivity of R on random pairs: R(x+y) <= (R(2x) + R(2y)) / 2.
ConditionReport check_K(const DomainPtr& dom, const DriftSpec& drift, std::size_t n_samples = 1000,
                        std::uint64_t seed = 13, double gamma = 1.0);

}  // namespace spme
