#pragma once

// Nonlinearities Psi and Phi and the assembled drift A = L Psi + Phi-bar.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spme/orlicz.hpp"
#include "spme/triple.hpp"

namespace spme {

/// Bounded time profile mean + amplitude·sin(2 pi t / period).
struct TimeProfile {
  double mean = 1.0;
  double amplitude = 0.0;
  double period = 1.0;

  double operator()(double t) const;
  double lower() const noexcept { return mean - std::abs(amplitude); }
  double upper() const noexcept { return mean + std::abs(amplitude); }
  double sup_abs() const noexcept { return std::abs(mean) + std::abs(amplitude); }
  bool constant() const noexcept { return amplitude == 0.0; }
};

/// coeff·sign(s)|s|^exponent.
struct SignedPower {
  double coeff;
  double exponent;
};

/// Psi(t,s) = a(t)·sign(s)·sum_i delta_i |s|^{r_i}, or
/// a(t)·sign(s)|s|^{theta-1} log(1+|s|)^r.
///
/// Negative coefficients are accepted so that checkers can be fed
/// non-monotone counterexamples; young() then uses |delta_i|.
struct PsiSpec {
  enum class Form { PowerSum, LogPower };

  Form form = Form::PowerSum;
  std::vector<SignedPower> terms;
  double theta = 2.0;
  double log_r = 1.0;
  TimeProfile modulation;

  static PsiSpec power_sum(std::vector<SignedPower> terms, TimeProfile modulation = {});
  static PsiSpec power(double delta, double r, TimeProfile modulation = {});
  static PsiSpec log_power(double theta, double r, TimeProfile modulation = {});

  double eval(double t, double s) const;
  /// d/ds Psi(t,s); +inf at s=0 when some exponent is below 1.
  double derivative(double t, double s) const;
  /// Derivative of the unmodulated profile.
  double shape_derivative(double s) const;
  /// sup_t |Psi'(t,s)| for the stability guard.
  double derivative_bound(double s) const;

  /// N with s Psi(t,s) >= N(s): PowerSum with coefficients a_min·|delta_i|
  /// and exponents r_i+1, or a_min·|s|^theta log(1+|s|)^r.
  orlicz::YoungFunction young() const;

  /// Largest delta sum over exponents equal to one (the linear part), scaled by a_min.
  double linear_part() const;
  bool is_linear() const;
  double min_exponent() const;
  std::string describe() const;
};

/// Phi(t,s) = h(t) s + Phi0(s), Phi0(s) = sum_i eps_i sign(s)|s|^{r_i}.
struct PhiSpec {
  TimeProfile h{0.0, 0.0, 1.0};
  std::vector<SignedPower> phi0;

  double eval(double t, double s) const { return h(t) * s + phi0_eval(s); }
  double phi0_eval(double s) const;
  double phi0_derivative(double s) const;
  bool has_phi0() const;
  bool phi0_linear() const;
};

enum class ConditionMode { A1, A2 };

struct DriftSpec {
  PsiSpec psi;
  PhiSpec phi;
  double f_const = 0.0;
  double g_const = 0.0;
  ConditionMode mode = ConditionMode::A1;

  /// Throws ValidationError on inconsistent settings.
  void validate() const;
};

/// Spectral coefficients of A(t,X) in H coordinates for the first n_modes:
/// -lambda_k Psi(t,X)^_k + h(t) X^_k + Phi0(X)^_k.
std::vector<double> assemble_A_coeffs(const SpectralDomain& dom, const DriftSpec& spec, double t,
                                      std::span<const double> values,
                                      std::span<const double> coeffs, std::size_t n_modes);

Field assemble_A(const DriftSpec& spec, double t, const Field& x);

/// <A(t,v), u>_{V*,V} = -m(Psi(v) u) + h <v,u>_H - m(Phi0(v) L^{-1} u).
double drift_pairing(const DriftSpec& spec, double t, const Field& v, const Field& u);

}  // namespace spme
