#include "spme/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spme/errors.hpp"

namespace spme {

double TimeProfile::operator()(double t) const {
  if (amplitude == 0.0) return mean;
  return mean + amplitude * std::sin(2.0 * std::numbers::pi * t / period);
}

namespace {

double signed_pow(double s, double r) {
  if (s == 0.0) return 0.0;
  const double a = std::pow(std::abs(s), r);
  return s > 0.0 ? a : -a;
}

double power_derivative(double s, double r) {
  const double a = std::abs(s);
  if (r == 1.0) return 1.0;
  if (a == 0.0) return r < 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return r * std::pow(a, r - 1.0);
}

}  // namespace

PsiSpec PsiSpec::power_sum(std::vector<SignedPower> terms, TimeProfile modulation) {
  PsiSpec p;
  p.form = Form::PowerSum;
  p.terms = std::move(terms);
  p.modulation = modulation;
  return p;
}

PsiSpec PsiSpec::power(double delta, double r, TimeProfile modulation) {
  return power_sum({SignedPower{delta, r}}, modulation);
}

PsiSpec PsiSpec::log_power(double theta, double r, TimeProfile modulation) {
  PsiSpec p;
  p.form = Form::LogPower;
  p.theta = theta;
  p.log_r = r;
  p.modulation = modulation;
  return p;
}

double PsiSpec::eval(double t, double s) const {
  const double a = modulation(t);
  if (form == Form::LogPower) {
    if (s == 0.0) return 0.0;
    const double m = std::abs(s);
    const double v = std::pow(m, theta - 1.0) * std::pow(std::log1p(m), log_r);
    return a * (s > 0.0 ? v : -v);
  }
  double acc = 0.0;
  for (const auto& term : terms) acc += term.coeff * signed_pow(s, term.exponent);
  return a * acc;
}

double PsiSpec::shape_derivative(double s) const {
  if (form == Form::LogPower) {
    const double m = std::abs(s);
    if (m == 0.0) return 0.0;
    const double l = std::log1p(m);
    return (theta - 1.0) * std::pow(m, theta - 2.0) * std::pow(l, log_r) +
           std::pow(m, theta - 1.0) * log_r * std::pow(l, log_r - 1.0) / (1.0 + m);
  }
  double acc = 0.0;
  for (const auto& term : terms) acc += term.coeff * power_derivative(s, term.exponent);
  return acc;
}

double PsiSpec::derivative(double t, double s) const { return modulation(t) * shape_derivative(s); }

double PsiSpec::derivative_bound(double s) const {
  const double a = std::max(std::abs(modulation.lower()), std::abs(modulation.upper()));
  return a * std::abs(shape_derivative(s));
}

orlicz::YoungFunction PsiSpec::young() const {
  const double a_min = modulation.lower();
  if (!(a_min > 0.0)) throw ValidationError("psi: modulation must stay above a positive constant");
  if (form == Form::LogPower) return orlicz::YoungFunction::log_power(theta, log_r, a_min);
  std::vector<orlicz::PowerTerm> n;
  for (const auto& term : terms) {
    n.push_back(orlicz::PowerTerm{a_min * std::abs(term.coeff), term.exponent + 1.0});
  }
  return orlicz::YoungFunction::power_sum(std::move(n));
}

double PsiSpec::linear_part() const {
  if (form != Form::PowerSum) return 0.0;
  double acc = 0.0;
  for (const auto& term : terms) {
    if (term.exponent == 1.0) acc += term.coeff;
  }
  return std::max(0.0, acc) * modulation.lower();
}

bool PsiSpec::is_linear() const {
  if (form != Form::PowerSum) return false;
  return std::all_of(terms.begin(), terms.end(),
                     [](const SignedPower& p) { return p.exponent == 1.0; });
}

double PsiSpec::min_exponent() const {
  if (form == Form::LogPower) return theta - 1.0;
  double r = std::numeric_limits<double>::infinity();
  for (const auto& term : terms) r = std::min(r, term.exponent);
  return r;
}

std::string PsiSpec::describe() const {
  std::ostringstream os;
  if (form == Form::LogPower) {
    os << "sign(s)|s|^" << theta - 1.0 << " log(1+|s|)^" << log_r;
  } else {
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (i) os << " + ";
      os << terms[i].coeff << " sign(s)|s|^" << terms[i].exponent;
    }
  }
  if (!modulation.constant() || modulation.mean != 1.0) {
    os << " x (" << modulation.mean << " + " << modulation.amplitude << " sin)";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

double PhiSpec::phi0_eval(double s) const {
  double acc = 0.0;
  for (const auto& term : phi0) acc += term.coeff * signed_pow(s, term.exponent);
  return acc;
}

double PhiSpec::phi0_derivative(double s) const {
  double acc = 0.0;
  for (const auto& term : phi0) acc += term.coeff * power_derivative(s, term.exponent);
  return acc;
}

bool PhiSpec::has_phi0() const {
  return std::any_of(phi0.begin(), phi0.end(), [](const SignedPower& p) { return p.coeff != 0.0; });
}

bool PhiSpec::phi0_linear() const {
  return std::all_of(phi0.begin(), phi0.end(),
                     [](const SignedPower& p) { return p.coeff == 0.0 || p.exponent == 1.0; });
}

void DriftSpec::validate() const {
  if (psi.form == PsiSpec::Form::PowerSum) {
    if (psi.terms.empty()) throw ValidationError("drift.psi: at least one term required");
    for (const auto& term : psi.terms) {
      if (!(term.exponent > 0.0) || !std::isfinite(term.exponent) || !std::isfinite(term.coeff)) {
        throw ValidationError("drift.psi: exponents must be finite and > 0");
      }
    }
  } else if (!(psi.theta > 1.0) || !(psi.log_r >= 1.0)) {
    throw ValidationError("drift.psi: log form needs theta > 1 and r >= 1");
  }
  if (!(psi.modulation.lower() > 0.0)) {
    throw ValidationError("drift.psi.modulation: a(t) must stay above a positive constant");
  }
  if (!(psi.modulation.period > 0.0) || !(phi.h.period > 0.0)) {
    throw ValidationError("drift: modulation periods must be > 0");
  }
  for (const auto& term : phi.phi0) {
    if (!(term.exponent > 0.0) || !std::isfinite(term.coeff)) {
      throw ValidationError("drift.phi.phi0: exponents must be > 0");
    }
  }
  if (f_const < 0.0 || g_const < 0.0) throw ValidationError("drift: f and g must be >= 0");
  if (mode == ConditionMode::A1 && phi.has_phi0()) {
    throw ValidationError("drift.phi.phi0: a nonzero Phi0 requires mode A2");
  }
  if (mode == ConditionMode::A2) {
    if (psi.form != PsiSpec::Form::PowerSum) {
      throw ValidationError("drift.mode: A2 requires a power-sum Psi");
    }
    if (psi.min_exponent() < 1.0) {
      throw UnsupportedError("drift.mode: A2 with exponents below 1 (fast diffusion) is unsupported");
    }
  }
}

// ---------------------------------------------------------------------------

std::vector<double> assemble_A_coeffs(const SpectralDomain& dom, const DriftSpec& spec, double t,
                                      std::span<const double> values,
                                      std::span<const double> coeffs, std::size_t n_modes) {
  const auto eig = dom.eigenvalues();
  const double h = spec.phi.h(t);
  std::vector<double> a(n_modes, 0.0);

  if (spec.psi.is_linear() && spec.phi.phi0_linear()) {
    double slope = 0.0;
    for (const auto& term : spec.psi.terms) slope += term.coeff;
    slope *= spec.psi.modulation(t);
    double phi_slope = 0.0;
    for (const auto& term : spec.phi.phi0) phi_slope += term.coeff;
    for (std::size_t k = 0; k < n_modes; ++k) {
      a[k] = -eig[k] * slope * coeffs[k] + (h + phi_slope) * coeffs[k];
    }
    return a;
  }

  std::vector<double> psi(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) psi[i] = spec.psi.eval(t, values[i]);
  const auto psi_hat = dom.to_spectral(psi, n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) a[k] = -eig[k] * psi_hat[k] + h * coeffs[k];
  if (spec.phi.has_phi0()) {
    std::vector<double> phi0(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) phi0[i] = spec.phi.phi0_eval(values[i]);
    const auto phi_hat = dom.to_spectral(phi0, n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) a[k] += phi_hat[k];
  }
  return a;
}

Field assemble_A(const DriftSpec& spec, double t, const Field& x) {
  const auto& dom = x.domain();
  return Field::from_coeffs(
      x.domain_ptr(), assemble_A_coeffs(dom, spec, t, x.values(), x.coeffs(), dom.n_grid()));
}

double drift_pairing(const DriftSpec& spec, double t, const Field& v, const Field& u) {
  const auto& dom = v.domain();
  const auto& m = dom.measure();
  std::vector<double> psi(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) psi[i] = spec.psi.eval(t, v.values()[i]);
  double out = -m.integrate_product(psi, u.values()) + spec.phi.h(t) * h_inner(v, u);
  if (spec.phi.has_phi0()) {
    std::vector<double> phi0(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) phi0[i] = spec.phi.phi0_eval(v.values()[i]);
    const Field linv_u = apply_Linv(u);
    out -= m.integrate_product(phi0, linv_u.values());
  }
  return out;
}

}  // namespace spme
