#include "spme/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <lapacke.h>

#include "spme/errors.hpp"
#include "spme/rng.hpp"

namespace spme {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Solves the tridiagonal system in place; rhs becomes the solution.
void tridiagonal_solve(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                       std::vector<double>& rhs) {
  const auto n = static_cast<lapack_int>(diag.size());
  const lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, n, 1, sub.data(), diag.data(), sup.data(),
                                        rhs.data(), n);
  if (info != 0) throw ConvergenceError("tridiagonal solve failed (info " + std::to_string(info) + ")", 0.0);
}

// (L_h w)_i = (w_{i-1} - 2 w_i + w_{i+1}) / h^2 with zero boundary values.
void apply_lh(std::span<const double> w, double h, std::span<double> out) {
  const std::size_t n = w.size();
  const double inv = 1.0 / (h * h);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? w[i - 1] : 0.0;
    const double right = i + 1 < n ? w[i + 1] : 0.0;
    out[i] = (left - 2.0 * w[i] + right) * inv;
  }
}

}  // namespace

GalerkinSystem::GalerkinSystem(DomainPtr dom, DriftSpec drift, NoiseSpec noise,
                               StepperConfig config)
    : dom_(std::move(dom)),
      drift_(std::move(drift)),
      noise_(std::move(noise)),
      config_(config) {
  drift_.validate();
  noise_.validate(*dom_);
  const std::size_t n = dom_->n_grid();
  n_modes_ = config_.n_modes == 0 ? n : config_.n_modes;
  if (n_modes_ > n) {
    throw ValidationError("stepper.n_modes: " + std::to_string(n_modes_) + " exceeds n_grid " +
                          std::to_string(n));
  }
  if (!(config_.dt > 0.0) || !std::isfinite(config_.dt)) {
    throw ValidationError("stepper.dt: must be > 0");
  }
  if (!(config_.T >= 0.0)) throw ValidationError("stepper.T: must be >= 0");
  const double ratio = config_.T / config_.dt;
  steps_ = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(static_cast<double>(steps_) - ratio) > 1e-9 * std::max(1.0, ratio)) {
    throw ValidationError("stepper.T: must be an integer multiple of dt");
  }
  if (config_.save_every == 0) throw ValidationError("run.save_every: must be >= 1");
  if (config_.implicit_max_iter < 1 || !(config_.implicit_tol > 0.0)) {
    throw ValidationError("stepper.implicit_tol: tolerance and iteration cap must be positive");
  }
  brownian_dt_ = config_.brownian_dt > 0.0 ? config_.brownian_dt : config_.dt;
  const double levels = std::log2(brownian_dt_ / config_.dt);
  level_ = static_cast<unsigned>(std::lround(std::max(0.0, levels)));
  if (levels < -1e-9 || std::abs(std::ldexp(config_.dt, static_cast<int>(level_)) - brownian_dt_) >
                            1e-9 * brownian_dt_) {
    throw ValidationError("stepper.brownian_dt: must be dt times a power of two");
  }
  if (config_.scheme == Scheme::SemiImplicitEM && dom_->alpha() != 1.0) {
    throw UnsupportedError(
        "stepper.scheme: semi_implicit needs alpha = 1; use explicit for fractional operators");
  }
}

std::vector<std::size_t> GalerkinSystem::save_steps() const {
  std::vector<std::size_t> s;
  for (std::size_t k = 0; k <= steps_; k += config_.save_every) s.push_back(k);
  if (s.back() != steps_) s.push_back(steps_);
  return s;
}

std::vector<double> GalerkinSystem::save_times() const {
  std::vector<double> t;
  for (std::size_t k : save_steps()) t.push_back(static_cast<double>(k) * config_.dt);
  return t;
}

Field GalerkinSystem::initial(const Field& x0) const { return project(n_modes_, x0); }

std::vector<double> GalerkinSystem::drift_coeffs(double t, const Field& x) const {
  return assemble_A_coeffs(*dom_, drift_, t, x.values(), x.coeffs(), n_modes_);
}

std::vector<double> GalerkinSystem::diffusion(const Field& x) const {
  std::vector<double> z = diffusion_coeffs(noise_, h_norm(x));
  for (std::size_t k = n_modes_; k < z.size(); ++k) z[k] = 0.0;
  return z;
}

double GalerkinSystem::stability_number(const Field& x) const {
  double sup = 0.0;
  if (drift_.psi.is_linear()) {
    sup = drift_.psi.derivative_bound(1.0);
  } else {
    for (double v : x.values()) sup = std::max(sup, drift_.psi.derivative_bound(v));
  }
  return config_.dt * dom_->eigenvalue(n_modes_ - 1) * sup;
}

Field GalerkinSystem::step_explicit(double t, const Field& x, std::span<const double> dw,
                                    std::size_t step_index) const {
  const double guard = stability_number(x);
  if (!(guard <= 2.0)) {
    std::ostringstream os;
    os << "explicit stability guard dt*lambda_n*sup|Psi'| = " << guard << " > 2 at step "
       << step_index << "; reduce dt or n_modes, or use the semi_implicit scheme";
    throw BlowUpError(os.str(), step_index);
  }
  const double dt = config_.dt;
  const auto a = drift_coeffs(t, x);
  const auto z = diffusion(x);
  std::vector<double> c(x.coeffs().begin(), x.coeffs().end());
  for (std::size_t k = 0; k < n_modes_; ++k) c[k] += dt * a[k];
  for (std::size_t k = 0; k < std::min(z.size(), n_modes_); ++k) c[k] += z[k] * dw[k];
  if (!all_finite(c)) {
    throw BlowUpError("non-finite state at step " + std::to_string(step_index), step_index);
  }
  return Field::from_coeffs(dom_, std::move(c));
}

Field GalerkinSystem::step_semi_implicit(double t, const Field& x, std::span<const double> dw,
                                         std::size_t step_index) const {
  if (dom_->alpha() != 1.0) {
    throw UnsupportedError("semi-implicit stepping needs alpha = 1");
  }
  const std::size_t n = dom_->n_grid();
  const double dt = config_.dt;
  const double h = dom_->h();
  const double r = dt / (h * h);
  const double t1 = t + dt;
  const auto xv = x.values();

  // b = X + dt (h_t X + Phi0(X)) + B dW on the grid.
  std::vector<double> bc(n, 0.0);
  const auto z = diffusion(x);
  for (std::size_t k = 0; k < std::min(z.size(), n_modes_); ++k) bc[k] = z[k] * dw[k];
  std::vector<double> b = dom_->from_spectral(bc);
  const double ht = drift_.phi.h(t);
  for (std::size_t i = 0; i < n; ++i) {
    b[i] += xv[i] + dt * (ht * xv[i] + drift_.phi.phi0_eval(xv[i]));
  }

  const auto& psi = drift_.psi;
  const double cap = config_.jacobian_cap;
  std::vector<double> u(n), work(n), lw(n), res(n);

  const bool inverse_form = psi.form == PsiSpec::Form::PowerSum && psi.terms.size() == 1 &&
                            psi.terms[0].exponent < 1.0 && psi.terms[0].coeff > 0.0;
  double last = 0.0;
  bool converged = false;

  if (inverse_form) {
    // Unknown w = Psi(u); u = Psi^{-1}(w) is smooth where Psi' is singular.
    const double a = psi.modulation(t1) * psi.terms[0].coeff;
    const double p = 1.0 / psi.terms[0].exponent;
    const auto inv = [&](double w) {
      const double v = std::pow(std::abs(w) / a, p);
      return w < 0.0 ? -v : v;
    };
    const auto inv_prime = [&](double w) { return p / a * std::pow(std::abs(w) / a, p - 1.0); };
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = psi.eval(t1, xv[i]);
    const auto residual = [&](std::span<const double> ww, std::span<double> out) {
      apply_lh(ww, h, lw);
      for (std::size_t i = 0; i < n; ++i) out[i] = inv(ww[i]) - dt * lw[i] - b[i];
      return max_abs(out);
    };
    last = residual(w, res);
    for (int it = 0; it < config_.implicit_max_iter && !(converged = last <= config_.implicit_tol);
         ++it) {
      std::vector<double> diag(n), off(n > 1 ? n - 1 : 0, -r);
      for (std::size_t i = 0; i < n; ++i) diag[i] = inv_prime(w[i]) + 2.0 * r;
      std::vector<double> step(res.size());
      for (std::size_t i = 0; i < n; ++i) step[i] = -res[i];
      tridiagonal_solve(off, diag, off, step);
      double tau = 1.0;
      for (int ls = 0; ls < 40; ++ls, tau *= 0.5) {
        for (std::size_t i = 0; i < n; ++i) work[i] = w[i] + tau * step[i];
        std::vector<double> trial(n);
        const double next = residual(work, trial);
        if (next < (1.0 - 1e-4 * tau) * last || ls == 39) {
          w = work;
          res = trial;
          last = next;
          break;
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) u[i] = inv(w[i]);
    converged = converged || last <= config_.implicit_tol;
  } else {
    u.assign(xv.begin(), xv.end());
    std::vector<double> pv(n);
    const auto residual = [&](std::span<const double> uu, std::span<double> out) {
      for (std::size_t i = 0; i < n; ++i) pv[i] = psi.eval(t1, uu[i]);
      apply_lh(pv, h, lw);
      for (std::size_t i = 0; i < n; ++i) out[i] = uu[i] - dt * lw[i] - b[i];
      return max_abs(out);
    };
    last = residual(u, res);
    for (int it = 0; it < config_.implicit_max_iter && !(converged = last <= config_.implicit_tol);
         ++it) {
      std::vector<double> d(n), sub(n > 1 ? n - 1 : 0), sup(n > 1 ? n - 1 : 0);
      for (std::size_t i = 0; i < n; ++i) {
        const double q = std::min(cap, std::abs(psi.derivative(t1, u[i])));
        d[i] = 1.0 + 2.0 * r * q;
        if (i + 1 < n) sub[i] = -r * q;
        if (i > 0) sup[i - 1] = -r * q;
      }
      std::vector<double> step(n);
      for (std::size_t i = 0; i < n; ++i) step[i] = -res[i];
      tridiagonal_solve(sub, d, sup, step);
      double tau = 1.0;
      for (int ls = 0; ls < 40; ++ls, tau *= 0.5) {
        for (std::size_t i = 0; i < n; ++i) work[i] = u[i] + tau * step[i];
        std::vector<double> trial(n);
        const double next = residual(work, trial);
        if (next < (1.0 - 1e-4 * tau) * last || ls == 39) {
          u = work;
          res = trial;
          last = next;
          break;
        }
      }
    }
    converged = converged || last <= config_.implicit_tol;
  }

  if (!converged) {
    std::ostringstream os;
    os << "semi-implicit Newton did not reach tol " << config_.implicit_tol << " in "
       << config_.implicit_max_iter << " iterations at step " << step_index
       << " (residual " << last << ")";
    throw ConvergenceError(os.str(), last);
  }
  if (!all_finite(u)) {
    throw BlowUpError("non-finite state at step " + std::to_string(step_index), step_index);
  }
  auto c = dom_->to_spectral(u, n_modes_);
  return Field::from_coeffs(dom_, std::move(c));
}

Field GalerkinSystem::step(double t, const Field& x, std::span<const double> dw,
                           std::size_t step_index) const {
  return config_.scheme == Scheme::ExplicitEM ? step_explicit(t, x, dw, step_index)
                                              : step_semi_implicit(t, x, dw, step_index);
}

// ---------------------------------------------------------------------------

namespace {

struct Driver {
  const GalerkinSystem& sys;
  rng::BrownianSource source;
  std::vector<double> dw;
  bool noisy;

  Driver(const GalerkinSystem& s, std::uint64_t seed, std::uint64_t path)
      : sys(s),
        source(seed, path, s.noise().n_modes(), s.brownian_dt()),
        dw(s.noise().n_modes(), 0.0),
        noisy(!s.noise().zero()) {}

  std::span<const double> increment(std::size_t k) {
    if (noisy) source.increment(sys.refinement_level(), k, dw);
    return dw;
  }
};

}  // namespace

void simulate_observe(const GalerkinSystem& sys, const Field& x0, std::uint64_t master_seed,
                      std::uint64_t path, const StateObserver& observe, ItoRecord* record) {
  Driver drv(sys, master_seed, path);
  const auto saves = sys.save_steps();
  const double dt = sys.config().dt;
  Field x = sys.initial(x0);
  std::size_t next_save = 0;
  for (std::size_t k = 0;; ++k) {
    if (next_save < saves.size() && saves[next_save] == k) {
      observe(next_save, static_cast<double>(k) * dt, x);
      ++next_save;
    }
    if (k == sys.steps()) break;
    const double t = static_cast<double>(k) * dt;
    const auto dw = drv.increment(k);
    if (record) {
      const auto& c = x.coeffs();
      record->x.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(sys.n_modes()));
      record->y.push_back(sys.drift_coeffs(t, x));
      record->z.push_back(sys.diffusion(x));
      record->dw.emplace_back(dw.begin(), dw.end());
    }
    x = sys.step(t, x, dw, k);
  }
}

Trajectory simulate(const GalerkinSystem& sys, const Field& x0, std::uint64_t master_seed,
                    std::uint64_t path) {
  Trajectory tr;
  tr.master_seed = master_seed;
  tr.path = path;
  ItoRecord rec;
  simulate_observe(
      sys, x0, master_seed, path,
      [&](std::size_t, double t, const Field& x) {
        tr.times.push_back(t);
        tr.states.push_back(x);
      },
      sys.config().record_ito ? &rec : nullptr);
  if (sys.config().record_ito) tr.ito = std::move(rec);
  return tr;
}

void simulate_pair_observe(const GalerkinSystem& sys, const Field& x0, const Field& y0,
                           std::uint64_t master_seed, std::uint64_t path,
                           const PairObserver& observe) {
  Driver drv(sys, master_seed, path);
  const auto saves = sys.save_steps();
  const double dt = sys.config().dt;
  Field x = sys.initial(x0);
  Field y = sys.initial(y0);
  std::size_t next_save = 0;
  for (std::size_t k = 0;; ++k) {
    if (next_save < saves.size() && saves[next_save] == k) {
      observe(next_save, static_cast<double>(k) * dt, x, y);
      ++next_save;
    }
    if (k == sys.steps()) break;
    const double t = static_cast<double>(k) * dt;
    const auto dw = drv.increment(k);
    x = sys.step(t, x, dw, k);
    y = sys.step(t, y, dw, k);
  }
}

std::pair<Trajectory, Trajectory> simulate_pair(const GalerkinSystem& sys, const Field& x0,
                                                const Field& y0, std::uint64_t master_seed,
                                                std::uint64_t path) {
  std::pair<Trajectory, Trajectory> out;
  out.first.master_seed = out.second.master_seed = master_seed;
  out.first.path = out.second.path = path;
  simulate_pair_observe(sys, x0, y0, master_seed, path,
                        [&](std::size_t, double t, const Field& x, const Field& y) {
                          out.first.times.push_back(t);
                          out.first.states.push_back(x);
                          out.second.times.push_back(t);
                          out.second.states.push_back(y);
                        });
  return out;
}

}  // namespace spme
