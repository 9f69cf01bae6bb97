#pragma once

// Time stepping of the n-mode Galerkin system
//   dX = P_n A(t,X) dt + P_n B(t,X) dW,  X_0 = P_n x0.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "spme/drift.hpp"
#include "spme/noise.hpp"
#include "spme/triple.hpp"

namespace spme {

enum class Scheme { ExplicitEM, SemiImplicitEM };

struct StepperConfig {
  double dt = 1e-3;
  double T = 1.0;
  std::size_t n_modes = 0;  ///< 0 = all grid modes
  Scheme scheme = Scheme::ExplicitEM;
  double implicit_tol = 1e-10;
  int implicit_max_iter = 100;
  double jacobian_cap = 1e8;  ///< cap 1/zeta on Psi' inside the Newton Jacobian
  bool record_ito = false;
  double brownian_dt = 0.0;  ///< root step of the Brownian tree; 0 = dt
  std::size_t save_every = 1;
};

/// Per-step records for the Ito ledger: state, drift and diffusion
/// coefficients at the left point, and the Brownian increment.
struct ItoRecord {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> y;
  std::vector<std::vector<double>> z;
  std::vector<std::vector<double>> dw;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> states;
  std::optional<ItoRecord> ito;
  std::uint64_t master_seed = 0;
  std::uint64_t path = 0;
};

class GalerkinSystem {
 public:
  GalerkinSystem(DomainPtr dom, DriftSpec drift, NoiseSpec noise, StepperConfig config);

  const SpectralDomain& domain() const noexcept { return *dom_; }
  const DomainPtr& domain_ptr() const noexcept { return dom_; }
  const DriftSpec& drift() const noexcept { return drift_; }
  const NoiseSpec& noise() const noexcept { return noise_; }
  const StepperConfig& config() const noexcept { return config_; }

  std::size_t n_modes() const noexcept { return n_modes_; }
  std::size_t steps() const noexcept { return steps_; }
  unsigned refinement_level() const noexcept { return level_; }
  double brownian_dt() const noexcept { return brownian_dt_; }
  /// Saved time indices (step numbers) and times.
  std::vector<std::size_t> save_steps() const;
  std::vector<double> save_times() const;

  Field initial(const Field& x0) const;

  /// P_n A(t,X) coefficients (n_modes entries).
  std::vector<double> drift_coeffs(double t, const Field& x) const;
  /// P_n B(X) coefficients per noise mode, truncated to n_modes.
  std::vector<double> diffusion(const Field& x) const;
  /// dt·lambda_n·max_i |Psi'(X_i)|.
  double stability_number(const Field& x) const;

  Field step_explicit(double t, const Field& x, std::span<const double> dw,
                      std::size_t step_index) const;
  Field step_semi_implicit(double t, const Field& x, std::span<const double> dw,
                           std::size_t step_index) const;
  Field step(double t, const Field& x, std::span<const double> dw, std::size_t step_index) const;

 private:
  DomainPtr dom_;
  DriftSpec drift_;
  NoiseSpec noise_;
  StepperConfig config_;
  std::size_t n_modes_;
  std::size_t steps_;
  unsigned level_;
  double brownian_dt_;
};

using StateObserver = std::function<void(std::size_t save_index, double t, const Field& x)>;
using PairObserver =
    std::function<void(std::size_t save_index, double t, const Field& x, const Field& y)>;

/// Runs one path, calling `observe` at every saved time.
void simulate_observe(const GalerkinSystem& sys, const Field& x0, std::uint64_t master_seed,
                      std::uint64_t path, const StateObserver& observe,
                      ItoRecord* record = nullptr);

Trajectory simulate(const GalerkinSystem& sys, const Field& x0, std::uint64_t master_seed,
                    std::uint64_t path);

/// Two paths from x0 and y0 driven by identical increments.
void simulate_pair_observe(const GalerkinSystem& sys, const Field& x0, const Field& y0,
                           std::uint64_t master_seed, std::uint64_t path,
                           const PairObserver& observe);

std::pair<Trajectory, Trajectory> simulate_pair(const GalerkinSystem& sys, const Field& x0,
                                                const Field& y0, std::uint64_t master_seed,
                                                std::uint64_t path);

}  // namespace spme
