#pragma once

// Checks of the main estimates along simulated trajectories: the Ito formula
// for ||X||_H^2, contraction, the a-priori energy bound, extinction, the
// Ornstein-Uhlenbeck closed form and exponential ergodicity.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spme/conditions.hpp"
#include "spme/csv.hpp"
#include "spme/ensemble.hpp"
#include "spme/galerkin.hpp"

namespace spme {

struct VerifyReport {
  std::string name;
  bool pass = false;
  std::string summary;
  CsvTable table;
  std::vector<std::pair<std::string, double>> metrics;

  double metric(const std::string& key) const;
  /// "PASS name: summary" or "FAIL name: summary".
  std::string line() const;
};

// --- Ito formula -----------------------------------------------------------

struct ItoResidual {
  std::vector<double> times;
  /// ||X_k||^2 - ||X_0||^2 - sum_{j<k} [(2<Y_j,X_j> + ||Z_j||^2_HS) dt + 2<Z_j dW_j, X_j>].
  std::vector<double> residual;
  /// sum_{j<k} dt^2 ||Y_j||_H^2.
  std::vector<double> remainder;
  double max_abs = 0.0;
};

/// Needs a trajectory simulated with record_ito and save_every = 1.
ItoResidual ito_residual(const GalerkinSystem& sys, const Trajectory& traj);

/// Mean over paths of max_k |residual_k| for each dt on a common Brownian
/// tree rooted at the largest dt; passes when the residual decreases
/// monotonically with fitted order >= min_order.
VerifyReport ito_refinement(const DomainPtr& dom, const DriftSpec& drift, const NoiseSpec& noise,
                            StepperConfig base, std::vector<double> dts, const Field& x0,
                            std::size_t n_paths, std::uint64_t seed, unsigned threads = 0,
                            double min_order = 0.8);

// --- Contraction -----------------------------------------------------------

struct SlopeFit {
  double slope = 0.0;
  double se = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log E[v] against t, skipping the first
/// skip_fraction of the horizon and means below `floor`. The standard error
/// comes from the spread of the slopes of `batches` disjoint path batches.
SlopeFit fit_log_slope(const PathData& data, std::size_t obs = 0, double skip_fraction = 0.1,
                       double floor = 1e-12, std::size_t batches = 10);

/// Passes when slope <= declared_c + 3 SE.
VerifyReport contraction_test(const PathData& diff, double declared_c);

/// Compares the Richardson extrapolation 2 s(dt/2) - s(dt) to `expected`,
/// with |s(dt) - s(dt/2)| added to the Monte Carlo error in quadrature.
VerifyReport contraction_rate_test(const SlopeFit& coarse, const SlopeFit& fine, double expected);

// --- Energy estimate -------------------------------------------------------

/// Path-level defect
///   D_k = e^{-c1 t_k}||X_k||^2 + c2 sum_{j<=k} e^{-c1 t_j} R(X_j) dt_j
///         - ||X_0||^2 - f (1 - e^{-c1 t_k}) / c1,
/// observables 0 and 1 of `data` being ||X||_H^2 and R(X). Passes when
/// mean D_k <= 3 SE at every saved time.
VerifyReport energy_estimate(const PathData& data, const HConstants& constants);

// --- Extinction ------------------------------------------------------------

std::optional<double> extinction_time(std::span<const double> times,
                                      std::span<const double> max_norms, double eps);
std::optional<double> extinction_time(const Trajectory& traj, double eps);

// --- Linear oracle ---------------------------------------------------------

struct OuMoments {
  double mean;
  double var;
};

/// Closed-form per-mode moments for a linear drift and additive noise:
/// mean e^{-k t} x_k, variance sigma_k^2 (1 - e^{-2kt}) / (2k) with
/// k = a delta lambda_k - h.
std::vector<OuMoments> ou_oracle(const SpectralDomain& dom, const DriftSpec& drift,
                                 const NoiseSpec& noise, std::span<const double> x0_coeffs,
                                 double t, std::size_t n_modes);

/// z-scores of the per-mode sample mean and variance at `check_times`
/// against the closed form. Observables of `data` must be mode 1..n.
VerifyReport ou_test(const GalerkinSystem& sys, const PathData& data,
                     std::span<const double> x0_coeffs, std::span<const double> check_times);

/// True when a failed OU report qualifies for the single re-run: exactly one
/// statistic with 3 <= |z| < 3.5.
bool ou_rerun_allowed(const VerifyReport& report);

// --- Ergodicity ------------------------------------------------------------

/// |E F(X^x_t) - E F(X^y_t)| <= e^{ct/2} lip ||x-y||_H + 3 SE at every saved
/// time, and agreement of the long-run time averages (second half of the
/// horizon) within 3 combined SE. Refuses c >= 0.
VerifyReport ergodicity_test(const PathData& a, const PathData& b, double c, double lip,
                             double dist_h, std::size_t obs = 0);

/// Time-average agreement only, for cases without a negative rate.
VerifyReport time_average_test(const PathData& a, const PathData& b, std::size_t obs = 0);

}  // namespace spme
