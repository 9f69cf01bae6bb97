#pragma once

// JSON experiment configuration. Unknown keys are rejected and every error
// names the offending key path.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spme/drift.hpp"
#include "spme/galerkin.hpp"
#include "spme/noise.hpp"
#include "spme/triple.hpp"

namespace spme {

struct InitialCondition {
  enum class Shape { Bump, Mode, Random, Zero };

  Shape shape = Shape::Bump;
  double amplitude = 1.0;
  double center = 0.5;
  double width = 0.25;
  std::size_t k = 1;  ///< one-based mode for Shape::Mode
  double gamma = 1.0;
  std::uint64_t seed = 0;
};

/// Smooth bump amplitude·exp(1 - 1/(1 - ((x-c)/w)^2)) on |x-c| < w, an
/// eigenmode, a random field with spectral decay k^{-gamma} scaled to the
/// given max norm, or zero.
Field make_initial(const DomainPtr& dom, const InitialCondition& ic);

struct TestSettings {
  double eps = 1e-6;
  std::string expect = "extinct";  ///< extinction: "extinct" or "persist"
  std::vector<double> times{0.1, 0.5, 2.0};
  std::vector<double> dts{2e-3, 1e-3, 5e-4};
  double min_order = 0.8;
  std::size_t h_samples = 1000;
  double c2_scale = 1.0;
};

struct ExperimentConfig {
  std::size_t n_grid = 64;
  double alpha = 1.0;
  bool finite_measure = true;

  DriftSpec drift;

  double sigma0 = 0.0;
  double beta = 2.0;
  std::size_t noise_modes = 0;  ///< 0 = Galerkin dimension
  Multiplier mult;

  StepperConfig stepper;

  std::size_t ensemble_size = 1;
  std::optional<std::uint64_t> master_seed;
  unsigned threads = 0;

  InitialCondition initial;
  std::optional<InitialCondition> initial_y;
  TestSettings test;

  /// Canonical (sorted-key, compact) JSON text of the input.
  std::string canonical;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

DomainPtr make_domain(const ExperimentConfig& cfg);
NoiseSpec make_noise(const ExperimentConfig& cfg);

}  // namespace spme
