#pragma once

// Monte Carlo over independent paths with a scheduling-independent
// reduction: per-path results land in fixed slots and are reduced in path
// order by pairwise summation.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spme/csv.hpp"
#include "spme/galerkin.hpp"
#include "spme/orlicz.hpp"

namespace spme {

struct Observable {
  std::string name;
  std::function<double(double t, const Field& x)> fn;
};

struct PairObservable {
  std::string name;
  std::function<double(double t, const Field& x, const Field& y)> fn;
};

namespace observables {
Observable h_norm_sq();
Observable mode(std::size_t k);
/// <x, s_k>_H = x^_k / lambda_k.
Observable h_projection(std::size_t k);
Observable r_functional(orlicz::YoungFunction n);
Observable modular(orlicz::YoungFunction n);
Observable max_norm();
PairObservable diff_h_norm_sq();
}  // namespace observables

/// Sum by recursive halving.
double pairwise_sum(std::span<const double> v);

/// Runs work(path) for path in [0, n_paths) on `threads` workers (0 = auto)
/// and returns the results in path order.
std::vector<std::vector<double>> run_paths(std::size_t n_paths, unsigned threads,
                                           const std::function<std::vector<double>(std::size_t)>& work);

/// Per-path samples laid out as [save index][observable].
struct PathData {
  std::vector<double> times;
  std::vector<std::string> names;
  /// paths x (times·names), row-major in (time, observable).
  std::vector<std::vector<double>> values;

  std::size_t n_paths() const noexcept { return values.size(); }
  double at(std::size_t path, std::size_t time, std::size_t obs) const {
    return values[path][time * names.size() + obs];
  }
  /// All paths' samples of one (time, observable).
  std::vector<double> column(std::size_t time, std::size_t obs) const;
};

struct StatTable {
  std::vector<double> times;
  std::vector<std::string> names;
  std::size_t n_paths = 0;
  std::vector<std::vector<double>> mean;  ///< [time][observable]
  std::vector<std::vector<double>> var;
  std::vector<std::vector<double>> se;

  /// Columns t, then <name>_mean, <name>_se for each observable.
  CsvTable to_csv() const;
};

StatTable summarize(const PathData& data);

PathData sample_paths(const GalerkinSystem& sys, const Field& x0, std::uint64_t master_seed,
                      std::size_t n_paths, const std::vector<Observable>& obs,
                      unsigned threads = 0, std::uint64_t path_offset = 0);

PathData sample_pairs(const GalerkinSystem& sys, const Field& x0, const Field& y0,
                      std::uint64_t master_seed, std::size_t n_paths,
                      const std::vector<PairObservable>& obs, unsigned threads = 0);

StatTable monte_carlo(const GalerkinSystem& sys, const Field& x0, std::uint64_t master_seed,
                      std::size_t n_paths, const std::vector<Observable>& obs,
                      unsigned threads = 0);

}  // namespace spme
