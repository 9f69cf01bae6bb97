#pragma once

// Counter-based random streams and the coupled Brownian refinement tree.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace spme::rng {

/// SplitMix64 as a UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

 private:
  std::uint64_t state_;
};

/// Mixes a master seed with a tuple of counters into a stream key.
std::uint64_t derive_key(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0, std::uint64_t d = 0);

/// Fills out with i.i.d. standard normals from stream `key`.
void standard_normals(std::uint64_t key, std::span<double> out);

/// Brownian increments on a dyadic tree. Level 0 has step root_dt; an
/// increment at level l+1 is obtained from its parent W by
///   left = W/2 + sqrt(dt_parent)/2·Z, right = W - left,
/// so sums of sibling increments reproduce the coarse path exactly.
class BrownianSource {
 public:
  BrownianSource(std::uint64_t master_seed, std::uint64_t path, std::size_t n_modes,
                 double root_dt);

  std::size_t n_modes() const noexcept { return n_modes_; }
  double root_dt() const noexcept { return root_dt_; }

  /// Increment for step `index` at refinement `level` (dt = root_dt / 2^level).
  void increment(unsigned level, std::uint64_t index, std::span<double> out) const;

 private:
  std::uint64_t master_;
  std::uint64_t path_;
  std::size_t n_modes_;
  double root_dt_;
};

}  // namespace spme::rng
