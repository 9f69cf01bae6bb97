#include "spme/rng.hpp"

#include <cmath>
#include <random>

namespace spme::rng {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

SplitMix64::result_type SplitMix64::operator()() noexcept {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix(state_);
}

std::uint64_t derive_key(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                         std::uint64_t d) {
  std::uint64_t k = mix(master + 0x9e3779b97f4a7c15ULL);
  for (std::uint64_t part : {a, b, c, d}) k = mix(k ^ mix(part + 0x632be59bd9b4e019ULL));
  return k;
}

void standard_normals(std::uint64_t key, std::span<double> out) {
  SplitMix64 gen(key);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& z : out) z = normal(gen);
}

BrownianSource::BrownianSource(std::uint64_t master_seed, std::uint64_t path, std::size_t n_modes,
                               double root_dt)
    : master_(master_seed), path_(path), n_modes_(n_modes), root_dt_(root_dt) {}

void BrownianSource::increment(unsigned level, std::uint64_t index, std::span<double> out) const {
  if (level == 0) {
    standard_normals(derive_key(master_, path_, 0, index), out);
    const double scale = std::sqrt(root_dt_);
    for (double& w : out) w *= scale;
    return;
  }
  const std::uint64_t parent_index = index / 2;
  increment(level - 1, parent_index, out);
  std::vector<double> z(out.size());
  standard_normals(derive_key(master_, path_, level, parent_index), z);
  const double dt_parent = std::ldexp(root_dt_, -static_cast<int>(level - 1));
  const double half_sd = 0.5 * std::sqrt(dt_parent);
  const bool left = (index % 2) == 0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double l = 0.5 * out[k] + half_sd * z[k];
    out[k] = left ? l : out[k] - l;
  }
}

}  // namespace spme::rng
