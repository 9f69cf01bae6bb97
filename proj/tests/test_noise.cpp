#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "spme/errors.hpp"
#include "spme/noise.hpp"
#include "spme/rng.hpp"

using namespace spme;

TEST_CASE("increments") {
  rng::SplitMix64 gen(1);
  const auto z = sample_increment(5, 0.0, gen);
  for (double x : z) CHECK(x == 0.0);

  const double dt = 0.01;
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = sample_increment(1, dt, gen)[0];
    sum += w;
    sq += w * w;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 * std::sqrt(dt / n));
  CHECK(std::abs(var - dt) < 0.05 * dt);
}

TEST_CASE("increments are reproducible from their key") {
  std::vector<double> a(8), b(8), c(8);
  rng::standard_normals(rng::derive_key(7, 3, 1), a);
  rng::standard_normals(rng::derive_key(7, 3, 1), b);
  rng::standard_normals(rng::derive_key(7, 3, 2), c);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("brownian refinement sums back to the coarse increment") {
  const rng::BrownianSource src(11, 4, 3, 0.01);
  std::vector<double> root(3), l(3), r(3), ll(3), lr(3);
  src.increment(0, 5, root);
  src.increment(1, 10, l);
  src.increment(1, 11, r);
  src.increment(2, 20, ll);
  src.increment(2, 21, lr);
  for (int k = 0; k < 3; ++k) {
    CHECK(l[k] + r[k] == doctest::Approx(root[k]).epsilon(1e-14));
    CHECK(ll[k] + lr[k] == doctest::Approx(l[k]).epsilon(1e-14));
  }

  // level-2 increments over many roots have variance root_dt / 4
  double sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    src.increment(2, 4 * static_cast<std::uint64_t>(i) + 1, ll);
    sq += ll[0] * ll[0];
  }
  CHECK(std::abs(sq / n - 0.0025) < 0.05 * 0.0025);
}

TEST_CASE("apply B") {
  const auto dom = SpectralDomain::create(16);
  const Field x = Field::mode(dom, 1, 0.3);
  const auto none = NoiseSpec::decay(16, 0.0, 2.0);
  std::vector<double> dw(16, 1.0);
  const Field zero_b = apply_B(none, x, dw);
  for (double v : zero_b.values()) CHECK(v == 0.0);

  const auto spec = NoiseSpec::decay(16, 0.7, 2.0);
  std::vector<double> e1(16, 0.0);
  e1[0] = 1.0;
  const auto b = apply_B(spec, x, e1);
  const auto s1 = Field::mode(dom, 0, 0.7);
  for (std::size_t i = 0; i < 16; ++i) CHECK(b.values()[i] == doctest::Approx(s1.values()[i]).epsilon(1e-13));
  CHECK_THROWS_AS(apply_B(spec, x, std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST_CASE("hilbert-schmidt norm") {
  const auto dom = SpectralDomain::create(16);
  const Field x = Field::mode(dom, 0);
  CHECK(hs_norm_sq(NoiseSpec::decay(16, 0.0, 2.0), x) == 0.0);
  NoiseSpec single;
  single.sigma = {1.0};
  CHECK(hs_norm_sq(single, x) == doctest::Approx(1.0 / dom->eigenvalue(0)));

  // sum over the images of the unit vectors
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  NoiseSpec spec;
  for (int k = 0; k < 10; ++k) spec.sigma.push_back(uni(gen));
  spec.mult = {Multiplier::Kind::Inverse, 0.8};
  double direct = 0.0;
  for (int k = 0; k < 10; ++k) {
    std::vector<double> e(10, 0.0);
    e[k] = 1.0;
    const auto img = apply_B(spec, x, e);
    direct += h_norm_sq(*dom, img.coeffs());
  }
  CHECK(hs_norm_sq(spec, x) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("multiplicative noise is Lipschitz in H") {
  const auto dom = SpectralDomain::create(16);
  const auto spec = NoiseSpec::decay(16, 0.5, 1.0, {Multiplier::Kind::Inverse, 1.0});
  const double hs0 = hs0_sq(spec, *dom);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(16), b(16);
    for (int i = 0; i < 16; ++i) {
      a[i] = z(gen);
      b[i] = z(gen) * 0.1;
    }
    const Field u = Field::from_values(dom, a), v = Field::from_values(dom, b);
    const double dr = spec.mult(h_norm(u)) - spec.mult(h_norm(v));
    std::vector<double> d(16);
    for (int i = 0; i < 16; ++i) d[i] = a[i] - b[i];
    const double dist = h_norm(Field::from_values(dom, d));
    CHECK(std::abs(dr) * std::sqrt(hs0) <= spec.mult.lipschitz() * std::sqrt(hs0) * dist * (1.0 + 1e-12));
  }

  const auto additive = NoiseSpec::decay(16, 0.5, 1.0);
  CHECK(additive.mult(0.1) == additive.mult(10.0));
}

TEST_CASE("ito isometry for additive noise") {
  const auto dom = SpectralDomain::create(16);
  const auto spec = NoiseSpec::decay(16, 1.0, 1.0);
  const Field x = Field::zero(dom);
  const double dt = 0.01, t = 0.5;
  const int steps = 50, paths = 10000;
  std::vector<double> vals(paths);
  for (int p = 0; p < paths; ++p) {
    rng::SplitMix64 gen(rng::derive_key(5, p));
    std::vector<double> acc(16, 0.0);
    for (int s = 0; s < steps; ++s) {
      const auto dw = sample_increment(16, dt, gen);
      const auto b = apply_B(spec, x, dw);
      for (int k = 0; k < 16; ++k) acc[k] += b.coeffs()[k];
    }
    vals[p] = h_norm_sq(*dom, acc);
  }
  double mean = 0.0, sq = 0.0;
  for (double v : vals) mean += v;
  mean /= paths;
  for (double v : vals) sq += (v - mean) * (v - mean);
  const double se = std::sqrt(sq / (paths - 1) / paths);
  CHECK(std::abs(mean - t * hs_norm_sq(spec, x)) < 3.0 * se);
}

TEST_CASE("noise validation") {
  const auto dom = SpectralDomain::create(4);
  CHECK_THROWS_AS(NoiseSpec::decay(5, 1.0, 1.0).validate(*dom), ValidationError);
  NoiseSpec neg;
  neg.sigma = {-1.0};
  CHECK_THROWS_AS(neg.validate(*dom), ValidationError);
}
