#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "spme/errors.hpp"
#include "spme/orlicz.hpp"

using namespace spme;
using namespace spme::orlicz;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, i / double(n - 1)));
  return g;
}

DiscreteMeasure uniform(std::size_t n, double w) { return DiscreteMeasure(std::vector<double>(n, w)); }

std::vector<double> random_values(std::mt19937_64& gen, std::size_t n, double scale) {
  std::normal_distribution<double> z(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = z(gen);
  return v;
}

}  // namespace

TEST_CASE("young function evaluation") {
  CHECK(YoungFunction::power(1.0, 2.0)(3.0) == doctest::Approx(9.0));
  CHECK(YoungFunction::power(1.0, 2.0)(-3.0) == doctest::Approx(9.0));
  const auto two = YoungFunction::power_sum({{1.0, 2.0}, {1.0, 4.0}});
  CHECK(two(2.0) == doctest::Approx(20.0));
  CHECK(YoungFunction::log_power(2.0, 1.0)(1.0) == doctest::Approx(std::log(2.0)));
  CHECK(two(0.0) == 0.0);
}

TEST_CASE("young invariants hold for the standard families") {
  CHECK(check_young_invariants(YoungFunction::power(1.0, 2.0)).ok);
  CHECK(check_young_invariants(YoungFunction::power(2.0, 1.5)).ok);
  CHECK(check_young_invariants(YoungFunction::power_sum({{1.0, 2.0}, {0.5, 4.0}})).ok);
  CHECK(check_young_invariants(YoungFunction::log_power(2.0, 1.0)).ok);
  CHECK(check_young_invariants(YoungFunction::power(1.0, 2.0).dual()).ok);
  // linear growth has a degenerate dual
  CHECK_THROWS_AS(YoungFunction::power(1.0, 1.0), ValidationError);
  // a table that is not convex
  CHECK_THROWS_AS(YoungFunction::table({0.0, 1.0, 2.0, 1e5}, {0.0, 1.0, 1.5, 1e12}),
                  ValidationError);
}

TEST_CASE("table young functions reject extrapolation") {
  std::vector<double> s, v;
  for (int i = 0; i <= 40; ++i) {
    s.push_back(i * 0.25);
    v.push_back(s.back() * s.back());
  }
  const auto t = YoungFunction::table(s, v);
  CHECK(t(2.0) == doctest::Approx(4.0).epsilon(1e-6));
  CHECK_THROWS_AS(t(11.0), RangeError);
}

TEST_CASE("dual evaluation") {
  const auto sq = YoungFunction::power(1.0, 2.0);
  CHECK(dual_eval(sq, 2.0) == doctest::Approx(1.0));
  CHECK(dual_eval(sq, 0.0) == 0.0);
  CHECK(dual_eval(YoungFunction::power_sum({{1.0, 2.0}, {1.0, 4.0}}), 0.0) == 0.0);

  const auto quartic = YoungFunction::power(1.0, 4.0);
  CHECK(dual_eval(quartic, 1.0) == doctest::Approx(oracle::dual_quartic_at_1).epsilon(1e-12));
  CHECK(dual_eval_numeric(quartic, 1.0) == doctest::Approx(oracle::dual_quartic_at_1).epsilon(1e-9));

  // brute-force sup over a dense r grid
  double best = 0.0;
  for (int i = 0; i <= 2000000; ++i) {
    const double r = 10.0 * i / 2000000.0;
    best = std::max(best, r - r * r * r * r);
  }
  CHECK(std::abs(dual_eval(quartic, 1.0) - best) < 1e-8);
}

TEST_CASE("numeric dual agrees with closed form") {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const auto n = YoungFunction::power(1.0, p);
    for (double s : log_grid(1e-2, 1e2, 25)) {
      CHECK(dual_eval_numeric(n, s) == doctest::Approx(dual_eval(n, s)).epsilon(1e-8));
    }
  }
}

TEST_CASE("dual of an unbounded-slope-free function is degenerate") {
  std::vector<double> s, v;
  for (int i = 0; i <= 100; ++i) {
    s.push_back(i * 0.1);
    v.push_back(std::exp(s.back()) - s.back() - 1.0);
  }
  const auto t = YoungFunction::table(s, v);
  CHECK_THROWS_AS(dual_eval_numeric(t, 1e6), RangeError);
}

TEST_CASE("dual round trip for single powers") {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const auto n = YoungFunction::power(1.0, p);
    const auto nn = n.dual().dual();
    for (double s : log_grid(1e-2, 1e2, 41)) {
      CHECK(nn(s) == doctest::Approx(n(s)).epsilon(1e-6));
    }
  }
}

TEST_CASE("dual doubling bound with theta^(r+1)") {
  for (double r : {1.0, 2.0, 3.0}) {
    const auto n = YoungFunction::power(1.0, r + 1.0);
    const double theta = std::pow(2.0, 1.0 / r);
    for (double s : log_grid(1e-3, 1e3, 61)) {
      const double lhs = dual_eval(n, 2.0 * s);
      const double rhs = std::pow(theta, r + 1.0) * dual_eval(n, s);
      CHECK(lhs <= rhs * (1.0 + 1e-12));
      if (r == 1.0) CHECK(lhs == doctest::Approx(4.0 * dual_eval(n, s)).epsilon(1e-12));
    }
  }
}

TEST_CASE("delta2 exponent") {
  const auto sq = delta2_exponent(YoungFunction::power(1.0, 2.0));
  CHECK(sq.constant == doctest::Approx(4.0));
  CHECK(sq.exponent == doctest::Approx(4.0));
  const auto fd = delta2_exponent(YoungFunction::power(1.0, 1.5));
  CHECK(fd.constant == doctest::Approx(std::pow(2.0, 1.5)));
  CHECK(fd.exponent == doctest::Approx(3.0));
  CHECK(delta2_exponent(YoungFunction::log_power(2.0, 1.0)).exponent > 2.0);

  std::vector<double> s, v;
  for (int i = 0; i <= 400; ++i) {
    s.push_back(i * 0.1);
    v.push_back(std::exp(s.back()) - s.back() - 1.0);
  }
  CHECK_THROWS_AS(delta2_exponent(YoungFunction::table(s, v)), Delta2Violation);
}

TEST_CASE("delta2 exponent satisfies its defining inequality") {
  for (const auto& n : {YoungFunction::power(1.0, 2.0), YoungFunction::power(1.0, 1.5),
                        YoungFunction::power_sum({{1.0, 2.0}, {1.0, 4.0}}),
                        YoungFunction::log_power(2.0, 1.0)}) {
    const double q = delta2_exponent(n).exponent;
    for (int j = 2; j <= 20; ++j) {
      const double r = std::pow(2.0, j / 2.0);
      for (double s : log_grid(1e-3, 1e3, 61)) {
        CHECK(n(r * s) <= std::pow(r, q) * (n(s) + 2.0) * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("luxemburg norm") {
  const auto sq = YoungFunction::power(1.0, 2.0);
  const auto m = uniform(8, 0.125);
  CHECK(luxemburg_norm(std::vector<double>(8, 0.0), sq, m) == 0.0);
  CHECK(luxemburg_norm(std::vector<double>(8, 1.0), sq, m) == doctest::Approx(1.0).epsilon(1e-10));

  std::mt19937_64 gen(3);
  const auto two = YoungFunction::power_sum({{1.0, 2.0}, {1.0, 4.0}});
  const auto m64 = uniform(64, 1.0 / 65.0);
  const auto f = random_values(gen, 64, 1.0);
  const double lux = luxemburg_norm(f, two, m64);
  // dense scan of the unit-ball criterion
  double lo = 1e-3, hi = 1e3;
  for (int pass = 0; pass < 6; ++pass) {
    const double step = (hi - lo) / 1000.0;
    double first = hi;
    for (int i = 0; i <= 1000; ++i) {
      const double lam = lo + i * step;
      std::vector<double> g(f);
      for (auto& x : g) x /= lam;
      if (modular(g, two, m64) <= 1.0) {
        first = lam;
        break;
      }
    }
    lo = first - step;
    hi = first;
  }
  CHECK(lux == doctest::Approx(hi).epsilon(1e-8));
}

TEST_CASE("luxemburg norm is a norm with a tight unit ball") {
  std::mt19937_64 gen(5);
  const auto n = YoungFunction::power_sum({{1.0, 2.0}, {0.5, 4.0}});
  const auto m = uniform(32, 1.0 / 33.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto f = random_values(gen, 32, std::pow(10.0, -2.0 + 4.0 * (trial % 10) / 9.0));
    const auto g = random_values(gen, 32, 1.0);
    const double nf = luxemburg_norm(f, n, m);
    const double ng = luxemburg_norm(g, n, m);
    std::vector<double> sum(32), scaled(32), inside(32), outside(32);
    for (int i = 0; i < 32; ++i) {
      sum[i] = f[i] + g[i];
      scaled[i] = -2.5 * f[i];
      inside[i] = f[i] / nf;
      outside[i] = f[i] / (nf * (1.0 - 1e-6));
    }
    CHECK(luxemburg_norm(sum, n, m) <= (nf + ng) * (1.0 + 1e-9));
    CHECK(luxemburg_norm(scaled, n, m) == doctest::Approx(2.5 * nf).epsilon(1e-9));
    CHECK(modular(inside, n, m) <= 1.0);
    CHECK(modular(outside, n, m) > 1.0);
  }
}

TEST_CASE("orlicz holder inequality") {
  const auto sq = YoungFunction::power(1.0, 2.0);
  const auto m = uniform(32, 1.0 / 33.0);
  const auto zero = orlicz_holder(std::vector<double>(32, 0.0), std::vector<double>(32, 1.0), sq, m);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.bound == 0.0);

  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_values(gen, 32, 1.0);
    const auto g = random_values(gen, 32, 1.0);
    const auto hp = orlicz_holder(f, g, sq, m);
    // Cauchy-Schwarz: m|fg| <= ||f||_2 ||g||_2 = ||f||_N * 2 ||g||_{N*} for N = s^2
    double ff = 0.0, gg = 0.0;
    for (int i = 0; i < 32; ++i) {
      ff += f[i] * f[i] / 33.0;
      gg += g[i] * g[i] / 33.0;
    }
    CHECK(hp.lhs <= std::sqrt(ff * gg) * (1.0 + 1e-9));
    CHECK(hp.bound == doctest::Approx(std::sqrt(ff * gg)).epsilon(1e-8));
  }

  const auto unit = uniform(1, 1.0);
  const auto ind = orlicz_holder(std::vector<double>{1.0}, std::vector<double>{1.0}, sq, unit);
  CHECK(ind.lhs == doctest::Approx(1.0));
  CHECK(ind.bound == doctest::Approx(2.0 * 0.5));
}
