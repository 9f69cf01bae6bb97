#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "spme/conditions.hpp"
#include "spme/drift.hpp"
#include "spme/errors.hpp"
#include "spme/noise.hpp"

using namespace spme;

namespace {

DriftSpec pme(double r = 2.0) {
  DriftSpec d;
  d.psi = PsiSpec::power(1.0, r);
  return d;
}

Field random_values(const DomainPtr& dom, std::mt19937_64& gen, double scale) {
  std::normal_distribution<double> z(0.0, scale);
  std::vector<double> v(dom->n_grid());
  for (auto& x : v) x = z(gen);
  return Field::from_values(dom, v);
}

}  // namespace

TEST_CASE("psi and phi evaluation") {
  const auto psi = PsiSpec::power(1.0, 2.0);
  CHECK(psi.eval(0.0, -3.0) == doctest::Approx(-9.0));
  CHECK(psi.eval(0.0, 0.0) == 0.0);
  CHECK(PsiSpec::log_power(2.0, 1.0).eval(0.0, 1.0) == doctest::Approx(std::log(2.0)));
  for (double s : {0.1, 1.0, 7.0}) {
    CHECK(psi.eval(0.0, -s) == -psi.eval(0.0, s));
    CHECK(s * psi.eval(0.0, s) == doctest::Approx(psi.young()(s)));
    const auto lp = PsiSpec::log_power(2.5, 1.5);
    CHECK(s * lp.eval(0.0, s) == doctest::Approx(lp.young()(s)));
  }
  PhiSpec phi;
  phi.h = TimeProfile{0.5, 0.0, 1.0};
  phi.phi0 = {{0.25, 1.0}};
  CHECK(phi.eval(0.0, 2.0) == doctest::Approx(1.5));

  const auto mod = PsiSpec::power(1.0, 2.0, TimeProfile{1.0, 0.5, 2.0});
  CHECK(mod.eval(0.5, 2.0) == doctest::Approx(1.5 * 4.0));
}

TEST_CASE("drift validation") {
  DriftSpec d = pme();
  d.phi.phi0 = {{0.1, 1.0}};
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d.mode = ConditionMode::A2;
  CHECK_NOTHROW(d.validate());
  d.psi = PsiSpec::power(1.0, 0.5);
  CHECK_THROWS_AS(d.validate(), UnsupportedError);
  d.psi = PsiSpec::log_power(2.0, 1.0);
  CHECK_THROWS_AS(d.validate(), ValidationError);
}

TEST_CASE("linear psi gives the heat drift") {
  const auto dom = SpectralDomain::create(32);
  std::mt19937_64 gen(1);
  const Field x = random_values(dom, gen, 1.0);
  DriftSpec d = pme(1.0);
  const auto a = assemble_A(d, 0.0, x);
  const auto lx = apply_L(x);
  for (std::size_t k = 0; k < 32; ++k) CHECK(a.coeffs()[k] == doctest::Approx(lx.coeffs()[k]).epsilon(1e-12));
}

TEST_CASE("cubic drift on the first mode matches quadrature") {
  const auto dom = SpectralDomain::create(40);
  const Field x = Field::mode(dom, 0);
  const auto a = assemble_A(pme(3.0), 0.0, x);
  for (std::size_t k = 0; k < 40; ++k) {
    double m = 0.0;
    for (std::size_t i = 0; i < 40; ++i) {
      const double s = dom->basis(0, i);
      m += dom->h() * s * s * s * dom->basis(k, i);
    }
    CHECK(a.coeffs()[k] == doctest::Approx(-dom->eigenvalue(k) * m).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("spectral drift coordinates equal the dual pairing against the H basis") {
  const auto dom = SpectralDomain::create(24);
  DriftSpec d;
  d.mode = ConditionMode::A2;
  d.psi = PsiSpec::power_sum({{1.0, 1.0}, {1.0, 3.0}});
  d.phi.h = TimeProfile{0.3, 0.1, 1.0};
  d.phi.phi0 = {{0.2, 1.0}, {0.05, 3.0}};
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 5; ++trial) {
    const Field x = random_values(dom, gen, 1.0);
    const double t = 0.37 * trial;
    const auto a = assemble_A(d, t, x);
    for (std::size_t j = 0; j < 24; ++j) {
      const double lam = dom->eigenvalue(j);
      const Field e = Field::mode(dom, j, std::sqrt(lam));
      const double galerkin = drift_pairing(d, t, x, e);
      CHECK(a.coeffs()[j] / std::sqrt(lam) == doctest::Approx(galerkin).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("a zero phi0 reduces the A2 drift to the A1 drift") {
  const auto dom = SpectralDomain::create(16);
  DriftSpec a1 = pme(3.0);
  DriftSpec a2 = a1;
  a2.mode = ConditionMode::A2;
  a2.phi.phi0 = {{0.0, 1.0}};
  std::mt19937_64 gen(3);
  const Field x = random_values(dom, gen, 1.0);
  const auto u = assemble_A(a1, 0.0, x), v = assemble_A(a2, 0.0, x);
  for (std::size_t k = 0; k < 16; ++k) CHECK(u.coeffs()[k] == v.coeffs()[k]);
}

TEST_CASE("A1 certificates") {
  for (double r : {2.0, 0.5}) {
    const auto rep = check_A1(pme(r));
    CHECK(rep.pass);
    CHECK(rep.get("c") == doctest::Approx(1.0));
    CHECK(rep.get("f") == 0.0);
  }
  DriftSpec logp;
  logp.psi = PsiSpec::log_power(2.0, 1.0);
  CHECK(check_A1(logp).pass);

  DriftSpec bad;
  bad.psi = PsiSpec::power_sum({{1.0, 1.0}, {-1.0, 3.0}});
  const auto rep = check_A1(bad);
  CHECK_FALSE(rep.pass);
  REQUIRE_FALSE(rep.failures.empty());
  CHECK(rep.failures.front().find("s1=") != std::string::npos);
}

TEST_CASE("A2 certificates") {
  const auto dom = SpectralDomain::create(64);
  DriftSpec cubic;
  cubic.mode = ConditionMode::A2;
  cubic.psi = PsiSpec::power(1.0, 3.0);
  const auto plain = check_A2(cubic, *dom);
  CHECK(plain.pass);
  CHECK(plain.get("eps_required") == 0.0);
  CHECK(plain.get("ctilde") == 0.0);

  DriftSpec ok;
  ok.mode = ConditionMode::A2;
  ok.psi = PsiSpec::power_sum({{1.0, 1.0}, {1.0, 3.0}});
  const double kappa = 1.0 / estimate_Linv_norm(*dom, 2.0);
  ok.phi.phi0 = {{0.5 * kappa, 1.0}};
  const auto rep = check_A2(ok, *dom);
  CHECK(rep.pass);
  CHECK(rep.get("eps_required") == doctest::Approx(0.5).epsilon(1e-6));

  DriftSpec bad = ok;
  bad.phi.phi0 = {{2.0 * kappa, 1.0}};
  const auto fail = check_A2(bad, *dom);
  CHECK_FALSE(fail.pass);
  CHECK(fail.get("eps_required") == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("L inverse norm estimate bounds sampled ratios") {
  const auto dom = SpectralDomain::create(64);
  const double est = estimate_Linv_norm(*dom, 4.0);
  CHECK(est > 1.0 / dom->eigenvalue(0));
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Field u = random_values(dom, gen, 1.0);
    const Field w = apply_Linv(u);
    CHECK(lp_norm(w.values(), dom->measure(), 4.0) <= est * lp_norm(u.values(), dom->measure(), 4.0));
  }
}

TEST_CASE("dual estimates hold pointwise") {
  const auto grid = symmetric_log_grid();
  for (const DriftSpec& d : {pme(2.0), pme(0.5)}) {
    const auto rep = check_A1(d);
    const double c = rep.get("c"), f = rep.get("f");
    const auto n = d.psi.young();
    const double psi0 = orlicz::dual_eval(n, d.psi.eval(0.0, 0.0) / c);
    for (double s : grid) {
      CHECK(orlicz::dual_eval(n, d.psi.eval(0.0, s) / c) <= (n(s) + 3.0 * f + psi0) * (1.0 + 1e-9));
    }
  }

  const auto dom = SpectralDomain::create(64);
  DriftSpec d;
  d.mode = ConditionMode::A2;
  d.psi = PsiSpec::power_sum({{1.0, 1.0}, {1.0, 3.0}});
  const double kappa = 1.0 / estimate_Linv_norm(*dom, 2.0);
  d.phi.phi0 = {{0.5 * kappa, 1.0}};
  const auto rep = check_A2(d, *dom);
  const double ctilde = rep.get("ctilde");
  const auto n = d.psi.young();
  for (double s : grid) {
    CHECK(orlicz::dual_eval(n, d.phi.phi0_eval(s)) <= ctilde * n(s) * (1.0 + 1e-9) + 1e-300);
  }
}

TEST_CASE("R is controlled by its values at doubled arguments") {
  const auto dom = SpectralDomain::create(32);
  for (double r : {2.0, 0.5}) {
    const auto rep = check_K(dom, pme(r), 1000);
    CHECK(rep.pass);
    CHECK(rep.get("k_relative_margin") >= 0.0);
  }
}

TEST_CASE("H conditions for porous medium and heat drifts") {
  const auto dom = SpectralDomain::create(32);
  const auto noise = NoiseSpec::decay(32, 0.1, 2.0);
  HCheckOptions opt;
  opt.n_samples = 1000;

  const auto rep = check_H(dom, pme(2.0), noise, opt);
  CHECK(rep.pass);
  CHECK(rep.get("c_empirical") <= 1e-9);

  const auto lin = check_H(dom, pme(1.0), noise, opt);
  CHECK(lin.pass);
  CHECK(lin.get("c_empirical") < 0.0);
  CHECK(lin.get("c_declared") == doctest::Approx(-2.0 * dom->eigenvalue(0)));

  DriftSpec zero = pme(1.0);
  zero.psi = PsiSpec::power(1e-300, 2.0);
  const auto z = check_H(dom, zero, NoiseSpec::decay(32, 0.0, 2.0), opt);
  CHECK(z.pass);
  CHECK(std::abs(z.get("c_empirical")) < 1e-12);
}

TEST_CASE("H2 domination by the linear part of phi") {
  const auto dom = SpectralDomain::create(32);
  DriftSpec d = pme(2.0);
  d.phi.h = TimeProfile{0.7, 0.0, 1.0};
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Field u = random_values(dom, gen, 1.0), v = random_values(dom, gen, 1.0);
    std::vector<double> w(32);
    for (std::size_t i = 0; i < 32; ++i) w[i] = u.values()[i] - v.values()[i];
    const Field diff = Field::from_values(dom, w);
    const double lhs = drift_pairing(d, 0.0, u, diff) - drift_pairing(d, 0.0, v, diff);
    CHECK(lhs <= 0.7 * h_norm_sq(*dom, diff.coeffs()) * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("multiplicative noise is excluded from zero-drift H2 only through its Lipschitz constant") {
  const auto dom = SpectralDomain::create(16);
  Multiplier inv{Multiplier::Kind::Inverse, 1.0};
  const auto noise = NoiseSpec::decay(16, 0.5, 1.0, inv);
  HCheckOptions opt;
  opt.n_samples = 300;
  const auto rep = check_H(dom, pme(2.0), noise, opt);
  CHECK(rep.pass);
  CHECK(rep.get("c_declared") == doctest::Approx(hs0_sq(noise, *dom)));
}
