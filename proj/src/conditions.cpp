#include "spme/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "spme/errors.hpp"
#include "spme/rng.hpp"

namespace spme {

void ConditionReport::set(const std::string& key, double value) {
  for (auto& kv : values) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  values.emplace_back(key, value);
}

double ConditionReport::get(const std::string& key) const {
  for (const auto& kv : values) {
    if (kv.first == key) return kv.second;
  }
  throw std::out_of_range("ConditionReport: no key " + key);
}

bool ConditionReport::has(const std::string& key) const {
  return std::any_of(values.begin(), values.end(),
                     [&](const auto& kv) { return kv.first == key; });
}

void ConditionReport::fail(std::string message) {
  pass = false;
  failures.push_back(std::move(message));
}

CsvTable ConditionReport::to_csv() const {
  CsvTable t;
  t.header.push_back("pass");
  std::vector<double> row{pass ? 1.0 : 0.0};
  for (const auto& [k, v] : values) {
    t.header.push_back(k);
    row.push_back(v);
  }
  t.add_row(std::move(row));
  return t;
}

std::vector<double> symmetric_log_grid(double lo, double hi, std::size_t points) {
  std::vector<double> g{0.0};
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < points; ++i) {
    const double s = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    g.push_back(s);
    g.push_back(-s);
  }
  std::sort(g.begin(), g.end());
  return g;
}

namespace {

std::vector<double> sample_times(const TimeProfile& p) {
  if (p.constant()) return {0.0};
  std::vector<double> t;
  for (int j = 0; j < 8; ++j) t.push_back(p.period * j / 8.0);
  return t;
}

std::string pair_text(double s1, double s2, double t) {
  std::ostringstream os;
  os << "s1=" << s1 << ", s2=" << s2 << ", t=" << t;
  return os.str();
}

// (Psi2)/(Psi3)/(Psi4) and Delta_2 of N and N*; shared by both modes.
void sandwich(const DriftSpec& spec, bool finite, std::span<const double> grid,
              const std::vector<double>& times, ConditionReport& rep) {
  const double flag = finite ? 1.0 : 0.0;
  const auto n = spec.psi.young();

  double f_req = 0.0;
  for (double t : times) {
    for (double s : grid) {
      const double ns = n(s), sp = s * spec.psi.eval(t, s);
      // ignore rounding-level gaps where s Psi(s) equals N(s) by construction
      if (ns - sp > 1e-12 * std::max(std::abs(ns), std::abs(sp))) f_req = std::max(f_req, ns - sp);
    }
  }
  const double f = std::max(spec.f_const, f_req);
  rep.set("f_required", f_req);
  rep.set("f", f);
  if (!finite && f_req > 0.0) rep.fail("(Psi2): s Psi(s) < N(s) needs f > 0 on an infinite measure");

  double c = 1.0;
  for (double t : times) {
    for (double s : grid) {
      const double denom = n(s) + f * flag;
      if (denom > 0.0) c = std::max(c, s * spec.psi.eval(t, s) / denom);
    }
  }
  rep.set("c", c);
  if (!std::isfinite(c)) rep.fail("(Psi3): s Psi(s) / (N(s) + f) unbounded");

  double psi4 = 0.0;
  for (double t : times) psi4 = std::max(psi4, orlicz::dual_eval(n, spec.psi.eval(t, 0.0) / c));
  rep.set("psi4_value", psi4);
  if (!std::isfinite(psi4)) rep.fail("(Psi4): N*(Psi(0)/c) is not finite");

  const auto young = orlicz::check_young_invariants(n);
  if (!young.ok) rep.fail("N is not a Young function: " + young.failure);
  try {
    rep.set("q_N", orlicz::delta2_exponent(n, finite).exponent);
    rep.set("q_Nstar", orlicz::delta2_exponent(n.dual(), finite).exponent);
  } catch (const Delta2Violation& e) {
    rep.fail(e.what());
  }
}

}  // namespace

ConditionReport check_A1(const DriftSpec& spec, bool finite_measure, std::span<const double> grid) {
  ConditionReport rep;
  rep.name = "A1";
  std::vector<double> own;
  if (grid.empty()) {
    own = symmetric_log_grid();
    grid = own;
  }
  const auto times = sample_times(spec.psi.modulation);

  double worst = std::numeric_limits<double>::infinity();
  std::string worst_pair;
  for (double t : times) {
    std::vector<double> psi(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) psi[i] = spec.psi.eval(t, grid[i]);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = i + 1; j < grid.size(); ++j) {
        const double ds = grid[j] - grid[i];
        const double scale = std::abs(ds) * (std::abs(psi[i]) + std::abs(psi[j])) + 1e-300;
        const double margin = ds * (psi[j] - psi[i]) / scale;
        if (margin < worst) {
          worst = margin;
          worst_pair = pair_text(grid[i], grid[j], t);
        }
      }
    }
  }
  rep.set("psi1_margin", worst);
  if (worst < -1e-12) rep.fail("(Psi1) monotonicity fails at " + worst_pair);

  sandwich(spec, finite_measure, grid, times, rep);
  return rep;
}

double estimate_Linv_norm(const SpectralDomain& dom, double p, std::uint64_t seed,
                          std::size_t samples) {
  const auto& m = dom.measure();
  const auto eig = dom.eigenvalues();
  const std::size_t n = dom.n_grid();
  double best = 0.0;
  std::vector<double> c(n);
  for (std::size_t j = 0; j <= samples; ++j) {
    if (j == 0) {
      std::fill(c.begin(), c.end(), 0.0);
      c[0] = 1.0;
    } else {
      rng::standard_normals(rng::derive_key(seed, j, 0x4c), c);
      const double gamma = 0.5 * static_cast<double>(j % 4);
      for (std::size_t k = 0; k < n; ++k) c[k] *= std::pow(static_cast<double>(k + 1), -gamma);
    }
    const auto u = dom.from_spectral(c);
    std::vector<double> lc(n);
    for (std::size_t k = 0; k < n; ++k) lc[k] = c[k] / eig[k];
    const auto lu = dom.from_spectral(lc);
    const double den = lp_norm(u, m, p);
    if (den > 0.0) best = std::max(best, lp_norm(lu, m, p) / den);
  }
  return 1.5 * best;
}

ConditionReport check_A2(const DriftSpec& spec, const SpectralDomain& dom,
                         std::span<const double> grid, std::uint64_t seed) {
  if (spec.psi.form != PsiSpec::Form::PowerSum) {
    throw ValidationError("check_A2: requires a power-sum Psi");
  }
  if (spec.psi.min_exponent() < 1.0) {
    throw UnsupportedError("check_A2: exponents below 1 are unsupported");
  }
  ConditionReport rep;
  rep.name = "A2";
  std::vector<double> own;
  if (grid.empty()) {
    own = symmetric_log_grid();
    grid = own;
  }
  const auto times = sample_times(spec.psi.modulation);
  const double a_min = spec.psi.modulation.lower();
  const auto& terms = spec.psi.terms;
  const std::size_t m = terms.size();

  std::vector<double> kappa(m), mu(m), eps_n(m);
  for (std::size_t i = 0; i < m; ++i) {
    kappa[i] = 1.0 / estimate_Linv_norm(dom, terms[i].exponent + 1.0, seed);
    mu[i] = a_min * std::pow(2.0, 1.0 - terms[i].exponent) * std::abs(terms[i].coeff);
    eps_n[i] = a_min * std::abs(terms[i].coeff);
    rep.set("kappa_" + std::to_string(i), kappa[i]);
    rep.set("mu_" + std::to_string(i), mu[i]);
  }

  double psi1p = std::numeric_limits<double>::infinity();
  double phi1 = std::numeric_limits<double>::infinity();
  std::string psi1p_pair, phi1_pair;
  for (double t : times) {
    std::vector<double> psi(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) psi[i] = spec.psi.eval(t, grid[i]);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = i + 1; j < grid.size(); ++j) {
        const double ds = std::abs(grid[j] - grid[i]);
        double bound = 0.0, lip = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          bound += mu[k] * std::pow(ds, terms[k].exponent + 1.0);
          lip += mu[k] * kappa[k] * std::pow(ds, terms[k].exponent);
        }
        const double lhs = (grid[j] - grid[i]) * (psi[j] - psi[i]);
        const double margin = (lhs - bound) / (std::abs(lhs) + bound + 1e-300);
        if (margin < psi1p) {
          psi1p = margin;
          psi1p_pair = pair_text(grid[i], grid[j], t);
        }
        const double dphi = std::abs(spec.phi.phi0_eval(grid[j]) - spec.phi.phi0_eval(grid[i]));
        const double m1 = (lip - dphi) / (lip + dphi + 1e-300);
        if (m1 < phi1) {
          phi1 = m1;
          phi1_pair = pair_text(grid[i], grid[j], t);
        }
      }
    }
  }
  rep.set("psi1p_margin", psi1p);
  rep.set("phi1_margin", phi1);
  if (psi1p < -1e-9) rep.fail("(Psi1)' fails at " + psi1p_pair);
  if (phi1 < -1e-9) rep.fail("(Phi1) fails at " + phi1_pair);

  double eps_req = 0.0;
  for (double s : grid) {
    if (s == 0.0) continue;
    double ref = 0.0;
    for (std::size_t k = 0; k < m; ++k) ref += kappa[k] * eps_n[k] * std::pow(std::abs(s), terms[k].exponent);
    eps_req = std::max(eps_req, std::abs(spec.phi.phi0_eval(s)) / ref);
  }
  rep.set("eps_required", eps_req);
  if (!(eps_req < 1.0)) {
    std::ostringstream os;
    os << "(Phi2) needs eps=" << eps_req << " >= 1";
    rep.fail(os.str());
  }

  double ctilde = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double r = terms[k].exponent;
    const double ci = std::pow(1.0 / (r + 1.0), 1.0 / r) * r / (r + 1.0);
    const double rho = eps_req * kappa[k];
    ctilde = std::max(ctilde, ci * rho * std::max(1.0, std::pow(rho, 1.0 / r)));
  }
  rep.set("ctilde", ctilde);

  sandwich(spec, dom.measure().finite_mass(), grid, times, rep);
  return rep;
}

HConstants declare_constants(const SpectralDomain& dom, const DriftSpec& drift,
                             const NoiseSpec& noise, bool finite_measure) {
  HConstants k;
  const ConditionReport rep = drift.mode == ConditionMode::A2 ? check_A2(drift, dom)
                                                              : check_A1(drift, finite_measure);
  k.c_psi = rep.get("c");
  k.f_psi = rep.get("f");
  k.eps = rep.has("eps_required") ? rep.get("eps_required") : 0.0;
  const double flag = finite_measure ? 1.0 : 0.0;
  const double h_sup = drift.phi.h.sup_abs();
  const double hs0 = hs0_sq(noise, dom);
  const double lip = noise.mult.lipschitz();
  const double rho_max = noise.mult.upper();
  const double lambda1 = dom.eigenvalue(0);
  const double mass = dom.measure().total_mass();

  k.c = 2.0 * h_sup + lip * lip * hs0;
  if (!drift.phi.has_phi0()) k.c -= 2.0 * drift.psi.linear_part() * lambda1;
  k.c2 = 1.0 - k.eps;
  k.c1 = 2.0 * h_sup + k.c2;
  k.f = 2.0 * k.f_psi * mass * flag + rho_max * rho_max * hs0;
  k.c3 = std::max(k.c_psi + k.eps, 0.5 * h_sup);
  const double psi0 = orlicz::dual_eval(drift.psi.young(), drift.psi.eval(0.0, 0.0) / k.c_psi);
  k.g = drift.g_const + k.c_psi * (3.0 * k.f_psi + psi0) * mass * flag;
  return k;
}

double r_functional(const orlicz::YoungFunction& n, const Field& v) {
  return orlicz::modular(v.values(), n, v.domain().measure()) + h_norm_sq(v.domain(), v.coeffs());
}

Field random_field(const DomainPtr& dom, std::uint64_t key, double gamma, double scale,
                   std::size_t n_modes) {
  const std::size_t n = dom->n_grid();
  if (n_modes == 0 || n_modes > n) n_modes = n;
  std::vector<double> c(n_modes);
  rng::standard_normals(key, c);
  for (std::size_t k = 0; k < n_modes; ++k) c[k] *= std::pow(static_cast<double>(k + 1), -gamma);
  const auto v = dom->from_spectral(c);
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  if (peak > 0.0) {
    for (double& x : c) x *= scale / peak;
  }
  return Field::from_coeffs(dom, std::move(c));
}

ConditionReport check_H(const DomainPtr& dom, const DriftSpec& drift, const NoiseSpec& noise,
                        const HCheckOptions& options) {
  ConditionReport rep;
  rep.name = "H";
  const bool finite = dom->measure().finite_mass();
  const HConstants k = options.declared ? *options.declared
                                        : declare_constants(*dom, drift, noise, finite);
  const auto n = drift.psi.young();
  const double hs0 = hs0_sq(noise, *dom);
  const double period = drift.psi.modulation.constant() && drift.phi.h.constant()
                            ? 0.0
                            : std::max(drift.psi.modulation.period, drift.phi.h.period);

  rep.set("c_declared", k.c);
  rep.set("c1", k.c1);
  rep.set("c2", k.c2);
  rep.set("f", k.f);
  rep.set("c3", k.c3);
  rep.set("g", k.g);

  double c_emp = -std::numeric_limits<double>::infinity();
  double h3 = std::numeric_limits<double>::infinity();
  double h4 = std::numeric_limits<double>::infinity();
  int h2_fail = 0, h3_fail = 0, h4_fail = 0;
  for (std::size_t j = 0; j < options.n_samples; ++j) {
    rng::SplitMix64 gen(rng::derive_key(options.seed, j, 0x48));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double su = std::pow(10.0, -2.0 + 3.0 * uni(gen));
    const double sv = std::pow(10.0, -2.0 + 3.0 * uni(gen));
    const double t = period * uni(gen);
    const Field u = random_field(dom, rng::derive_key(options.seed, j, 1), options.gamma, su,
                                 options.n_modes);
    const Field v = random_field(dom, rng::derive_key(options.seed, j, 2), options.gamma, sv,
                                 options.n_modes);
    std::vector<double> dc(u.size());
    for (std::size_t i = 0; i < dc.size(); ++i) dc[i] = u.coeffs()[i] - v.coeffs()[i];
    const Field w = Field::from_coeffs(dom, dc);

    const double au_w = drift_pairing(drift, t, u, w);
    const double av_w = drift_pairing(drift, t, v, w);
    const double rho_diff = noise.mult(h_norm(u)) - noise.mult(h_norm(v));
    const double lhs2 = 2.0 * (au_w - av_w) + rho_diff * rho_diff * hs0;
    const double dist = h_norm_sq(*dom, w.coeffs());
    if (dist > 0.0) {
      c_emp = std::max(c_emp, lhs2 / dist);
      const double tol = 1e-9 * (2.0 * (std::abs(au_w) + std::abs(av_w)) + std::abs(k.c) * dist);
      if (lhs2 > k.c * dist + tol) ++h2_fail;
    }

    const double rv = r_functional(n, v);
    const double ru = r_functional(n, u);
    const double av_v = drift_pairing(drift, t, v, v);
    const double lhs3 = 2.0 * av_v + hs_norm_sq(noise, v);
    const double rhs3 = k.c1 * h_norm_sq(*dom, v.coeffs()) - k.c2 * rv + k.f;
    const double tol3 = 1e-9 * (std::abs(lhs3) + std::abs(rhs3) + k.c2 * rv);
    h3 = std::min(h3, rhs3 - lhs3);
    if (lhs3 > rhs3 + tol3) ++h3_fail;

    const double lhs4 = std::abs(drift_pairing(drift, t, v, u));
    const double rhs4 = k.g + k.c3 * (rv + ru);
    h4 = std::min(h4, rhs4 - lhs4);
    if (lhs4 > rhs4 * (1.0 + 1e-9)) ++h4_fail;
  }
  rep.set("c_empirical", c_emp);
  rep.set("h3_margin", h3);
  rep.set("h4_margin", h4);
  rep.set("samples", static_cast<double>(options.n_samples));
  if (h2_fail) rep.fail("(H2) exceeded on " + std::to_string(h2_fail) + " pairs");
  if (h3_fail) rep.fail("(H3) violated on " + std::to_string(h3_fail) + " samples");
  if (h4_fail) rep.fail("(H4) violated on " + std::to_string(h4_fail) + " samples");

  // (H1): refining the lambda sweep must shrink the largest increment.
  double worst_ratio = 0.0;
  for (std::size_t j = 0; j < options.h1_samples; ++j) {
    const Field u = random_field(dom, rng::derive_key(options.seed, j, 3), options.gamma, 1.0,
                                 options.n_modes);
    const Field v = random_field(dom, rng::derive_key(options.seed, j, 4), options.gamma, 1.0,
                                 options.n_modes);
    const Field x = random_field(dom, rng::derive_key(options.seed, j, 5), options.gamma, 1.0,
                                 options.n_modes);
    const auto max_increment = [&](std::size_t points) {
      double prev = 0.0, worst = 0.0;
      for (std::size_t i = 0; i < points; ++i) {
        const double lam = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
        std::vector<double> c(u.size());
        for (std::size_t q = 0; q < c.size(); ++q) c[q] = u.coeffs()[q] + lam * v.coeffs()[q];
        const double g = drift_pairing(drift, 0.0, Field::from_coeffs(dom, c), x);
        if (i > 0) worst = std::max(worst, std::abs(g - prev));
        prev = g;
      }
      return worst;
    };
    const double coarse = max_increment(257);
    const double fine = max_increment(1025);
    if (coarse > 0.0) worst_ratio = std::max(worst_ratio, fine / coarse);
  }
  rep.set("h1_ratio", worst_ratio);
  if (worst_ratio > 0.75) rep.fail("(H1) lambda sweep increments do not shrink under refinement");
  return rep;
}

ConditionReport check_K(const DomainPtr& dom, const DriftSpec& drift, std::size_t n_samples,
                        std::uint64_t seed, double gamma) {
  ConditionReport rep;
  rep.name = "K";
  const auto n = drift.psi.young();
  double margin = std::numeric_limits<double>::infinity();
  int fails = 0;
  for (std::size_t j = 0; j < n_samples; ++j) {
    rng::SplitMix64 gen(rng::derive_key(seed, j, 0x4b));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const Field x = random_field(dom, rng::derive_key(seed, j, 6), gamma,
                                 std::pow(10.0, -2.0 + 3.0 * uni(gen)));
    const Field y = random_field(dom, rng::derive_key(seed, j, 7), gamma,
                                 std::pow(10.0, -2.0 + 3.0 * uni(gen)));
    std::vector<double> s(x.size()), x2(x.size()), y2(x.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = x.coeffs()[i] + y.coeffs()[i];
      x2[i] = 2.0 * x.coeffs()[i];
      y2[i] = 2.0 * y.coeffs()[i];
    }
    const double lhs = r_functional(n, Field::from_coeffs(dom, s));
    const double rhs = 0.5 * (r_functional(n, Field::from_coeffs(dom, x2)) +
                              r_functional(n, Field::from_coeffs(dom, y2)));
    margin = std::min(margin, (rhs - lhs) / std::max(rhs, 1e-300));
    if (lhs > rhs * (1.0 + 1e-12)) ++fails;
  }
  rep.set("k_relative_margin", margin);
  rep.set("samples", static_cast<double>(n_samples));
  if (fails) rep.fail("R(x+y) <= (R(2x)+R(2y))/2 violated on " + std::to_string(fails) + " pairs");
  return rep;
}

}  // namespace spme
