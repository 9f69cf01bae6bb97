#include "spme/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spme/errors.hpp"

namespace spme {

double VerifyReport::metric(const std::string& key) const {
  for (const auto& [k, v] : metrics) {
    if (k == key) return v;
  }
  throw std::out_of_range("VerifyReport: no metric " + key);
}

std::string VerifyReport::line() const {
  return std::string(pass ? "PASS " : "FAIL ") + name + ": " + summary;
}

namespace {

double ols_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

double se_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  std::vector<double> d(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = (v[i] - m) * (v[i] - m);
  const auto n = static_cast<double>(v.size());
  return std::sqrt(pairwise_sum(d) / (n - 1.0) / n);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

ItoResidual ito_residual(const GalerkinSystem& sys, const Trajectory& traj) {
  if (!traj.ito) throw PreconditionError("ito_residual: trajectory has no Ito records");
  const auto& rec = *traj.ito;
  const std::size_t steps = rec.x.size();
  if (steps != sys.steps() || traj.states.empty()) {
    throw PreconditionError("ito_residual: record length does not match the stepper");
  }
  const auto& dom = sys.domain();
  const auto eig = dom.eigenvalues();
  const double dt = sys.config().dt;
  const std::size_t m = sys.n_modes();

  const auto norm_sq = [&](std::span<const double> c) {
    long double acc = 0.0L;
    for (std::size_t k = 0; k < std::min(m, c.size()); ++k) {
      acc += static_cast<long double>(c[k]) * c[k] / eig[k];
    }
    return acc;
  };

  ItoResidual out;
  const auto final_coeffs = traj.states.back().coeffs();
  const long double x0 = steps > 0 ? norm_sq(rec.x[0]) : norm_sq(final_coeffs);
  long double cum = 0.0L, rem = 0.0L;
  out.times.push_back(0.0);
  out.residual.push_back(0.0);
  out.remainder.push_back(0.0);
  for (std::size_t j = 0; j < steps; ++j) {
    const auto& x = rec.x[j];
    const auto& y = rec.y[j];
    const auto& z = rec.z[j];
    const auto& dw = rec.dw[j];
    long double pair = 0.0L, hs = 0.0L, mart = 0.0L, yy = 0.0L;
    for (std::size_t k = 0; k < m; ++k) {
      pair += static_cast<long double>(y[k]) * x[k] / eig[k];
      yy += static_cast<long double>(y[k]) * y[k] / eig[k];
    }
    for (std::size_t k = 0; k < std::min(m, z.size()); ++k) {
      hs += static_cast<long double>(z[k]) * z[k] / eig[k];
      mart += static_cast<long double>(z[k]) * dw[k] * x[k] / eig[k];
    }
    cum += (2.0L * pair + hs) * dt + 2.0L * mart;
    rem += static_cast<long double>(dt) * dt * yy;
    const long double xn = j + 1 < steps ? norm_sq(rec.x[j + 1]) : norm_sq(final_coeffs);
    const double r = static_cast<double>(xn - x0 - cum);
    out.times.push_back(static_cast<double>(j + 1) * dt);
    out.residual.push_back(r);
    out.remainder.push_back(static_cast<double>(rem));
    out.max_abs = std::max(out.max_abs, std::abs(r));
  }
  return out;
}

VerifyReport ito_refinement(const DomainPtr& dom, const DriftSpec& drift, const NoiseSpec& noise,
                            StepperConfig base, std::vector<double> dts, const Field& x0,
                            std::size_t n_paths, std::uint64_t seed, unsigned threads,
                            double min_order) {
  if (dts.size() < 2) throw PreconditionError("ito_refinement: need at least two step sizes");
  std::sort(dts.begin(), dts.end(), std::greater<>());
  VerifyReport rep;
  rep.name = "ito-check";
  rep.table.header = {"dt", "mean_max_residual", "se"};
  std::vector<double> logdt, logres, means;
  for (double dt : dts) {
    StepperConfig cfg = base;
    cfg.dt = dt;
    cfg.brownian_dt = dts.front();
    cfg.record_ito = true;
    cfg.save_every = 1;
    const GalerkinSystem sys(dom, drift, noise, cfg);
    const auto per_path = run_paths(n_paths, threads, [&](std::size_t p) {
      const Trajectory tr = simulate(sys, x0, seed, p);
      return std::vector<double>{ito_residual(sys, tr).max_abs};
    });
    std::vector<double> v(per_path.size());
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = per_path[p][0];
    const double mean = mean_of(v);
    rep.table.add_row({dt, mean, se_of(v)});
    means.push_back(mean);
    logdt.push_back(std::log(dt));
    logres.push_back(std::log(mean));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < means.size(); ++i) monotone = monotone && means[i] < means[i - 1];
  const double order = ols_slope(logdt, logres);
  rep.metrics = {{"order", order}, {"paths", static_cast<double>(n_paths)}};
  rep.pass = monotone && order >= min_order;
  rep.summary = "max Ito residual order " + fmt(order) + " (need >= " + fmt(min_order) +
                "), monotone=" + (monotone ? "yes" : "no") + ", paths=" + std::to_string(n_paths);
  return rep;
}

// ---------------------------------------------------------------------------

SlopeFit fit_log_slope(const PathData& data, std::size_t obs, double skip_fraction, double floor,
                       std::size_t batches) {
  const std::size_t nt = data.times.size();
  const std::size_t np = data.n_paths();
  if (nt < 2 || np == 0) throw PreconditionError("fit_log_slope: not enough data");
  const double t_end = data.times.back();
  std::vector<std::size_t> idx;
  std::vector<double> means(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    means[i] = mean_of(data.column(i, obs));
    if (data.times[i] >= skip_fraction * t_end && means[i] > floor) idx.push_back(i);
  }
  if (idx.size() < 2) throw PreconditionError("fit_log_slope: fewer than two usable times");
  const auto fit = [&](const std::vector<double>& m) {
    std::vector<double> x, y;
    for (std::size_t i : idx) {
      if (m[i] > 0.0) {
        x.push_back(data.times[i]);
        y.push_back(std::log(m[i]));
      }
    }
    return x.size() >= 2 ? ols_slope(x, y) : std::numeric_limits<double>::quiet_NaN();
  };
  SlopeFit out;
  out.slope = fit(means);
  out.points = idx.size();
  if (batches >= 2 && np >= 2 * batches) {
    std::vector<double> slopes;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * np / batches, hi = (b + 1) * np / batches;
      std::vector<double> m(nt);
      for (std::size_t i = 0; i < nt; ++i) {
        std::vector<double> col;
        for (std::size_t p = lo; p < hi; ++p) col.push_back(data.at(p, i, obs));
        m[i] = mean_of(col);
      }
      const double s = fit(m);
      if (std::isfinite(s)) slopes.push_back(s);
    }
    out.se = se_of(slopes);
  }
  return out;
}

VerifyReport contraction_test(const PathData& diff, double declared_c) {
  if (mean_of(diff.column(0, 0)) == 0.0) {
    throw PreconditionError("contraction_test: identical initial states, slope undefined");
  }
  const SlopeFit fit = fit_log_slope(diff);
  VerifyReport rep;
  rep.name = "contraction";
  const double bound = declared_c + 3.0 * fit.se + 1e-9;
  rep.pass = fit.slope <= bound;
  rep.metrics = {{"slope", fit.slope}, {"se", fit.se}, {"declared_c", declared_c},
                 {"paths", static_cast<double>(diff.n_paths())}};
  rep.summary = "slope " + fmt(fit.slope) + " vs declared c " + fmt(declared_c) + " + 3 SE (SE " +
                fmt(fit.se) + "), paths=" + std::to_string(diff.n_paths());
  const StatTable st = summarize(diff);
  rep.table = st.to_csv();
  return rep;
}

VerifyReport contraction_rate_test(const SlopeFit& coarse, const SlopeFit& fine, double expected) {
  VerifyReport rep;
  rep.name = "contraction-rate";
  const double extrap = 2.0 * fine.slope - coarse.slope;
  const double disc = std::abs(coarse.slope - fine.slope);
  const double se = std::sqrt(4.0 * fine.se * fine.se + coarse.se * coarse.se + disc * disc);
  rep.pass = std::abs(extrap - expected) <= 3.0 * se + 1e-12 * std::abs(expected);
  rep.metrics = {{"slope_dt", coarse.slope}, {"slope_dt_half", fine.slope},
                 {"extrapolated", extrap},  {"expected", expected}, {"se", se}};
  rep.summary = "extrapolated slope " + fmt(extrap) + " vs " + fmt(expected) + " (3 SE = " +
                fmt(3.0 * se) + ")";
  rep.table.header = {"slope_dt", "slope_dt_half", "extrapolated", "expected", "se"};
  rep.table.add_row({coarse.slope, fine.slope, extrap, expected, se});
  return rep;
}

// ---------------------------------------------------------------------------

VerifyReport energy_estimate(const PathData& data, const HConstants& k) {
  const std::size_t nt = data.times.size();
  const std::size_t np = data.n_paths();
  if (data.names.size() < 2 || np < 2) {
    throw PreconditionError("energy_estimate: needs ||X||_H^2 and R observables on >= 2 paths");
  }
  VerifyReport rep;
  rep.name = "energy";
  rep.table.header = {"t", "mean_defect", "se", "mean_h_norm_sq"};
  std::vector<std::vector<double>> defect(nt, std::vector<double>(np));
  for (std::size_t p = 0; p < np; ++p) {
    const double x0 = data.at(p, 0, 0);
    long double integral = 0.0L;
    for (std::size_t i = 0; i < nt; ++i) {
      const double t = data.times[i];
      if (i > 0) {
        integral += static_cast<long double>(std::exp(-k.c1 * t)) * data.at(p, i, 1) *
                    (t - data.times[i - 1]);
      }
      const double f_int = k.c1 == 0.0 ? k.f * t : k.f * (1.0 - std::exp(-k.c1 * t)) / k.c1;
      defect[i][p] = std::exp(-k.c1 * t) * data.at(p, i, 0) +
                     k.c2 * static_cast<double>(integral) - x0 - f_int;
    }
  }
  double worst_z = -std::numeric_limits<double>::infinity();
  double sup_energy = 0.0;
  std::optional<double> first_violation;
  for (std::size_t i = 0; i < nt; ++i) {
    const double m = mean_of(defect[i]);
    const double se = se_of(defect[i]);
    const double e = mean_of(data.column(i, 0));
    sup_energy = std::max(sup_energy, e);
    rep.table.add_row({data.times[i], m, se, e});
    const double slack = 3.0 * se + 1e-12 * (1.0 + std::abs(e));
    if (se > 0.0) worst_z = std::max(worst_z, m / se);
    if (m > slack && !first_violation) first_violation = data.times[i];
  }
  rep.pass = !first_violation;
  rep.metrics = {{"c1", k.c1}, {"c2", k.c2}, {"f", k.f}, {"max_z", worst_z},
                 {"sup_mean_h_norm_sq", sup_energy}, {"paths", static_cast<double>(np)}};
  rep.summary = "c1=" + fmt(k.c1) + " c2=" + fmt(k.c2) + " f=" + fmt(k.f) + ", max defect z " +
                fmt(worst_z) + ", sup E||X||^2 " + fmt(sup_energy) + ", paths=" + std::to_string(np);
  if (first_violation) rep.summary += ", first violation at t=" + fmt(*first_violation);
  return rep;
}

// ---------------------------------------------------------------------------

std::optional<double> extinction_time(std::span<const double> times,
                                      std::span<const double> max_norms, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("extinction_time: eps must be > 0");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (max_norms[i] < eps) return times[i];
  }
  return std::nullopt;
}

std::optional<double> extinction_time(const Trajectory& traj, double eps) {
  std::vector<double> m;
  for (const auto& x : traj.states) {
    double a = 0.0;
    for (double v : x.values()) a = std::max(a, std::abs(v));
    m.push_back(a);
  }
  return extinction_time(traj.times, m, eps);
}

// ---------------------------------------------------------------------------

std::vector<OuMoments> ou_oracle(const SpectralDomain& dom, const DriftSpec& drift,
                                 const NoiseSpec& noise, std::span<const double> x0_coeffs,
                                 double t, std::size_t n_modes) {
  if (!drift.psi.is_linear() || !drift.psi.modulation.constant() || !drift.phi.h.constant() ||
      !drift.phi.phi0_linear() || !noise.additive()) {
    throw PreconditionError("ou_oracle: needs linear Psi, constant coefficients and additive noise");
  }
  double slope = 0.0;
  for (const auto& term : drift.psi.terms) slope += term.coeff;
  slope *= drift.psi.modulation.mean;
  double shift = drift.phi.h.mean;
  for (const auto& term : drift.phi.phi0) shift += term.coeff;
  const double rho = noise.mult.value;
  std::vector<OuMoments> out(n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    const double rate = slope * dom.eigenvalue(k) - shift;
    const double sigma = k < noise.sigma.size() ? rho * noise.sigma[k] : 0.0;
    const double x = k < x0_coeffs.size() ? x0_coeffs[k] : 0.0;
    out[k].mean = std::exp(-rate * t) * x;
    out[k].var = rate == 0.0 ? sigma * sigma * t
                             : sigma * sigma * -std::expm1(-2.0 * rate * t) / (2.0 * rate);
  }
  return out;
}

VerifyReport ou_test(const GalerkinSystem& sys, const PathData& data,
                     std::span<const double> x0_coeffs, std::span<const double> check_times) {
  VerifyReport rep;
  rep.name = "ou-oracle";
  rep.table.header = {"t", "mode", "mean", "mean_exact", "z_mean", "var", "var_exact", "z_var"};
  const std::size_t modes = data.names.size();
  const auto np = static_cast<double>(data.n_paths());
  double max_z = 0.0;
  int exceed = 0, marginal = 0, stats = 0;
  const auto z_of = [](double est, double exact, double se) {
    if (se > 0.0) return (est - exact) / se;
    return std::abs(est - exact) <= 1e-12 * (1.0 + std::abs(exact))
               ? 0.0
               : std::numeric_limits<double>::infinity();
  };
  for (double tc : check_times) {
    std::size_t ti = data.times.size();
    for (std::size_t i = 0; i < data.times.size(); ++i) {
      if (std::abs(data.times[i] - tc) <= 1e-9 * std::max(1.0, tc)) ti = i;
    }
    if (ti == data.times.size()) {
      throw PreconditionError("ou_test: t=" + fmt(tc) + " is not a saved time");
    }
    const auto exact = ou_oracle(sys.domain(), sys.drift(), sys.noise(), x0_coeffs, tc, modes);
    for (std::size_t k = 0; k < modes; ++k) {
      auto col = data.column(ti, k);
      const double m = mean_of(col);
      std::vector<double> d2(col.size()), d4(col.size());
      for (std::size_t p = 0; p < col.size(); ++p) {
        const double d = col[p] - m;
        d2[p] = d * d;
        d4[p] = d * d * d * d;
      }
      const double var = pairwise_sum(d2) / (np - 1.0);
      const double m4 = pairwise_sum(d4) / np;
      const double zm = z_of(m, exact[k].mean, std::sqrt(var / np));
      const double zv = z_of(var, exact[k].var, std::sqrt(std::max(m4 - var * var, 0.0) / np));
      rep.table.add_row({tc, static_cast<double>(k + 1), m, exact[k].mean, zm, var, exact[k].var, zv});
      for (double z : {zm, zv}) {
        ++stats;
        max_z = std::max(max_z, std::abs(z));
        if (std::abs(z) >= 3.0) {
          ++exceed;
          if (std::abs(z) < 3.5) ++marginal;
        }
      }
    }
  }
  rep.pass = exceed == 0;
  rep.metrics = {{"max_abs_z", max_z},
                 {"exceed", static_cast<double>(exceed)},
                 {"marginal", static_cast<double>(marginal)},
                 {"statistics", static_cast<double>(stats)},
                 {"paths", np}};
  rep.summary = "max |z| " + fmt(max_z) + " over " + std::to_string(stats) +
                " statistics (need < 3), paths=" + std::to_string(data.n_paths());
  return rep;
}

bool ou_rerun_allowed(const VerifyReport& report) {
  return !report.pass && report.metric("exceed") == 1.0 && report.metric("marginal") == 1.0;
}

// ---------------------------------------------------------------------------

VerifyReport time_average_test(const PathData& a, const PathData& b, std::size_t obs) {
  const auto averages = [&](const PathData& d) {
    const double t_half = 0.5 * d.times.back();
    std::vector<double> avg(d.n_paths());
    for (std::size_t p = 0; p < d.n_paths(); ++p) {
      std::vector<double> v;
      for (std::size_t i = 0; i < d.times.size(); ++i) {
        if (d.times[i] >= t_half) v.push_back(d.at(p, i, obs));
      }
      avg[p] = mean_of(v);
    }
    return avg;
  };
  const auto va = averages(a);
  const auto vb = averages(b);
  const double ma = mean_of(va), mb = mean_of(vb);
  const double se = std::hypot(se_of(va), se_of(vb));
  VerifyReport rep;
  rep.name = "time-average";
  rep.pass = std::abs(ma - mb) <= 3.0 * se;
  rep.metrics = {{"avg_a", ma}, {"avg_b", mb}, {"combined_se", se}};
  rep.summary = "long-run averages " + fmt(ma) + " vs " + fmt(mb) + " (3 SE = " + fmt(3.0 * se) + ")";
  rep.table.header = {"avg_a", "avg_b", "combined_se"};
  rep.table.add_row({ma, mb, se});
  return rep;
}

VerifyReport ergodicity_test(const PathData& a, const PathData& b, double c, double lip,
                             double dist_h, std::size_t obs) {
  if (!(c < 0.0)) {
    throw PreconditionError("ergodicity_test: declared c = " + fmt(c) + " is not negative");
  }
  if (a.times != b.times) throw PreconditionError("ergodicity_test: ensembles on different times");
  VerifyReport rep;
  rep.name = "ergodicity";
  rep.table.header = {"t", "mean_a", "mean_b", "difference", "bound", "combined_se"};
  bool ok = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    const auto ca = a.column(i, obs);
    const auto cb = b.column(i, obs);
    const double diff = std::abs(mean_of(ca) - mean_of(cb));
    const double bound = std::exp(0.5 * c * a.times[i]) * lip * dist_h;
    const double se = std::hypot(se_of(ca), se_of(cb));
    rep.table.add_row({a.times[i], mean_of(ca), mean_of(cb), diff, bound, se});
    const double excess = diff - bound - 3.0 * se - 1e-12 * (1.0 + bound);
    worst = std::max(worst, excess);
    if (excess > 0.0) ok = false;
  }
  const VerifyReport avg = time_average_test(a, b, obs);
  rep.pass = ok && avg.pass;
  rep.metrics = {{"c", c}, {"lip", lip}, {"dist_h", dist_h}, {"worst_excess", worst}};
  for (const auto& m : avg.metrics) rep.metrics.push_back(m);
  rep.summary = "bound e^{ct/2} Lip ||x-y||_H with c=" + fmt(c) + ": worst excess " + fmt(worst) +
                "; " + avg.summary + ", paths=" + std::to_string(a.n_paths());
  return rep;
}

}  // namespace spme
