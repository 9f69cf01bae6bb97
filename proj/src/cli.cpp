#include "spme/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "spme/conditions.hpp"
#include "spme/config.hpp"
#include "spme/csv.hpp"
#include "spme/ensemble.hpp"
#include "spme/errors.hpp"
#include "spme/galerkin.hpp"
#include "spme/verify.hpp"

#ifndef SPME_VERSION
#define SPME_VERSION "0.0.0"
#endif

namespace spme {

namespace {

struct Context {
  ExperimentConfig cfg;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::vector<std::string> outputs;
  nlohmann::json extra = nlohmann::json::object();

  void write(const std::string& name, const CsvTable& table) {
    table.write(out / name);
    outputs.push_back(name);
  }
};

struct Outcome {
  bool pass = true;
  std::string line;
};

GalerkinSystem make_system(const Context& ctx) {
  return GalerkinSystem(make_domain(ctx.cfg), ctx.cfg.drift, make_noise(ctx.cfg), ctx.cfg.stepper);
}

const InitialCondition& require_y(const ExperimentConfig& cfg) {
  if (!cfg.initial_y) throw ConfigError("initial_y", "required by this subcommand");
  return *cfg.initial_y;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

Outcome line_of(const VerifyReport& r) { return {r.pass, r.line()}; }

Outcome cmd_simulate(Context& ctx) {
  const auto sys = make_system(ctx);
  const auto& dom = sys.domain_ptr();
  const Field x0 = make_initial(dom, ctx.cfg.initial);
  const auto young = ctx.cfg.drift.psi.young();
  const std::size_t m = sys.n_modes();

  CsvTable traj;
  traj.header = {"t", "h_norm_sq", "max_norm", "R"};
  for (std::size_t k = 0; k < m; ++k) traj.header.push_back("x_" + std::to_string(k + 1));
  simulate_observe(sys, x0, ctx.seed, 0, [&](std::size_t, double t, const Field& x) {
    std::vector<double> row{t, h_norm_sq(x.domain(), x.coeffs()), 0.0, r_functional(young, x)};
    for (double v : x.values()) row[2] = std::max(row[2], std::abs(v));
    for (std::size_t k = 0; k < m; ++k) row.push_back(x.coeffs()[k]);
    traj.add_row(row);
  });
  ctx.write("trajectory.csv", traj);

  std::string tail;
  if (ctx.cfg.ensemble_size >= 2) {
    const std::vector<Observable> obs{observables::h_norm_sq(), observables::r_functional(young),
                                      observables::max_norm(), observables::mode(0)};
    const auto stats = monte_carlo(sys, x0, ctx.seed, ctx.cfg.ensemble_size, obs, ctx.threads);
    ctx.write("stats.csv", stats.to_csv());
    tail = ", E||X_T||_H^2=" + fmt(stats.mean.back()[0]);
  }
  return {true, "PASS simulate: paths=" + std::to_string(ctx.cfg.ensemble_size) +
                    " steps=" + std::to_string(sys.steps()) +
                    " saved=" + std::to_string(traj.rows.size()) + tail};
}

Outcome cmd_check_conditions(Context& ctx) {
  const auto dom = make_domain(ctx.cfg);
  const auto noise = make_noise(ctx.cfg);
  const auto& drift = ctx.cfg.drift;
  std::vector<ConditionReport> reports;
  if (drift.mode == ConditionMode::A1) {
    reports.push_back(check_A1(drift, ctx.cfg.finite_measure));
  } else {
    reports.push_back(check_A2(drift, *dom, {}, ctx.seed));
  }
  reports.push_back(check_K(dom, drift, ctx.cfg.test.h_samples, ctx.seed));
  HCheckOptions hopt;
  hopt.n_samples = ctx.cfg.test.h_samples;
  hopt.seed = ctx.seed;
  hopt.n_modes = ctx.cfg.stepper.n_modes;
  reports.push_back(check_H(dom, drift, noise, hopt));

  bool pass = true;
  std::string parts;
  for (const auto& r : reports) {
    ctx.write("conditions_" + r.name + ".csv", r.to_csv());
    pass = pass && r.pass;
    if (!parts.empty()) parts += ", ";
    parts += r.name + (r.pass ? " ok" : " failed");
    for (const auto& f : r.failures) parts += " [" + f + "]";
  }
  const auto& h = reports.back();
  parts += "; declared c=" + fmt(h.get("c_declared")) + " empirical c=" + fmt(h.get("c_empirical")) +
           " samples=" + std::to_string(hopt.n_samples);
  return {pass, std::string(pass ? "PASS" : "FAIL") + " check-conditions: " + parts};
}

Outcome cmd_ito_check(Context& ctx) {
  const auto dom = make_domain(ctx.cfg);
  const auto noise = make_noise(ctx.cfg);
  const Field x0 = make_initial(dom, ctx.cfg.initial);
  if (noise.zero()) {
    StepperConfig sc = ctx.cfg.stepper;
    sc.record_ito = true;
    const GalerkinSystem sys(dom, ctx.cfg.drift, noise, sc);
    const auto res = ito_residual(sys, simulate(sys, x0, ctx.seed, 0));
    CsvTable t;
    t.header = {"t", "residual", "remainder", "relative_gap"};
    double worst = 0.0;
    for (std::size_t i = 0; i < res.times.size(); ++i) {
      const double gap = std::abs(res.residual[i] - res.remainder[i]);
      const double rel = res.remainder[i] != 0.0 ? gap / std::abs(res.remainder[i]) : gap;
      worst = std::max(worst, rel);
      t.add_row({res.times[i], res.residual[i], res.remainder[i], rel});
    }
    ctx.write("ito.csv", t);
    const bool pass = worst <= 1e-10;
    return {pass, std::string(pass ? "PASS" : "FAIL") +
                      " ito-check: deterministic residual vs sum dt^2||A||_H^2, max relative gap " +
                      fmt(worst) + " (tol 1e-10), steps=" + std::to_string(sys.steps())};
  }
  const auto rep = ito_refinement(dom, ctx.cfg.drift, noise, ctx.cfg.stepper, ctx.cfg.test.dts, x0,
                                  ctx.cfg.ensemble_size, ctx.seed, ctx.threads,
                                  ctx.cfg.test.min_order);
  ctx.write("ito.csv", rep.table);
  return line_of(rep);
}

Outcome cmd_contraction(Context& ctx) {
  const auto sys = make_system(ctx);
  const auto& dom = sys.domain_ptr();
  const Field x0 = make_initial(dom, ctx.cfg.initial);
  const Field y0 = make_initial(dom, require_y(ctx.cfg));
  const auto k = declare_constants(*dom, ctx.cfg.drift, sys.noise(), ctx.cfg.finite_measure);
  const auto diff = sample_pairs(sys, x0, y0, ctx.seed, ctx.cfg.ensemble_size,
                                 {observables::diff_h_norm_sq()}, ctx.threads);
  const auto rep = contraction_test(diff, k.c);
  ctx.write("contraction.csv", rep.table);
  return line_of(rep);
}

Outcome cmd_energy(Context& ctx) {
  const auto sys = make_system(ctx);
  const auto& dom = sys.domain_ptr();
  const Field x0 = make_initial(dom, ctx.cfg.initial);
  auto k = declare_constants(*dom, ctx.cfg.drift, sys.noise(), ctx.cfg.finite_measure);
  k.c2 *= ctx.cfg.test.c2_scale;
  const auto data = sample_paths(sys, x0, ctx.seed, ctx.cfg.ensemble_size,
                                 {observables::h_norm_sq(),
                                  observables::r_functional(ctx.cfg.drift.psi.young())},
                                 ctx.threads);
  const auto rep = energy_estimate(data, k);
  ctx.write("energy.csv", rep.table);
  return line_of(rep);
}

Outcome cmd_extinction(Context& ctx) {
  const auto sys = make_system(ctx);
  const Field x0 = make_initial(sys.domain_ptr(), ctx.cfg.initial);
  std::vector<double> times, maxn, hn;
  simulate_observe(sys, x0, ctx.seed, 0, [&](std::size_t, double t, const Field& x) {
    double mx = 0.0;
    for (double v : x.values()) mx = std::max(mx, std::abs(v));
    times.push_back(t);
    maxn.push_back(mx);
    hn.push_back(h_norm(x));
  });
  CsvTable t;
  t.header = {"t", "max_norm", "h_norm"};
  for (std::size_t i = 0; i < times.size(); ++i) t.add_row({times[i], maxn[i], hn[i]});
  ctx.write("extinction.csv", t);

  const double eps = ctx.cfg.test.eps;
  const auto te = extinction_time(times, maxn, eps);
  if (ctx.cfg.test.expect == "extinct") {
    const bool pass = te.has_value();
    return {pass, std::string(pass ? "PASS" : "FAIL") + " extinction: max-norm < " + fmt(eps) +
                      (te ? " at t=" + fmt(*te) : " never reached by T=" + fmt(times.back()))};
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < hn.size(); ++i) decreasing = decreasing && hn[i] < hn[i - 1];
  double min_max = maxn.empty() ? 0.0 : maxn[0];
  for (double v : maxn) min_max = std::min(min_max, v);
  const bool pass = !te && decreasing;
  return {pass, std::string(pass ? "PASS" : "FAIL") + " extinction: expected persistence, min max-norm " +
                    fmt(min_max) + " vs eps " + fmt(eps) + ", ||X_t||_H strictly decreasing: " +
                    (decreasing ? "yes" : "no")};
}

Outcome cmd_ou_oracle(Context& ctx) {
  const auto sys = make_system(ctx);
  const Field x0 = make_initial(sys.domain_ptr(), ctx.cfg.initial);
  std::vector<Observable> obs;
  for (std::size_t k = 0; k < sys.n_modes(); ++k) obs.push_back(observables::mode(k));
  const auto attempt = [&](std::uint64_t seed) {
    const auto data = sample_paths(sys, x0, seed, ctx.cfg.ensemble_size, obs, ctx.threads);
    return ou_test(sys, data, x0.coeffs(), ctx.cfg.test.times);
  };
  auto rep = attempt(ctx.seed);
  if (!rep.pass && ou_rerun_allowed(rep)) {
    ctx.extra["rerun_seed"] = ctx.seed + 1;
    rep = attempt(ctx.seed + 1);
    rep.summary += " (rerun with seed " + std::to_string(ctx.seed + 1) + ")";
  }
  ctx.write("ou.csv", rep.table);
  return line_of(rep);
}

Outcome cmd_ergodicity(Context& ctx) {
  const auto sys = make_system(ctx);
  const auto& dom = sys.domain_ptr();
  const Field x0 = make_initial(dom, ctx.cfg.initial);
  const Field y0 = make_initial(dom, require_y(ctx.cfg));
  const auto k = declare_constants(*dom, ctx.cfg.drift, sys.noise(), ctx.cfg.finite_measure);
  const std::vector<Observable> obs{observables::h_projection(0)};
  const auto a = sample_paths(sys, x0, ctx.seed, ctx.cfg.ensemble_size, obs, ctx.threads);
  const auto b = sample_paths(sys, y0, ctx.seed, ctx.cfg.ensemble_size, obs, ctx.threads,
                              std::uint64_t{1} << 32);
  std::vector<double> d(sys.n_modes());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = x0.coeffs()[i] - y0.coeffs()[i];
  const double dist = std::sqrt(h_norm_sq(*dom, d));
  const double lip = 1.0 / std::sqrt(dom->eigenvalue(0));
  VerifyReport rep;
  if (k.c < 0.0) {
    rep = ergodicity_test(a, b, k.c, lip, dist);
  } else {
    rep = time_average_test(a, b);
    rep.summary += " (declared c=" + fmt(k.c) + " >= 0, Lipschitz bound not applicable)";
  }
  ctx.write("ergodicity.csv", rep.table);
  return line_of(rep);
}

void write_manifest(const Context& ctx, const std::string& sub, bool pass) {
  nlohmann::json m;
  m["subcommand"] = sub;
  m["config_sha256"] = sha256_hex(ctx.cfg.canonical);
  m["master_seed"] = ctx.seed;
  m["version"] = SPME_VERSION;
  m["outputs"] = ctx.outputs;
  m["status"] = pass ? "PASS" : "FAIL";
  for (auto it = ctx.extra.begin(); it != ctx.extra.end(); ++it) m[it.key()] = it.value();
  std::ofstream f(ctx.out / "manifest.json", std::ios::binary);
  f << m.dump(2) << '\n';
  if (!f) throw Error("cannot write " + (ctx.out / "manifest.json").string());
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag,
                           std::optional<std::uint64_t> config_seed) {
  if (flag) return *flag;
  if (config_seed) return *config_seed;
  if (const char* env = std::getenv("SPME_SEED"); env && *env) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(env, &used, 10);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != std::string(env).size() || env[0] == '-') {
      throw ConfigError("SPME_SEED", "expected an unsigned 64-bit integer");
    }
    return v;
  }
  return 0;
}

int run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    Context ctx;
    ctx.cfg = load_config(opts.config);
    ctx.seed = resolve_seed(opts.seed, ctx.cfg.master_seed);
    ctx.threads = opts.threads ? *opts.threads : ctx.cfg.threads;
    ctx.out = opts.out;
    std::filesystem::create_directories(ctx.out);

    Outcome res;
    const auto& s = opts.subcommand;
    if (s == "simulate") res = cmd_simulate(ctx);
    else if (s == "check-conditions") res = cmd_check_conditions(ctx);
    else if (s == "ito-check") res = cmd_ito_check(ctx);
    else if (s == "contraction") res = cmd_contraction(ctx);
    else if (s == "energy") res = cmd_energy(ctx);
    else if (s == "extinction") res = cmd_extinction(ctx);
    else if (s == "ou-oracle") res = cmd_ou_oracle(ctx);
    else if (s == "ergodicity") res = cmd_ergodicity(ctx);
    else throw ConfigError("<subcommand>", "unknown subcommand " + s);

    write_manifest(ctx, s, res.pass);
    out << res.line << '\n';
    return res.pass ? exit_code::pass : exit_code::fail;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::config;
  } catch (const UnsupportedError& e) {
    err << "config error: unsupported: " << e.what() << '\n';
    return exit_code::config;
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::config;
  } catch (const BlowUpError& e) {
    err << "blow-up at step " << e.step() << ": " << e.what() << '\n';
    return exit_code::blow_up;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::error;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Stochastic porous-medium / fast-diffusion simulator and verification suite"};
  app.set_version_flag("--version", std::string(SPME_VERSION));
  app.require_subcommand(1);

  RunOptions opts;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  const std::vector<std::pair<std::string, std::string>> subs{
      {"simulate", "Simulate trajectories and write ensemble statistics"},
      {"check-conditions", "Sample-based certificates for the structural conditions"},
      {"ito-check", "Ito formula residual for ||X||_H^2"},
      {"contraction", "Contraction rate of E||X-Y||_H^2"},
      {"energy", "A-priori energy estimate"},
      {"extinction", "Finite-time extinction or persistence"},
      {"ou-oracle", "Linear case against closed-form moments"},
      {"ergodicity", "Lipschitz-observable bound and two-start time averages"}};
  std::vector<std::pair<CLI::App*, std::pair<CLI::Option*, CLI::Option*>>> handles;
  for (const auto& [name, desc] : subs) {
    auto* sc = app.add_subcommand(name, desc);
    sc->add_option("--config", opts.config, "JSON config file")->required();
    sc->add_option("--out", opts.out, "Output directory")->capture_default_str();
    auto* so = sc->add_option("--seed", seed, "Master seed (overrides config)");
    auto* to = sc->add_option("--threads", threads, "Worker threads, 0 = auto");
    handles.push_back({sc, {so, to}});
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code::config;
  }
  for (const auto& [sc, o] : handles) {
    if (!sc->parsed()) continue;
    opts.subcommand = sc->get_name();
    if (o.first->count()) opts.seed = seed;
    if (o.second->count()) opts.threads = threads;
  }
  return run(opts, std::cout, std::cerr);
}

}  // namespace spme
