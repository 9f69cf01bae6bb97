// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spme/cli.hpp"
#include "spme/conditions.hpp"
#include "spme/config.hpp"
#include "spme/ensemble.hpp"
#include "spme/orlicz.hpp"
#include "spme/triple.hpp"
#include "spme/verify.hpp"

using namespace spme;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = SPME_CONFIG_DIR;
const fs::path kScratch = fs::temp_directory_path() / "spme_acceptance";

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, i / double(n - 1)));
  return g;
}

std::vector<double> normals(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> z(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = z(gen);
  return v;
}

struct CliRun {
  int code;
  std::string line;
  fs::path dir;
};

// Every CLI run is remembered so the reproducibility criterion can repeat it.
std::vector<std::pair<std::string, std::string>> g_runs;  // (subcommand, config file)

CliRun cli(const std::string& sub, const std::string& config, const std::string& tag,
           unsigned threads = 0, bool remember = true) {
  RunOptions o;
  o.subcommand = sub;
  o.config = kConfigs / config;
  o.out = kScratch / tag;
  if (threads) o.threads = threads;
  fs::remove_all(o.out);
  std::ostringstream out, err;
  const int code = run(o, out, err);
  std::string line = out.str() + err.str();
  while (!line.empty() && line.back() == '\n') line.pop_back();
  if (remember) g_runs.emplace_back(sub, config);
  return {code, line, o.out};
}

Verdict from_cli(const CliRun& r) {
  Verdict v;
  v.require(r.code == exit_code::pass, r.line);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------

Verdict orlicz_suite() {
  using namespace orlicz;
  Verdict v;
  double worst_round = 0.0;
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const auto n = YoungFunction::power(1.0, p);
    const auto nn = n.dual().dual();
    for (double s : log_grid(1e-3, 1e3, 61)) {
      worst_round = std::max(worst_round, std::abs(nn(s) - n(s)) / n(s));
    }
  }
  v.require(worst_round <= 1e-6, "dual round trip rel err " + num(worst_round));

  bool doubling = true;
  double worst_square = 0.0;
  for (double r : {1.0, 1.5, 2.0, 3.0}) {
    const auto n = YoungFunction::power(1.0, r + 1.0);
    const double factor = std::pow(std::pow(2.0, 1.0 / r), r + 1.0);
    for (double s : log_grid(1e-3, 1e3, 61)) {
      const double lhs = dual_eval(n, 2.0 * s);
      doubling = doubling && lhs <= factor * dual_eval(n, s) * (1.0 + 1e-12);
      if (r == 1.0) worst_square = std::max(worst_square, std::abs(lhs / dual_eval(n, s) - 4.0));
    }
  }
  v.require(doubling, "dual doubling bound");
  v.require(worst_square <= 1e-12, "s^2 factor 4 err " + num(worst_square));

  std::mt19937_64 gen(2024);
  const auto n = YoungFunction::power_sum({{1.0, 2.0}, {0.5, 4.0}});
  const DiscreteMeasure m(std::vector<double>(64, 1.0 / 65.0));
  int tight = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto f = normals(gen, 64, std::pow(10.0, -3.0 + 6.0 * (trial % 13) / 12.0));
    const double norm = luxemburg_norm(f, n, m);
    std::vector<double> in(64), out(64);
    for (int i = 0; i < 64; ++i) {
      in[i] = f[i] / norm;
      out[i] = f[i] / (norm * (1.0 - 1e-6));
    }
    if (modular(in, n, m) <= 1.0 && modular(out, n, m) > 1.0) ++tight;
  }
  v.require(tight == 1000, "unit ball tight on " + std::to_string(tight) + "/1000 fields");
  return v;
}

Verdict triple_consistency() {
  Verdict v;
  for (double alpha : {1.0, 0.5}) {
    const auto dom = SpectralDomain::create(128, alpha);
    const auto psi = PsiSpec::power(1.0, 2.0);
    std::mt19937_64 gen(alpha == 1.0 ? 31 : 37);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      auto vals = normals(gen, 128);
      for (auto& x : vals) x = psi.eval(0.0, x);
      const Field pv = Field::from_values(dom, vals);
      const Field u = Field::from_values(dom, normals(gen, 128));
      const double a = pairing_quadrature(pv, u);
      const double b = pairing_spectral(pv, u);
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    v.require(worst <= 1e-9, "alpha=" + num(alpha) + " max gap " + num(worst));
  }
  return v;
}

Verdict condition_certificates() {
  Verdict v;
  for (double r : {2.0, 0.5}) {
    DriftSpec d;
    d.psi = PsiSpec::power(1.0, r);
    v.require(check_A1(d).pass, "A1 r=" + num(r));
  }
  const auto dom = SpectralDomain::create(64);
  DriftSpec ok;
  ok.mode = ConditionMode::A2;
  ok.psi = PsiSpec::power_sum({{1.0, 1.0}, {1.0, 3.0}});
  const double kappa = 1.0 / estimate_Linv_norm(*dom, 2.0);
  ok.phi.phi0 = {{0.5 * kappa, 1.0}};
  v.require(check_A2(ok, *dom).pass, "A2 r=3 compliant phi0");

  DriftSpec nonmono;
  nonmono.psi = PsiSpec::power_sum({{1.0, 1.0}, {-1.0, 3.0}});
  v.require(!check_A1(nonmono).pass, "non-monotone psi rejected");

  DriftSpec eps2 = ok;
  eps2.phi.phi0 = {{2.0 * kappa, 1.0}};
  const auto rep = check_A2(eps2, *dom);
  v.require(!rep.pass, "eps=2 rejected (eps_required " + num(rep.get("eps_required")) + ")");
  return v;
}

Verdict contraction() {
  Verdict v = from_cli(cli("contraction", "pme_contraction.json", "c6a"));

  // Shared additive noise cancels in X - Y, so each semi-implicit step is an H contraction.
  const auto cfg = load_config(kConfigs / "pme_contraction.json");
  const auto dom = make_domain(cfg);
  const GalerkinSystem sys(dom, cfg.drift, make_noise(cfg), cfg.stepper);
  const auto diff = sample_pairs(sys, make_initial(dom, cfg.initial), make_initial(dom, *cfg.initial_y),
                                 *cfg.master_seed, 20, {observables::diff_h_norm_sq()});
  double worst = -1.0;
  for (std::size_t p = 0; p < diff.n_paths(); ++p) {
    for (std::size_t i = 1; i < diff.times.size(); ++i) {
      const double prev = diff.at(p, i - 1, 0), cur = diff.at(p, i, 0);
      worst = std::max(worst, (cur - prev) / prev);
    }
  }
  v.require(worst <= 1e-12, "pathwise ||X-Y||_H nonincreasing (max relative rise " + num(worst) + ")");

  // Linear single mode: Richardson extrapolation in dt of the fitted rate.
  const auto dom8 = SpectralDomain::create(8);
  DriftSpec lin;
  lin.psi = PsiSpec::power(1.0, 1.0);
  std::vector<SlopeFit> fits;
  for (double dt : {1e-3, 5e-4}) {
    StepperConfig c;
    c.dt = dt;
    c.T = 1.0;
    c.n_modes = 1;
    c.save_every = static_cast<std::size_t>(std::lround(0.01 / dt));
    const GalerkinSystem s1(dom8, lin, NoiseSpec::decay(1, 0.5, 1.0), c);
    const auto d = sample_pairs(s1, Field::mode(dom8, 0, 1.0), Field::mode(dom8, 0, -0.5), 5, 50,
                                {observables::diff_h_norm_sq()});
    fits.push_back(fit_log_slope(d));
  }
  const auto rate = contraction_rate_test(fits[0], fits[1], -2.0 * dom8->eigenvalue(0));
  v.require(rate.pass, rate.summary);
  return v;
}

Verdict decay_dichotomy() {
  Verdict v = from_cli(cli("extinction", "fast_diffusion_extinction.json", "c8fd"));
  const auto p = from_cli(cli("extinction", "pme_persistence.json", "c8pme"));
  v.require(p.pass, p.detail);
  return v;
}

Verdict energy() {
  Verdict v = from_cli(cli("energy", "pme_energy.json", "c9"));
  const auto inflated = kScratch / "pme_energy_x10.json";
  auto j = nlohmann::json::parse(slurp(kConfigs / "pme_energy.json"));
  j["test"]["c2_scale"] = 10.0;
  std::ofstream(inflated, std::ios::binary) << j.dump(2);
  RunOptions o;
  o.subcommand = "energy";
  o.config = inflated;
  o.out = kScratch / "c9x10";
  std::ostringstream out, err;
  const int code = run(o, out, err);
  v.require(code == exit_code::fail, "10x c2 control fails: " + out.str().substr(0, 60));
  return v;
}

Verdict ergodicity() {
  Verdict v = from_cli(cli("ergodicity", "ou_ergodicity.json", "c10"));
  const auto t = from_cli(cli("ergodicity", "pme_ergodicity.json", "c10pme"));
  v.require(t.pass, t.detail);
  return v;
}

Verdict reproducibility() {
  Verdict v;
  std::size_t files = 0;
  for (std::size_t i = 0; i < g_runs.size(); ++i) {
    const auto& [sub, config] = g_runs[i];
    const auto a = cli(sub, config, "r" + std::to_string(i) + "a", 1, false);
    const auto b = cli(sub, config, "r" + std::to_string(i) + "b", 2, false);
    bool same = a.code == b.code;
    for (const auto& e : fs::directory_iterator(a.dir)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      same = same && slurp(e.path()) == slurp(b.dir / e.path().filename());
    }
    v.require(same, sub + " " + config);
  }
  v.detail = std::to_string(g_runs.size()) + " runs, " + std::to_string(files) +
             " CSVs compared across 1 and 2 threads" + (v.pass ? "" : ": " + v.detail);
  return v;
}

}  // namespace

int main() {
  fs::remove_all(kScratch);
  fs::create_directories(kScratch);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"orlicz suite", orlicz_suite},
      {"triple consistency", triple_consistency},
      {"condition certificates", condition_certificates},
      {"deterministic ito", [] { return from_cli(cli("ito-check", "pme_deterministic_ito.json", "c4")); }},
      {"stochastic ito", [] { return from_cli(cli("ito-check", "pme_ito_refinement.json", "c5")); }},
      {"contraction", contraction},
      {"ou oracle", [] { return from_cli(cli("ou-oracle", "ou_linear.json", "c7")); }},
      {"decay dichotomy", decay_dichotomy},
      {"energy estimate", energy},
      {"ergodicity", ergodicity},
      {"reproducibility", reproducibility},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failed;
    std::printf("%s %2zu %s (%.1fs): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                secs, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
