#include "spme/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spme/conditions.hpp"
#include "spme/errors.hpp"
#include "spme/rng.hpp"

namespace spme {

using nlohmann::json;

namespace {

// Reads an object while tracking which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  bool has(const std::string& k) const { return j_.contains(k); }

  const json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  double number(const std::string& k, double fallback) {
    if (!has(k)) return fallback;
    const json& v = raw(k);
    if (!v.is_number()) throw ConfigError(key(k), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(key(k), "must be finite");
    return x;
  }

  std::uint64_t unsigned_int(const std::string& k, std::uint64_t fallback) {
    if (!has(k)) return fallback;
    const json& v = raw(k);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(key(k), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& k, bool fallback) {
    if (!has(k)) return fallback;
    const json& v = raw(k);
    if (!v.is_boolean()) throw ConfigError(key(k), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& k, const std::string& fallback) {
    if (!has(k)) return fallback;
    const json& v = raw(k);
    if (!v.is_string()) throw ConfigError(key(k), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& k, std::vector<double> fallback) {
    if (!has(k)) return fallback;
    const json& v = raw(k);
    if (!v.is_array()) throw ConfigError(key(k), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(key(k) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

TimeProfile read_profile(const json& j, const std::string& path, TimeProfile fallback) {
  Reader r(j, path);
  TimeProfile p;
  p.mean = r.number("mean", fallback.mean);
  p.amplitude = r.number("amplitude", fallback.amplitude);
  p.period = r.number("period", fallback.period);
  if (!(p.period > 0.0)) throw ConfigError(r.key("period"), "must be > 0");
  r.finish();
  return p;
}

std::vector<SignedPower> read_terms(const json& j, const std::string& path, bool positive_exponent) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of {coeff, exponent}");
  std::vector<SignedPower> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    Reader r(j[i], p);
    if (!r.has("coeff") || !r.has("exponent")) throw ConfigError(p, "needs coeff and exponent");
    SignedPower t{r.number("coeff", 0.0), r.number("exponent", 0.0)};
    if (positive_exponent && !(t.exponent > 0.0)) throw ConfigError(r.key("exponent"), "must be > 0");
    r.finish();
    out.push_back(t);
  }
  return out;
}

InitialCondition read_initial(const json& j, const std::string& path) {
  Reader r(j, path);
  InitialCondition ic;
  const std::string shape = r.string("shape", "bump");
  if (shape == "bump") ic.shape = InitialCondition::Shape::Bump;
  else if (shape == "mode") ic.shape = InitialCondition::Shape::Mode;
  else if (shape == "random") ic.shape = InitialCondition::Shape::Random;
  else if (shape == "zero") ic.shape = InitialCondition::Shape::Zero;
  else throw ConfigError(r.key("shape"), "expected bump, mode, random or zero");
  ic.amplitude = r.number("amplitude", ic.amplitude);
  ic.center = r.number("center", ic.center);
  ic.width = r.number("width", ic.width);
  if (!(ic.width > 0.0)) throw ConfigError(r.key("width"), "must be > 0");
  ic.k = r.unsigned_int("k", ic.k);
  if (ic.k < 1) throw ConfigError(r.key("k"), "modes are numbered from 1");
  ic.gamma = r.number("gamma", ic.gamma);
  ic.seed = r.unsigned_int("seed", ic.seed);
  r.finish();
  return ic;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.canonical = root.dump();
  Reader top(root, "");

  if (top.has("domain")) {
    Reader r(top.raw("domain"), "domain");
    cfg.n_grid = r.unsigned_int("n_grid", cfg.n_grid);
    if (cfg.n_grid < 1) throw ConfigError("domain.n_grid", "must be >= 1");
    cfg.alpha = r.number("alpha", cfg.alpha);
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw ConfigError("domain.alpha", "must lie in (0, 1]");
    cfg.finite_measure = r.boolean("finite_measure", cfg.finite_measure);
    r.finish();
  }

  if (!top.has("drift")) throw ConfigError("drift", "required");
  {
    Reader r(top.raw("drift"), "drift");
    const std::string mode = r.string("mode", "A1");
    if (mode == "A1") cfg.drift.mode = ConditionMode::A1;
    else if (mode == "A2") cfg.drift.mode = ConditionMode::A2;
    else throw ConfigError("drift.mode", "expected A1 or A2");
    if (!r.has("psi")) throw ConfigError("drift.psi", "required");
    {
      Reader p(r.raw("psi"), "drift.psi");
      TimeProfile mod;
      if (p.has("modulation")) mod = read_profile(p.raw("modulation"), "drift.psi.modulation", mod);
      if (p.has("terms") == p.has("log_power")) {
        throw ConfigError("drift.psi", "give exactly one of terms or log_power");
      }
      if (p.has("terms")) {
        cfg.drift.psi = PsiSpec::power_sum(read_terms(p.raw("terms"), "drift.psi.terms", true), mod);
        if (cfg.drift.psi.terms.empty()) throw ConfigError("drift.psi.terms", "must not be empty");
      } else {
        Reader l(p.raw("log_power"), "drift.psi.log_power");
        const double theta = l.number("theta", 2.0);
        const double rr = l.number("r", 1.0);
        if (!(theta > 1.0)) throw ConfigError("drift.psi.log_power.theta", "must be > 1");
        if (!(rr >= 1.0)) throw ConfigError("drift.psi.log_power.r", "must be >= 1");
        l.finish();
        cfg.drift.psi = PsiSpec::log_power(theta, rr, mod);
      }
      if (!(mod.lower() > 0.0)) throw ConfigError("drift.psi.modulation", "a(t) must stay above 0");
      p.finish();
    }
    if (r.has("phi")) {
      Reader p(r.raw("phi"), "drift.phi");
      if (p.has("h")) cfg.drift.phi.h = read_profile(p.raw("h"), "drift.phi.h", TimeProfile{0.0, 0.0, 1.0});
      if (p.has("phi0")) cfg.drift.phi.phi0 = read_terms(p.raw("phi0"), "drift.phi.phi0", true);
      p.finish();
    }
    cfg.drift.f_const = r.number("f_const", 0.0);
    cfg.drift.g_const = r.number("g_const", 0.0);
    if (cfg.drift.f_const < 0.0) throw ConfigError("drift.f_const", "must be >= 0");
    if (cfg.drift.g_const < 0.0) throw ConfigError("drift.g_const", "must be >= 0");
    r.finish();
    try {
      cfg.drift.validate();
    } catch (const Error& e) {
      throw ConfigError("drift", e.what());
    }
  }

  if (top.has("noise")) {
    Reader r(top.raw("noise"), "noise");
    cfg.sigma0 = r.number("sigma0", cfg.sigma0);
    if (cfg.sigma0 < 0.0) throw ConfigError("noise.sigma0", "must be >= 0");
    cfg.beta = r.number("beta", cfg.beta);
    cfg.noise_modes = r.unsigned_int("modes", 0);
    if (r.has("mult")) {
      Reader m(r.raw("mult"), "noise.mult");
      const std::string kind = m.string("kind", "constant");
      if (kind == "constant") cfg.mult.kind = Multiplier::Kind::Constant;
      else if (kind == "inverse") cfg.mult.kind = Multiplier::Kind::Inverse;
      else throw ConfigError("noise.mult.kind", "expected constant or inverse");
      cfg.mult.value = m.number("value", 1.0);
      if (cfg.mult.value < 0.0) throw ConfigError("noise.mult.value", "must be >= 0");
      m.finish();
    }
    r.finish();
  }

  if (top.has("stepper")) {
    Reader r(top.raw("stepper"), "stepper");
    auto& s = cfg.stepper;
    s.dt = r.number("dt", s.dt);
    if (!(s.dt > 0.0)) throw ConfigError("stepper.dt", "must be > 0");
    s.T = r.number("T", s.T);
    if (!(s.T >= 0.0)) throw ConfigError("stepper.T", "must be >= 0");
    const double steps = s.T / s.dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
      throw ConfigError("stepper.T", "must be an integer multiple of stepper.dt");
    }
    s.n_modes = r.unsigned_int("n_modes", 0);
    const std::string scheme = r.string("scheme", "explicit");
    if (scheme == "explicit") s.scheme = Scheme::ExplicitEM;
    else if (scheme == "semi_implicit") s.scheme = Scheme::SemiImplicitEM;
    else throw ConfigError("stepper.scheme", "expected explicit or semi_implicit");
    s.implicit_tol = r.number("implicit_tol", s.implicit_tol);
    if (!(s.implicit_tol > 0.0)) throw ConfigError("stepper.implicit_tol", "must be > 0");
    s.implicit_max_iter = static_cast<int>(r.unsigned_int("implicit_max_iter", 100));
    if (s.implicit_max_iter < 1) throw ConfigError("stepper.implicit_max_iter", "must be >= 1");
    s.record_ito = r.boolean("record_ito", false);
    s.brownian_dt = r.number("brownian_dt", 0.0);
    if (s.brownian_dt < 0.0) throw ConfigError("stepper.brownian_dt", "must be >= 0");
    r.finish();
  }
  if (cfg.stepper.n_modes > cfg.n_grid) throw ConfigError("stepper.n_modes", "exceeds domain.n_grid");
  if (cfg.stepper.scheme == Scheme::SemiImplicitEM && cfg.alpha != 1.0) {
    throw ConfigError("stepper.scheme", "semi_implicit requires domain.alpha = 1");
  }

  if (top.has("run")) {
    Reader r(top.raw("run"), "run");
    cfg.ensemble_size = r.unsigned_int("ensemble_size", cfg.ensemble_size);
    if (cfg.ensemble_size < 1) throw ConfigError("run.ensemble_size", "must be >= 1");
    if (r.has("master_seed")) cfg.master_seed = r.unsigned_int("master_seed", 0);
    cfg.stepper.save_every = r.unsigned_int("save_every", 1);
    if (cfg.stepper.save_every < 1) throw ConfigError("run.save_every", "must be >= 1");
    cfg.threads = static_cast<unsigned>(r.unsigned_int("threads", 0));
    r.finish();
  }

  if (top.has("initial")) cfg.initial = read_initial(top.raw("initial"), "initial");
  if (top.has("initial_y")) cfg.initial_y = read_initial(top.raw("initial_y"), "initial_y");
  if (cfg.initial.shape == InitialCondition::Shape::Mode && cfg.initial.k > cfg.n_grid) {
    throw ConfigError("initial.k", "exceeds domain.n_grid");
  }
  if (cfg.initial_y && cfg.initial_y->shape == InitialCondition::Shape::Mode &&
      cfg.initial_y->k > cfg.n_grid) {
    throw ConfigError("initial_y.k", "exceeds domain.n_grid");
  }

  if (top.has("test")) {
    Reader r(top.raw("test"), "test");
    auto& t = cfg.test;
    t.eps = r.number("eps", t.eps);
    if (!(t.eps > 0.0)) throw ConfigError("test.eps", "must be > 0");
    t.expect = r.string("expect", t.expect);
    if (t.expect != "extinct" && t.expect != "persist") {
      throw ConfigError("test.expect", "expected extinct or persist");
    }
    t.times = r.numbers("times", t.times);
    t.dts = r.numbers("dts", t.dts);
    for (double dt : t.dts) {
      if (!(dt > 0.0)) throw ConfigError("test.dts", "entries must be > 0");
    }
    t.min_order = r.number("min_order", t.min_order);
    t.h_samples = r.unsigned_int("h_samples", t.h_samples);
    t.c2_scale = r.number("c2_scale", t.c2_scale);
    r.finish();
  }
  top.finish();

  const std::size_t galerkin = cfg.stepper.n_modes == 0 ? cfg.n_grid : cfg.stepper.n_modes;
  if (cfg.noise_modes > cfg.n_grid) throw ConfigError("noise.modes", "exceeds domain.n_grid");
  if (cfg.noise_modes == 0) cfg.noise_modes = galerkin;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("--config", "cannot read " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config(os.str());
}

DomainPtr make_domain(const ExperimentConfig& cfg) {
  return SpectralDomain::create(cfg.n_grid, cfg.alpha, cfg.finite_measure);
}

NoiseSpec make_noise(const ExperimentConfig& cfg) {
  return NoiseSpec::decay(cfg.noise_modes, cfg.sigma0, cfg.beta, cfg.mult);
}

Field make_initial(const DomainPtr& dom, const InitialCondition& ic) {
  const std::size_t n = dom->n_grid();
  switch (ic.shape) {
    case InitialCondition::Shape::Zero:
      return Field::zero(dom);
    case InitialCondition::Shape::Mode:
      return Field::mode(dom, ic.k - 1, ic.amplitude);
    case InitialCondition::Shape::Random:
      return random_field(dom, rng::derive_key(ic.seed, 0x1c), ic.gamma, ic.amplitude);
    case InitialCondition::Shape::Bump:
      break;
  }
  std::vector<double> v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = (dom->x(i) - ic.center) / ic.width;
    if (std::abs(y) < 1.0) v[i] = ic.amplitude * std::exp(1.0 - 1.0 / (1.0 - y * y));
  }
  return Field::from_values(dom, std::move(v));
}

}  // namespace spme
