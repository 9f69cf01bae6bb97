#include "spme/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

// Boost 1.74 pchip calls isnan unqualified.
using std::isnan;

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "spme/errors.hpp"

namespace spme::orlicz {

// ---------------------------------------------------------------------------
// DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(std::vector<double> weights, bool finite_mass)
    : weights_(std::move(weights)), finite_mass_(finite_mass) {
  if (weights_.empty()) throw ValidationError("DiscreteMeasure: no weights");
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ValidationError("DiscreteMeasure: weights must be finite and > 0");
    }
  }
}

double DiscreteMeasure::total_mass() const {
  long double acc = 0.0L;
  for (double w : weights_) acc += w;
  return static_cast<double>(acc);
}

double DiscreteMeasure::integrate(std::span<const double> f) const {
  if (f.size() != weights_.size()) {
    throw std::invalid_argument("DiscreteMeasure::integrate: size mismatch");
  }
  long double acc = 0.0L;
  for (std::size_t i = 0; i < f.size(); ++i) {
    acc += static_cast<long double>(weights_[i]) * f[i];
  }
  return static_cast<double>(acc);
}

double DiscreteMeasure::integrate_product(std::span<const double> f,
                                          std::span<const double> g) const {
  if (f.size() != weights_.size() || g.size() != weights_.size()) {
    throw std::invalid_argument("DiscreteMeasure::integrate_product: size mismatch");
  }
  long double acc = 0.0L;
  for (std::size_t i = 0; i < f.size(); ++i) {
    acc += static_cast<long double>(weights_[i]) * f[i] * g[i];
  }
  return static_cast<double>(acc);
}

// ---------------------------------------------------------------------------
// YoungFunction

struct YoungFunction::TableRep {
  double s_max;
  boost::math::interpolators::pchip<std::vector<double>> interp;
};

YoungFunction YoungFunction::power_sum(std::vector<PowerTerm> terms) {
  if (terms.empty()) throw ValidationError("power_sum: no terms");
  for (const auto& t : terms) {
    if (!(t.coeff > 0.0) || !std::isfinite(t.coeff)) {
      throw ValidationError("power_sum: coefficients must be > 0");
    }
    if (!(t.exponent > 1.0) || !std::isfinite(t.exponent)) {
      throw ValidationError("power_sum: exponents must be > 1 (dual degenerate otherwise)");
    }
  }
  return YoungFunction(PowerSumRep{std::move(terms)});
}

YoungFunction YoungFunction::power(double coeff, double exponent) {
  return power_sum({PowerTerm{coeff, exponent}});
}

YoungFunction YoungFunction::log_power(double theta, double r, double coeff) {
  if (!(theta > 1.0) || !(r >= 1.0)) {
    throw ValidationError("log_power: requires theta > 1 and r >= 1");
  }
  if (!(coeff > 0.0)) throw ValidationError("log_power: coefficient must be > 0");
  return YoungFunction(LogPowerRep{theta, r, coeff});
}

YoungFunction YoungFunction::table(std::vector<double> s, std::vector<double> values) {
  if (s.size() != values.size() || s.size() < 4) {
    throw ValidationError("table: need >= 4 matching nodes");
  }
  if (s.front() != 0.0 || values.front() != 0.0) {
    throw ValidationError("table: first node must be (0, 0)");
  }
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1])) throw ValidationError("table: grid must be strictly increasing");
    if (!(values[i] > values[i - 1])) {
      throw ValidationError("table: values must be strictly increasing");
    }
    if (i >= 2) {
      const double left = (values[i - 1] - values[i - 2]) / (s[i - 1] - s[i - 2]);
      const double right = (values[i] - values[i - 1]) / (s[i] - s[i - 1]);
      if (right < left * (1.0 - 1e-12)) throw ValidationError("table: values are not convex");
    }
  }
  const double s_max = s.back();
  auto rep = std::make_shared<const TableRep>(
      TableRep{s_max, boost::math::interpolators::pchip<std::vector<double>>(
                          std::move(s), std::move(values))});
  return YoungFunction(Rep{std::move(rep)});
}

YoungFunction::Kind YoungFunction::kind() const noexcept {
  switch (rep_.index()) {
    case 0: return Kind::PowerSum;
    case 1: return Kind::LogPower;
    case 2: return Kind::NumericTable;
    default: return Kind::Dual;
  }
}

std::string YoungFunction::describe() const {
  std::ostringstream os;
  if (const auto* p = std::get_if<PowerSumRep>(&rep_)) {
    os << "PowerSum{";
    for (std::size_t i = 0; i < p->terms.size(); ++i) {
      if (i) os << " + ";
      os << p->terms[i].coeff << "|s|^" << p->terms[i].exponent;
    }
    os << "}";
  } else if (const auto* l = std::get_if<LogPowerRep>(&rep_)) {
    os << "LogPower{" << l->coeff << ", theta=" << l->theta << ", r=" << l->r << "}";
  } else if (const auto* t = std::get_if<std::shared_ptr<const TableRep>>(&rep_)) {
    os << "NumericTable{s_max=" << (*t)->s_max << "}";
  } else {
    os << "Dual{" << std::get<DualRep>(rep_).base->describe() << "}";
  }
  return os.str();
}

double YoungFunction::operator()(double s) const {
  const double a = std::abs(s);
  if (a == 0.0) return 0.0;
  if (const auto* p = std::get_if<PowerSumRep>(&rep_)) {
    double acc = 0.0;
    for (const auto& t : p->terms) acc += t.coeff * std::pow(a, t.exponent);
    return acc;
  }
  if (const auto* l = std::get_if<LogPowerRep>(&rep_)) {
    return l->coeff * std::pow(a, l->theta) * std::pow(std::log1p(a), l->r);
  }
  if (const auto* t = std::get_if<std::shared_ptr<const TableRep>>(&rep_)) {
    if (a > (*t)->s_max) {
      std::ostringstream os;
      os << "NumericTable: |s|=" << a << " beyond table range " << (*t)->s_max;
      throw RangeError(os.str());
    }
    return std::max(0.0, (*t)->interp(a));
  }
  const auto& d = std::get<DualRep>(rep_);
  if (d.closed_form) return d.closed_form->coeff * std::pow(a, d.closed_form->exponent);
  return dual_eval_numeric(*d.base, a);
}

YoungFunction YoungFunction::dual() const {
  DualRep d{std::make_shared<const YoungFunction>(*this), std::nullopt};
  if (auto single = single_power()) d.closed_form = power_dual(*single);
  return YoungFunction(Rep{std::move(d)});
}

std::optional<double> YoungFunction::domain_limit() const {
  if (const auto* t = std::get_if<std::shared_ptr<const TableRep>>(&rep_)) return (*t)->s_max;
  return std::nullopt;
}

std::span<const PowerTerm> YoungFunction::terms() const noexcept {
  if (const auto* p = std::get_if<PowerSumRep>(&rep_)) return p->terms;
  return {};
}

std::optional<PowerTerm> YoungFunction::single_power() const {
  if (const auto* p = std::get_if<PowerSumRep>(&rep_); p && p->terms.size() == 1) {
    return p->terms.front();
  }
  if (const auto* d = std::get_if<DualRep>(&rep_)) return d->closed_form;
  return std::nullopt;
}

const YoungFunction* YoungFunction::dual_base() const noexcept {
  if (const auto* d = std::get_if<DualRep>(&rep_)) return d->base.get();
  return nullptr;
}

// ---------------------------------------------------------------------------
// Legendre dual

PowerTerm power_dual(PowerTerm term) {
  const double p = term.exponent;
  const double c = term.coeff;
  const double q = p / (p - 1.0);
  return PowerTerm{(p - 1.0) * c * std::pow(c * p, -q), q};
}

double dual_eval(const YoungFunction& n, double s) {
  if (s == 0.0) return 0.0;
  if (auto single = n.single_power()) {
    const PowerTerm d = power_dual(*single);
    return d.coeff * std::pow(std::abs(s), d.exponent);
  }
  return dual_eval_numeric(n, s);
}

double dual_eval_numeric(const YoungFunction& n, double s) {
  const double a = std::abs(s);
  if (a == 0.0) return 0.0;
  const auto limit = n.domain_limit();
  const auto objective = [&](double r) { return r * a - n(r); };
  const auto in_domain = [&](double r) { return !limit || r <= *limit; };

  // The objective is concave; bracket its maximiser in [hi/2, 2hi].
  double hi = 1.0;
  if (limit && hi > *limit) hi = *limit / 2.0;
  int guard = 0;
  while (objective(2.0 * hi) > objective(hi)) {
    hi *= 2.0;
    if (!in_domain(2.0 * hi)) {
      throw RangeError("dual_eval: maximiser lies beyond the table range of " + n.describe());
    }
    if (++guard > 2000 || !std::isfinite(hi)) {
      throw ValidationError("dual_eval: r|s| - N(r) unbounded; N is not superlinear (dual degenerate)");
    }
  }
  guard = 0;
  while (hi > std::numeric_limits<double>::min() && objective(0.5 * hi) >= objective(hi)) {
    hi *= 0.5;
    if (++guard > 2100) break;
  }
  const auto neg = [&](double r) { return -objective(r); };
  const int bits = std::numeric_limits<double>::digits / 2;
  const auto [r_star, value] =
      boost::math::tools::brent_find_minima(neg, 0.5 * hi, 2.0 * hi, bits);
  (void)r_star;
  return std::max(0.0, -value);
}

// ---------------------------------------------------------------------------
// Delta_2

namespace {

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  std::vector<double> g(points);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return g;
}

}  // namespace

Delta2Info delta2_exponent(const YoungFunction& n, bool finite_mass) {
  const double flag = finite_mass ? 1.0 : 0.0;
  const auto limit = n.domain_limit();
  double constant = 0.0;

  const auto terms = n.terms();
  if (!terms.empty()) {
    double p_max = 0.0;
    for (const auto& t : terms) p_max = std::max(p_max, t.exponent);
    constant = std::exp2(p_max);
  } else {
    double s_top = 1e3;
    if (limit) s_top = std::min(s_top, *limit / 2.0);
    if (!(s_top > 1e-2)) throw Delta2Violation("delta2: table range too small to certify");
    const auto grid = log_grid(1e-3, s_top, 121);
    const auto ratio = [&](double s) {
      const double denom = n(s) + flag;
      return denom > 0.0 ? n(2.0 * s) / denom : 0.0;
    };
    for (double s : grid) constant = std::max(constant, ratio(s));
    const double top = ratio(s_top);
    const double decade = ratio(s_top / 10.0);
    if (top > 1.5 * decade) {
      std::ostringstream os;
      os << "delta2: N(2s)/(N(s)+1) grows from " << decade << " to " << top
         << " across the top decade [" << s_top / 10.0 << ", " << s_top << "] for "
         << n.describe();
      throw Delta2Violation(os.str());
    }
  }
  constant = std::max(constant, 2.0 * (1.0 + 1e-9));
  const double q = 2.0 * std::log2(constant);

  const auto s_grid = log_grid(1e-3, 1e3, 61);
  for (int j = 2; j <= 20; ++j) {
    const double r = std::exp2(0.5 * j);
    for (double s : s_grid) {
      if (limit && r * s > *limit) continue;
      const double lhs = n(r * s);
      const double rhs = std::pow(r, q) * (n(s) + 2.0 * flag);
      if (lhs > rhs * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "delta2: N(rs) <= r^q (N(s) + 2) fails at r=" << r << ", s=" << s
           << " (q=" << q << ") for " << n.describe();
        throw Delta2Violation(os.str());
      }
    }
  }
  return Delta2Info{constant, q};
}

YoungCheck check_young_invariants(const YoungFunction& n, double s_lo, double s_hi,
                                  std::size_t points) {
  YoungCheck out;
  const auto fail = [&](const std::string& msg) {
    out.ok = false;
    out.failure = msg;
    return out;
  };
  if (auto limit = n.domain_limit()) s_hi = std::min(s_hi, *limit);
  if (n(0.0) != 0.0) return fail("N(0) != 0");
  const auto grid = log_grid(s_lo, s_hi, points);
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    v[i] = n(grid[i]);
    if (!(v[i] > 0.0)) return fail("N(s) not > 0 at s=" + std::to_string(grid[i]));
    if (n(-grid[i]) != v[i]) return fail("N not even at s=" + std::to_string(grid[i]));
    if (i > 0 && !(v[i] > v[i - 1])) {
      return fail("N not strictly increasing at s=" + std::to_string(grid[i]));
    }
  }
  // Convexity through the origin and along the grid: chord slopes nondecreasing.
  double prev_slope = v[0] / grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double slope = (v[i] - v[i - 1]) / (grid[i] - grid[i - 1]);
    if (slope < prev_slope * (1.0 - 1e-7)) {
      return fail("N not convex near s=" + std::to_string(grid[i]));
    }
    prev_slope = slope;
  }
  const double s_ref = std::sqrt(s_lo * s_hi);
  const double ref = n(s_ref) / s_ref;
  if (!(v.front() / grid.front() < 0.1 * ref)) return fail("N(s)/s does not vanish at 0");
  if (!(v.back() / grid.back() > 10.0 * ref)) return fail("N(s)/s does not blow up at infinity");
  return out;
}

// ---------------------------------------------------------------------------
// Luxemburg norm

double modular(std::span<const double> f, const YoungFunction& n, const DiscreteMeasure& m) {
  if (f.size() != m.size()) throw std::invalid_argument("modular: size mismatch");
  const auto w = m.weights();
  long double acc = 0.0L;
  for (std::size_t i = 0; i < f.size(); ++i) acc += static_cast<long double>(w[i]) * n(f[i]);
  return static_cast<double>(acc);
}

double luxemburg_norm(std::span<const double> f, const YoungFunction& n,
                      const DiscreteMeasure& m) {
  double peak = 0.0;
  for (double x : f) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) return 0.0;

  std::vector<double> scaled(f.size());
  const auto excess = [&](double lambda) {
    for (std::size_t i = 0; i < f.size(); ++i) scaled[i] = f[i] / lambda;
    return modular(scaled, n, m) - 1.0;
  };

  double hi = peak;
  while (excess(hi) > 0.0) hi *= 2.0;
  double lo = hi;
  while (excess(lo) <= 0.0) lo *= 0.5;
  // excess(lo) > 0 >= excess(hi); keep the side inside the unit ball.
  const auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-10 * std::abs(b); };
  const auto [a, b] = boost::math::tools::bisect(excess, lo, hi, tol);
  return excess(a) <= 0.0 ? a : b;
}

HolderPair orlicz_holder(std::span<const double> f, std::span<const double> g,
                         const YoungFunction& n, const DiscreteMeasure& m) {
  if (f.size() != g.size()) throw std::invalid_argument("orlicz_holder: size mismatch");
  std::vector<double> prod(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) prod[i] = std::abs(f[i] * g[i]);
  const double lhs = m.integrate(prod);
  const double nf = luxemburg_norm(f, n, m);
  const double ng = nf == 0.0 ? 0.0 : luxemburg_norm(g, n.dual(), m);
  const HolderPair out{lhs, 2.0 * nf * ng};
  if (out.lhs > out.bound * (1.0 + 1e-9) + 1e-300) {
    throw std::logic_error("orlicz_holder: m(|fg|) exceeds 2 ||f||_N ||g||_N*");
  }
  return out;
}

}  // namespace spme::orlicz
