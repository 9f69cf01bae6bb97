#pragma once

// Young functions, their Legendre duals, Delta_2 regularity and Luxemburg
// norms on discrete measure spaces.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace spme::orlicz {

/// One term c·|s|^p of a power-sum Young function.
struct PowerTerm {
  double coeff;
  double exponent;
};

/// Quadrature weights of a discretized measure space.
///
/// The grid always carries finite total mass; `finite_mass` is the boolean
/// that switches the 1_{m(E)<inf} terms of the Orlicz estimates on or off.
class DiscreteMeasure {
 public:
  explicit DiscreteMeasure(std::vector<double> weights, bool finite_mass = true);

  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  bool finite_mass() const noexcept { return finite_mass_; }
  double total_mass() const;

  /// m(f) = sum_i w_i f_i.
  double integrate(std::span<const double> f) const;

  /// m(f g).
  double integrate_product(std::span<const double> f,
                           std::span<const double> g) const;

 private:
  std::vector<double> weights_;
  bool finite_mass_;
};

/// Even convex N with N(0)=0, superlinear at infinity and sublinear at zero.
///
/// Four representations are supported: a power sum sum_i c_i |s|^{p_i}
/// (p_i > 1), the logarithmic family |s|^theta log(1+|s|)^r, a monotone
/// cubic table on [0, s_max], and the Legendre dual of another Young
/// function. The dual uses a closed form when the base is a single power and
/// a one dimensional maximisation otherwise.
class YoungFunction {
 public:
  enum class Kind { PowerSum, LogPower, NumericTable, Dual };

  static YoungFunction power_sum(std::vector<PowerTerm> terms);
  static YoungFunction power(double coeff, double exponent);
  /// coeff·|s|^theta log(1+|s|)^r.
  static YoungFunction log_power(double theta, double r, double coeff = 1.0);
  /// Table of N on a strictly increasing grid starting at s=0 with N(0)=0.
  /// Evaluation beyond the last node raises RangeError.
  static YoungFunction table(std::vector<double> s, std::vector<double> values);

  Kind kind() const noexcept;
  std::string describe() const;

  double operator()(double s) const;

  /// N*(s) = sup_{r>=0} (r|s| - N(r)) as a Young function in its own right.
  YoungFunction dual() const;

  /// Largest |s| accepted by operator(), if bounded.
  std::optional<double> domain_limit() const;

  /// Terms of a PowerSum, empty otherwise.
  std::span<const PowerTerm> terms() const noexcept;

  /// The single term when this is a one-term power sum.
  std::optional<PowerTerm> single_power() const;

  /// For the Dual kind: the function it was derived from.
  const YoungFunction* dual_base() const noexcept;

 private:
  struct PowerSumRep {
    std::vector<PowerTerm> terms;
  };
  struct LogPowerRep {
    double theta;
    double r;
    double coeff;
  };
  struct TableRep;
  struct DualRep {
    std::shared_ptr<const YoungFunction> base;
    std::optional<PowerTerm> closed_form;
  };
  using Rep = std::variant<PowerSumRep, LogPowerRep, std::shared_ptr<const TableRep>,
                           DualRep>;

  explicit YoungFunction(Rep rep) : rep_(std::move(rep)) {}

  Rep rep_;
};

/// Closed-form dual of c|s|^p: c*|s|^{p/(p-1)} with
/// c* = (p-1) c (c p)^{-p/(p-1)}.
PowerTerm power_dual(PowerTerm term);

/// N*(s), closed form when available.
double dual_eval(const YoungFunction& n, double s);

/// N*(s) by bracketing the maximiser of r|s| - N(r) and a Brent search,
/// regardless of any closed form. Throws ValidationError when the maximiser
/// cannot be bracketed (N not superlinear).
double dual_eval_numeric(const YoungFunction& n, double s);

struct Delta2Info {
  double constant;  ///< C with N(2s) <= C (N(s) + 1_finite)
  double exponent;  ///< q > 2 with N(rs) <= r^q (N(s) + 2·1_finite), r >= 2
};

/// Delta_2 constant and growth exponent q = 2 log2(C), certified on the
/// sample grid r in [2, 2^10], s in [1e-3, 1e3]. Throws Delta2Violation when
/// the ratio N(2s)/(N(s)+1) keeps growing across the top decade of the grid
/// or the polynomial bound fails at a sample.
Delta2Info delta2_exponent(const YoungFunction& n, bool finite_mass = true);

/// Outcome of sampling the Young-function axioms on a log grid.
struct YoungCheck {
  bool ok = true;
  std::string failure;
};

/// N(0)=0, evenness, strict monotonicity and convexity on [0, inf), and the
/// growth of N(s)/s from ~0 to large across the grid.
YoungCheck check_young_invariants(const YoungFunction& n, double s_lo = 1e-4,
                                  double s_hi = 1e4, std::size_t points = 161);

/// Modular m(N(f)).
double modular(std::span<const double> f, const YoungFunction& n,
               const DiscreteMeasure& m);

/// ||f||_{L_N} = inf{ lambda >= 0 : m(N(f/lambda)) <= 1 }, bisection to
/// relative tolerance 1e-10; the returned lambda satisfies the unit-ball
/// criterion.
double luxemburg_norm(std::span<const double> f, const YoungFunction& n,
                      const DiscreteMeasure& m);

struct HolderPair {
  double lhs;    ///< m(|f g|)
  double bound;  ///< 2 ||f||_N ||g||_{N*}
};

/// Orlicz-Hoelder inequality; throws std::logic_error if lhs exceeds bound.
HolderPair orlicz_holder(std::span<const double> f, std::span<const double> g,
                         const YoungFunction& n, const DiscreteMeasure& m);

}  // namespace spme::orlicz
