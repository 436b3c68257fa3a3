#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "screening/primitives.hpp"

namespace screening {

/// A quality level or the tag for "no finite maximiser".
struct Quality {
  Real value = 0.0;
  bool unbounded = false;

  static Quality finite(Real q) { return {q, false}; }
  static Quality infinite() { return {std::numeric_limits<Real>::infinity(), true}; }

  /// min(this, cap) with the unbounded tag acting as +infinity.
  Real capped(Real cap) const { return unbounded ? cap : std::min(value, cap); }
};

enum class AllocationKind { Efficient, MonopolyCapped, NoScreen, Subgame, MRSeparable, ExPostEfficient, Ironed };

/// An incentive-compatible allocation theta -> quality plus the structural
/// data that produced it.
struct AllocationRule {
  AllocationKind kind;
  std::function<Real(Real)> evaluate;
  Real cap = 0.0;
  Real floor = 0.0;
  Real marginal_type = 0.0;         // lowest type at the cap (or the exclusion cutoff)
  std::vector<Real> breakpoints;    // types where the rule has kinks or jumps

  Real operator()(Real theta) const { return evaluate(theta); }
};

struct SellerSolution {
  Real cap = 0.0;
  Real marginally_bunched = 0.0;
  Real revenue_at_cap = 0.0;
  Real cost_at_cap = 0.0;
  Real profit = 0.0;
  bool full_bunching = false;
};

struct TariffPoint {
  Real quality;
  Real price;
  Real increment;
};

/// Root of g'(q) + E[theta] = c'(q).
Real efficient_quality(const ModelPrimitives& prim, Real tol = 1e-12);

/// Efficient benchmark and monopolist for a regular set of primitives.
class Monopoly {
 public:
  /// Requires regular primitives; non-regular ones go through the ironed solver.
  explicit Monopoly(ModelPrimitives primitives, Real root_tol = 1e-12);

  const ModelPrimitives& primitives() const { return prim_; }

  Quality beta_alloc(Real theta) const;
  Real beta_at_zero() const { return beta0_; }
  Real b_inverse(Real q) const;
  Real marginal_revenue(Real q) const;
  /// Exact V(q) by quadrature.
  Real revenue(Real q) const;
  Real efficient_quality() const { return q_star_; }

  /// Throws InvariantViolation if the solved cap is not below q*.
  const SellerSolution& solution() const { return solution_; }
  Real cap() const { return solution_.cap; }
  Real monopoly_allocation(Real theta) const;
  AllocationRule allocation_rule() const;
  AllocationRule efficient_rule() const;

  Real information_rent(const AllocationRule& rule, Real theta) const;
  Real transfer(const AllocationRule& rule, Real theta) const;
  Real transfer(Real theta) const { return transfer(allocation_rule(), theta); }
  TariffPoint tariff(Real q) const;
  std::vector<TariffPoint> tariff_curve(int points) const;
  Real maximize_price_slice(Real q) const;

  /// Integral over [theta,1] of the survival function.
  Real upper_survival_integral(Real theta) const;

 private:
  Real solve_cap() const;

  ModelPrimitives prim_;
  Real root_tol_;
  Real beta0_;
  Real q_star_;
  SellerSolution solution_;
  struct SurvivalTable;
  std::shared_ptr<const SurvivalTable> survival_table_;
};

/// Revenue V and the consumer-surplus kernel K tabulated on a log grid and
/// interpolated by cubic Hermite splines using their known derivatives.
class RevenueTable {
 public:
  RevenueTable(const Monopoly& mono, Real q_max, int points = 2048);
  /// Table on [0, 4 q*], the range every competition quantity lives in.
  explicit RevenueTable(const Monopoly& mono);

  Real revenue(Real q) const;
  /// K(q) = integral over [0,q] of upper_survival_integral(b(s)).
  Real surplus_kernel(Real q) const;
  Real q_max() const { return q_max_; }

  struct Splines;

 private:
  std::shared_ptr<const Monopoly> mono_;
  Real q_min_;
  Real q_max_;
  std::shared_ptr<const Splines> splines_;
};

struct SweepRow {
  Real kappa_c;
  Real kappa_g;
  Real cap;
  Real marginally_bunched;
  bool full_bunching;
};

struct SweepReport {
  std::vector<SweepRow> kappa_c_rows;   // kappa_g held at 1
  std::vector<SweepRow> kappa_g_rows;   // kappa_c held at 1
  bool cap_decreasing_in_kappa_c = true;
  bool cap_nondecreasing_in_kappa_g = true;
  bool bunched_type_nonincreasing_in_kappa_g = true;
};

/// Re-solves the monopolist with cost kappa_c*c and utility kappa_g*g.
SweepReport comparative_sweep(const ModelPrimitives& base, const std::vector<Real>& kappa_c,
                              const std::vector<Real>& kappa_g);

/// Smallest kappa_g (cost scale fixed) at which the monopolist fully bunches.
Real full_bunching_threshold(const ModelPrimitives& base, Real kappa_c = 1.0, Real tol = 1e-9);

}  // namespace screening
