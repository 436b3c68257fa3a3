#pragma once

#include <optional>
#include <vector>

#include "screening/monopoly.hpp"

namespace screening {

/// Separable-cost benchmark: each unit is produced at cost c(q) per buyer.
class SingleAgent {
 public:
  explicit SingleAgent(const Monopoly& mono);

  /// Pointwise virtual-surplus maximiser with separable costs.
  Real mr_allocation(Real theta) const;
  Real expost_efficient(Real theta) const;
  Real expost_profit(Real q, Real theta) const;
  /// Per-type profit under the separable allocation.
  Real profit_separable(Real theta) const;
  /// Per-type profit under the damaging monopolist (cap cost spread per type).
  Real profit_monopoly(Real theta) const;

  AllocationRule mr_rule() const;
  AllocationRule expost_rule() const;

  const Monopoly& monopoly() const { return mono_; }

 private:
  /// The q >= 0 with c'(q) - g'(q) = level, or 0 if none is positive.
  Real net_marginal_inverse(Real level) const;

  Monopoly mono_;
};

/// Integral of q(theta)(1 - F(theta)) over the types.
Real consumer_surplus(const ModelPrimitives& prim, const AllocationRule& rule);

struct ComparisonReport {
  std::optional<Real> crossing_type;
  std::vector<Real> thetas;
  std::vector<Real> profit_separable;
  std::vector<Real> profit_monopoly;
  Real surplus_separable = 0.0;
  Real surplus_monopoly = 0.0;
  Real surplus_gap = 0.0;  // monopoly minus separable
  Real min_profit_gap = 0.0;
};

ComparisonReport compare_single_agent(const SingleAgent& sa, int grid = 201);

struct SurplusFlipRow {
  Real kappa_g;
  Real gap;
};

struct SurplusFlipReport {
  std::vector<SurplusFlipRow> rows;
  bool negative_at_start = false;
  bool positive_at_end = false;
  bool nondecreasing = false;
};

/// Uniform types, c = q^2/2, g = kappa_g sqrt(q): sign of S(monopoly) - S(separable).
SurplusFlipReport surplus_flip_experiment(const std::vector<Real>& kappa_g);

}  // namespace screening
