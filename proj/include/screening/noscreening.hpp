#pragma once

#include "screening/monopoly.hpp"

namespace screening {

struct NoScreenSolution {
  Real cap = 0.0;
  Real cutoff = 0.0;
  Real price = 0.0;
  Real profit = 0.0;
};

struct PostedRevenue {
  Real value;
  Real argmax;
};

/// Seller barred from damaging: one posted quality, excluding low types.
class NoScreening {
 public:
  explicit NoScreening(const Monopoly& screening, Real root_tol = 1e-12);

  /// Lowest type buying quality q at the revenue-maximising posted price.
  Real cutoff(Real q) const;
  /// V_N(q) by direct maximisation over the marginal buyer.
  PostedRevenue revenue(Real q) const;
  Real marginal_revenue(Real q) const;

  const NoScreenSolution& solution() const { return solution_; }
  AllocationRule allocation_rule() const;
  Real transfer(Real theta) const;

 private:
  Monopoly mono_;
  Real root_tol_;
  NoScreenSolution solution_;
};

}  // namespace screening
