#include "screening/noscreening.hpp"

namespace screening {

NoScreening::NoScreening(const Monopoly& screening, Real root_tol) : mono_(screening), root_tol_(root_tol) {
  const auto& prim = mono_.primitives();
  const auto& c = prim.cost();
  auto excess = [&](Real q) { return marginal_revenue(q) - c.derivative(q); };
  const Real lo = shrink_lower_bracket(excess, 1.0);
  NoScreenSolution s;
  s.cap = find_root(excess, expand_upper_bracket(excess, lo), root_tol_);
  s.cutoff = cutoff(s.cap);
  s.price = prim.utility().value(s.cap) + s.cutoff * s.cap;
  s.profit = prim.distribution().survival(s.cutoff) * s.price - c.value(s.cap);
  solution_ = s;

  const auto& m = mono_.solution();
  if (!prim.utility().is_linear() && m.marginally_bunched > 0.0) {
    if (!(s.cap < m.cap) || !(s.cutoff < m.marginally_bunched))
      throw InvariantViolation("no-screening: cap and cutoff must fall below the screening solution");
  }
}

Real NoScreening::cutoff(Real q) const {
  if (!(q > 0.0)) throw DomainError("cutoff: quality must be positive");
  const auto& prim = mono_.primitives();
  if (prim.utility().is_linear()) return prim.virtual_value_root();
  const Real avg = prim.utility().value(q) / q;
  if (avg >= -prim.virtual_value_extended(0.0)) return 0.0;
  auto foc = [&prim, avg](Real t) { return avg + prim.virtual_value_extended(t); };
  return find_root(foc, Bracket<Real>{0.0, prim.virtual_value_root(), foc(0.0), avg}, 1e-14);
}

PostedRevenue NoScreening::revenue(Real q) const {
  if (!(q > 0.0)) throw DomainError("no-screening revenue: quality must be positive");
  const auto& prim = mono_.primitives();
  const Real g = prim.utility().value(q);
  const auto& dist = prim.distribution();
  auto objective = [&](Real t) { return dist.survival(t) * (g + t * q); };
  auto [arg, val] = grid_maximize(objective, 0.0, 1.0, 1024);
  return {val, arg};
}

Real NoScreening::marginal_revenue(Real q) const {
  const auto& prim = mono_.primitives();
  const Real b = cutoff(q);
  return prim.distribution().survival(b) * (prim.utility().derivative(q) + b);
}

AllocationRule NoScreening::allocation_rule() const {
  AllocationRule rule;
  rule.kind = AllocationKind::NoScreen;
  rule.cap = solution_.cap;
  rule.floor = solution_.cutoff > 0.0 ? 0.0 : solution_.cap;
  rule.marginal_type = solution_.cutoff;
  rule.breakpoints = {solution_.cutoff};
  const Real cap = solution_.cap;
  const Real cut = solution_.cutoff;
  // The marginal type is served, like the bunching boundary.
  rule.evaluate = [cap, cut](Real t) { return t >= cut ? cap : 0.0; };
  return rule;
}

Real NoScreening::transfer(Real theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("no-screening transfer: type outside [0,1]");
  return theta >= solution_.cutoff ? solution_.price : 0.0;
}

}  // namespace screening
