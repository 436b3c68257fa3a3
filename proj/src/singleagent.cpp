#include "screening/singleagent.hpp"

#include <cmath>

namespace screening {

SingleAgent::SingleAgent(const Monopoly& mono) : mono_(mono) {}

Real SingleAgent::net_marginal_inverse(Real level) const {
  const auto& prim = mono_.primitives();
  const auto& g = prim.utility();
  const auto& c = prim.cost();
  if (g.is_linear()) return level > 0.0 ? c.derivative_inverse(level) : 0.0;
  // c' - g' increases from -inf (Inada) to +inf, so the root is interior.
  auto net = [&](Real q) { return level - (c.derivative(q) - g.derivative(q)); };
  const Real lo = shrink_lower_bracket(net, 1.0);
  return find_root(net, expand_upper_bracket(net, lo), 1e-13);
}

Real SingleAgent::mr_allocation(Real theta) const {
  return net_marginal_inverse(mono_.primitives().virtual_value_extended(theta));
}

Real SingleAgent::expost_efficient(Real theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("expost_efficient: type outside [0,1]");
  return net_marginal_inverse(theta);
}

Real SingleAgent::expost_profit(Real q, Real theta) const {
  const auto& prim = mono_.primitives();
  return prim.utility().value(q) + prim.virtual_value_extended(theta) * q - prim.cost().value(q);
}

Real SingleAgent::profit_separable(Real theta) const { return expost_profit(mr_allocation(theta), theta); }

Real SingleAgent::profit_monopoly(Real theta) const {
  const auto& c = mono_.primitives().cost();
  const Real q = mono_.monopoly_allocation(theta);
  return expost_profit(q, theta) + c.value(q) - c.value(mono_.cap());
}

AllocationRule SingleAgent::mr_rule() const {
  AllocationRule rule;
  rule.kind = AllocationKind::MRSeparable;
  const SingleAgent self = *this;
  rule.evaluate = [self](Real t) { return self.mr_allocation(t); };
  rule.floor = mr_allocation(0.0);
  rule.cap = mr_allocation(1.0);
  const auto& prim = mono_.primitives();
  if (prim.utility().is_linear()) {
    rule.marginal_type = prim.virtual_value_root();
    rule.breakpoints = {rule.marginal_type};
  }
  return rule;
}

AllocationRule SingleAgent::expost_rule() const {
  AllocationRule rule;
  rule.kind = AllocationKind::ExPostEfficient;
  const SingleAgent self = *this;
  rule.evaluate = [self](Real t) { return self.expost_efficient(t); };
  rule.floor = expost_efficient(0.0);
  rule.cap = expost_efficient(1.0);
  return rule;
}

Real consumer_surplus(const ModelPrimitives& prim, const AllocationRule& rule) {
  const auto& dist = prim.distribution();
  auto integrand = [&](Real t) { return rule(t) * dist.survival(t); };
  return integrate(integrand, 0.0, 1.0, rule.breakpoints, 1e-11);
}

ComparisonReport compare_single_agent(const SingleAgent& sa, int grid) {
  ComparisonReport rep;
  const auto& mono = sa.monopoly();
  const auto& prim = mono.primitives();
  rep.min_profit_gap = std::numeric_limits<Real>::infinity();
  for (int i = 0; i < grid; ++i) {
    const Real t = static_cast<Real>(i) / (grid - 1);
    rep.thetas.push_back(t);
    rep.profit_separable.push_back(sa.profit_separable(t));
    rep.profit_monopoly.push_back(sa.profit_monopoly(t));
    rep.min_profit_gap = std::min(rep.min_profit_gap, rep.profit_separable.back() - rep.profit_monopoly.back());
  }
  rep.surplus_monopoly = consumer_surplus(prim, mono.allocation_rule());
  rep.surplus_separable = consumer_surplus(prim, sa.mr_rule());
  rep.surplus_gap = rep.surplus_monopoly - rep.surplus_separable;

  auto diff = [&](Real t) { return mono.monopoly_allocation(t) - sa.mr_allocation(t); };
  const Real d0 = diff(0.0);
  const Real d1 = diff(1.0);
  if (d0 > 0.0 && d1 < 0.0) rep.crossing_type = find_root(diff, Bracket<Real>{0.0, 1.0, d0, d1}, 1e-12);
  return rep;
}

SurplusFlipReport surplus_flip_experiment(const std::vector<Real>& kappa_g) {
  SurplusFlipReport rep;
  for (Real kg : kappa_g) {
    Monopoly m({TypeDistribution::uniform(), QualityUtility::sqrt_scaled(kg), CostFunction::power(0.5, 2.0)});
    SingleAgent sa(m);
    const auto& prim = m.primitives();
    const Real gap = consumer_surplus(prim, m.allocation_rule()) - consumer_surplus(prim, sa.mr_rule());
    rep.rows.push_back({kg, gap});
  }
  if (!rep.rows.empty()) {
    rep.negative_at_start = rep.rows.front().gap < 0.0;
    rep.positive_at_end = rep.rows.back().gap > 0.0;
    rep.nondecreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
      if (rep.rows[i].gap < rep.rows[i - 1].gap) rep.nondecreasing = false;
  }
  return rep;
}

}  // namespace screening
