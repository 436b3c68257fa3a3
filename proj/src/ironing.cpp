#include "screening/ironing.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace screening {

namespace {

// Integrand of H in type space: phi(x) f(x) = x f(x) - S(x).
Real virtual_mass(const TypeDistribution& d, Real x) { return x * d.density(x) - d.survival(x); }

}  // namespace

Eigen::Index QuantileEnvelope::cell_of_type(Real theta) const {
  const Real* begin = types.data();
  const Real* end = begin + types.size();
  const Eigen::Index j = std::upper_bound(begin, end, theta) - begin - 1;
  return std::clamp<Eigen::Index>(j, 0, cells() - 1);
}

QuantileEnvelope build_quantile_envelope(const ModelPrimitives& prim, int cells) {
  if (cells < 2) throw GridError("quantile envelope: need at least two cells");
  const auto& dist = prim.distribution();
  QuantileEnvelope env;
  env.quantiles = linspace<Real>(cells + 1, 0.0, 1.0);
  env.types.resize(cells + 1);
  env.cumulative.resize(cells + 1);
  env.types[0] = 0.0;
  env.types[cells] = 1.0;
  for (int i = 1; i < cells; ++i) env.types[i] = dist.quantile(env.quantiles[i]);
  for (int i = 1; i <= cells; ++i) {
    if (!(env.types[i] > env.types[i - 1])) throw GridError("quantile envelope: quantile grid collapsed");
  }

  env.cumulative[0] = 0.0;
  auto mass = [&dist](Real x) { return virtual_mass(dist, x); };
  for (int i = 1; i <= cells; ++i)
    env.cumulative[i] = env.cumulative[i - 1] + integrate(mass, env.types[i - 1], env.types[i], 1e-13);

  env.hull = lower_convex_envelope(env.quantiles, env.cumulative);

  // A knot strictly above the envelope is pooled, and so are both cells touching it.
  std::vector<bool> lifted(cells + 1, false);
  for (int i = 1; i < cells; ++i) lifted[i] = env.cumulative[i] - env.hull.values[i] > kIroningThreshold;
  env.ironed.assign(cells, false);
  for (int j = 0; j < cells; ++j) env.ironed[j] = lifted[j] || lifted[j + 1];
  for (int i = 1; i < cells;) {
    if (!lifted[i]) {
      ++i;
      continue;
    }
    int k = i;
    while (k + 1 < cells && lifted[k + 1]) ++k;
    env.ironed_quantiles.push_back({env.quantiles[i - 1], env.quantiles[k + 1]});
    i = k + 1;
  }
  return env;
}

IronedMonopoly::IronedMonopoly(ModelPrimitives prim, int initial_cells, Real cap_tol, int max_cells)
    : prim_(std::move(prim)), q_star_(screening::efficient_quality(prim_)) {
  int cells = initial_cells;
  env_ = build_quantile_envelope(prim_, cells);
  Real cap = solve_cap();
  bool converged = false;
  while (cells * 2 <= max_cells) {
    cells *= 2;
    QuantileEnvelope finer = build_quantile_envelope(prim_, cells);
    std::swap(env_, finer);
    const Real next = solve_cap();
    const bool settled = std::abs(next - cap) < cap_tol;
    cap = next;
    if (settled) {
      converged = true;
      break;
    }
  }
  solution_.cap = cap;
  solution_.grid_cells = cells;
  solution_.grid_converged = converged;
  finalize();
}

Real IronedMonopoly::cumulative_virtual(Real t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("cumulative_virtual: quantile outside [0,1]");
  const Eigen::Index j = env_.hull.cell_of(t);
  if (t == env_.quantiles[j]) return env_.cumulative[j];
  if (t == 1.0) return env_.cumulative[env_.cells()];
  const auto& dist = prim_.distribution();
  auto mass = [&dist](Real x) { return virtual_mass(dist, x); };
  return env_.cumulative[j] + integrate(mass, env_.types[j], dist.quantile(t), 1e-13);
}

Real IronedMonopoly::envelope_value(Real t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("envelope_value: quantile outside [0,1]");
  return env_.hull.value_at(t);
}

Real IronedMonopoly::ironed_phi(Real theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("ironed_phi: type outside [0,1]");
  return env_.hull.right_slope(prim_.distribution().cdf(theta));
}

Real IronedMonopoly::allocation_phi(Real theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("allocation_phi: type outside [0,1]");
  const Eigen::Index j = env_.cell_of_type(theta);
  const auto& s = env_.hull.slopes;
  if (env_.ironed[j]) return s[j];
  const Real lo = j > 0 ? s[j - 1] : -std::numeric_limits<Real>::infinity();
  const Real hi = j + 1 < env_.cells() ? s[j + 1] : std::numeric_limits<Real>::infinity();
  return std::clamp(prim_.virtual_value_extended(theta), lo, hi);
}

Quality IronedMonopoly::beta(Real theta) const {
  const Real phi = allocation_phi(theta);
  const auto& g = prim_.utility();
  if (phi >= 0.0) return Quality::infinite();
  if (g.is_linear()) return Quality::finite(0.0);
  return Quality::finite(g.derivative_inverse(-phi));
}

Real IronedMonopoly::allocation(Real theta) const { return beta(theta).capped(solution_.cap); }

Real IronedMonopoly::boundary_quantile(Real q) const {
  if (!(q > 0.0)) throw DomainError("boundary_quantile: quality must be positive");
  const Real target = -prim_.utility().derivative(q);
  const auto& s = env_.hull.slopes;
  const Eigen::Index n = env_.cells();
  // Cells before j-1 stay below target and cells after j+1 stay above it.
  const Eigen::Index j = std::lower_bound(s.data(), s.data() + n, target) - s.data();
  if (j >= n && allocation_phi(1.0) < target) return 1.0;
  const Real lo = env_.types[std::max<Eigen::Index>(j - 1, 0)];
  const Real hi = env_.types[std::min<Eigen::Index>(j + 1, n)];
  auto gap = [&](Real t) { return allocation_phi(t) - target; };
  const Real g_lo = gap(lo);
  if (g_lo >= 0.0) return prim_.distribution().cdf(lo);
  const Real g_hi = gap(hi);
  if (g_hi < 0.0) return prim_.distribution().cdf(hi);
  const Real theta = find_root(gap, Bracket<Real>{lo, hi, g_lo, g_hi}, 1e-15);
  return prim_.distribution().cdf(theta);
}

Real IronedMonopoly::marginal_revenue_left(Real q) const {
  const Real tau = boundary_quantile(q);
  const Eigen::Index j = env_.hull.cell_of(tau);
  const Real total = env_.cumulative[env_.cells()];
  // Off the pooled cells conv H coincides with H, so use the exact partial sum.
  const Real below = env_.ironed[j] ? env_.hull.value_at(tau) : cumulative_virtual(tau);
  return (1.0 - tau) * prim_.utility().derivative(q) + total - below;
}

Real IronedMonopoly::solve_cap() const {
  const auto& c = prim_.cost();
  auto excess = [&](Real q) { return marginal_revenue_left(q) - c.derivative(q); };
  const Real lo = shrink_lower_bracket(excess, 1.0);
  return find_root(excess, expand_upper_bracket(excess, lo), 1e-13);
}

void IronedMonopoly::finalize() {
  IronedSolution& s = solution_;
  const auto& dist = prim_.distribution();
  s.marginal_quantile = boundary_quantile(s.cap);
  s.marginally_bunched = dist.quantile(s.marginal_quantile);
  s.full_bunching = s.marginal_quantile == 0.0;
  s.ironed_quantiles = env_.ironed_quantiles;
  for (const auto& iv : env_.ironed_quantiles)
    s.ironed_types.push_back({dist.quantile(iv.lo), dist.quantile(iv.hi)});

  const auto& g = prim_.utility();
  auto virtual_surplus = [&](Real t) {
    const Real q = allocation(t);
    return (g.value(q) + allocation_phi(t) * q) * dist.density(t);
  };
  std::vector<Real> breaks(env_.types.data() + 1, env_.types.data() + env_.cells());
  breaks.push_back(s.marginally_bunched);
  std::sort(breaks.begin(), breaks.end());
  s.revenue = integrate(virtual_surplus, 0.0, 1.0, breaks, 1e-10);
  s.profit = s.revenue - prim_.cost().value(s.cap);

  if (!(s.cap < q_star_)) throw InvariantViolation("ironing: cap is not below the efficient quality");
}

AllocationRule IronedMonopoly::allocation_rule() const {
  AllocationRule rule;
  rule.kind = AllocationKind::Ironed;
  rule.cap = solution_.cap;
  rule.floor = allocation(0.0);
  rule.marginal_type = solution_.marginally_bunched;
  rule.breakpoints = {solution_.marginally_bunched};
  for (const auto& iv : solution_.ironed_types) {
    rule.breakpoints.push_back(iv.lo);
    rule.breakpoints.push_back(iv.hi);
  }
  std::sort(rule.breakpoints.begin(), rule.breakpoints.end());
  auto self = std::make_shared<const IronedMonopoly>(*this);
  rule.evaluate = [self](Real t) { return self->allocation(t); };
  return rule;
}

}  // namespace screening
