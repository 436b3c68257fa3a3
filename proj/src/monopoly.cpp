#include "screening/monopoly.hpp"

#include <cmath>

#include <boost/math/interpolators/cubic_hermite.hpp>

namespace screening {

namespace {

using Hermite = boost::math::interpolators::cubic_hermite<std::vector<Real>>;

}  // namespace

// Upper integral of the survival function on a uniform type grid.
struct Monopoly::SurvivalTable {
  std::shared_ptr<Hermite> spline;
};

Real efficient_quality(const ModelPrimitives& prim, Real tol) {
  const auto& g = prim.utility();
  const auto& c = prim.cost();
  const Real mean = prim.mean_type();
  auto excess = [&](Real q) { return g.derivative(q) + mean - c.derivative(q); };
  const Real lo = shrink_lower_bracket(excess, 1.0);
  return find_root(excess, expand_upper_bracket(excess, lo), tol);
}

Monopoly::Monopoly(ModelPrimitives primitives, Real root_tol)
    : prim_(std::move(primitives)), root_tol_(root_tol) {
  if (!prim_.regular())
    throw DomainError("monopoly: virtual value is not monotone; use the ironed solver");

  const auto& dist = prim_.distribution();
  const int cells = 1024;
  std::vector<Real> x(cells + 1);
  std::vector<Real> y(cells + 1);
  std::vector<Real> dy(cells + 1);
  for (int i = 0; i <= cells; ++i) {
    x[i] = static_cast<Real>(i) / cells;
    dy[i] = -dist.survival(x[i]);
  }
  y[cells] = 0.0;
  auto surv = [&dist](Real t) { return dist.survival(t); };
  for (int i = cells - 1; i >= 0; --i) y[i] = y[i + 1] + integrate(surv, x[i], x[i + 1], 1e-13);
  auto table = std::make_shared<SurvivalTable>();
  table->spline = std::make_shared<Hermite>(std::move(x), std::move(y), std::move(dy));
  survival_table_ = table;

  beta0_ = beta_alloc(0.0).value;
  q_star_ = screening::efficient_quality(prim_, root_tol_);

  SellerSolution s;
  s.cap = solve_cap();
  s.marginally_bunched = b_inverse(s.cap);
  s.revenue_at_cap = revenue(s.cap);
  s.cost_at_cap = prim_.cost().value(s.cap);
  s.profit = s.revenue_at_cap - s.cost_at_cap;
  s.full_bunching = s.marginally_bunched == 0.0;
  solution_ = s;
  if (!(s.cap < q_star_)) throw InvariantViolation("monopoly: cap is not below the efficient quality");
}

Quality Monopoly::beta_alloc(Real theta) const {
  const Real phi = prim_.virtual_value_extended(theta);
  if (phi >= 0.0) return Quality::infinite();
  if (prim_.utility().is_linear()) return Quality::finite(0.0);
  return Quality::finite(prim_.utility().derivative_inverse(-phi));
}

Real Monopoly::b_inverse(Real q) const {
  if (q < 0.0) throw DomainError("b_inverse: negative quality");
  if (q == 0.0) return 0.0;
  if (prim_.utility().is_linear()) return prim_.virtual_value_root();
  const Real slope = prim_.utility().derivative(q);
  if (slope >= -prim_.virtual_value_extended(0.0)) return 0.0;
  auto foc = [this, slope](Real t) { return slope + prim_.virtual_value_extended(t); };
  const Real hi = prim_.virtual_value_root();
  return find_root(foc, Bracket<Real>{0.0, hi, foc(0.0), slope}, 1e-14);
}

Real Monopoly::marginal_revenue(Real q) const {
  if (!(q > 0.0)) throw DomainError("marginal_revenue: quality must be positive");
  const Real b = b_inverse(q);
  return prim_.distribution().survival(b) * (prim_.utility().derivative(q) + b);
}

Real Monopoly::revenue(Real q) const {
  if (q < 0.0) throw DomainError("revenue: negative quality");
  if (q == 0.0) return 0.0;
  // Below beta(0) nobody is damaged and V = g.
  const Real bunched = std::min(q, beta0_);
  Real v = prim_.utility().value(bunched);
  if (q > beta0_) v += integrate([this](Real s) { return marginal_revenue(s); }, beta0_, q, 1e-12);
  return v;
}

Real Monopoly::solve_cap() const {
  const auto& c = prim_.cost();
  auto excess = [&](Real q) { return marginal_revenue(q) - c.derivative(q); };
  const Real lo = shrink_lower_bracket(excess, 1.0);
  return find_root(excess, expand_upper_bracket(excess, lo), root_tol_);
}

Real Monopoly::monopoly_allocation(Real theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("monopoly_allocation: type outside [0,1]");
  if (theta >= solution_.marginally_bunched) return solution_.cap;
  return beta_alloc(theta).capped(solution_.cap);
}

AllocationRule Monopoly::allocation_rule() const {
  AllocationRule rule;
  rule.kind = AllocationKind::MonopolyCapped;
  rule.cap = solution_.cap;
  rule.floor = monopoly_allocation(0.0);
  rule.marginal_type = solution_.marginally_bunched;
  rule.breakpoints = {solution_.marginally_bunched};
  const Monopoly self = *this;
  rule.evaluate = [self](Real t) { return self.monopoly_allocation(t); };
  return rule;
}

AllocationRule Monopoly::efficient_rule() const {
  AllocationRule rule;
  rule.kind = AllocationKind::Efficient;
  rule.cap = q_star_;
  rule.floor = q_star_;
  const Real q = q_star_;
  rule.evaluate = [q](Real) { return q; };
  return rule;
}

Real Monopoly::information_rent(const AllocationRule& rule, Real theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("information_rent: type outside [0,1]");
  return integrate(rule.evaluate, 0.0, theta, rule.breakpoints, 1e-12);
}

Real Monopoly::transfer(const AllocationRule& rule, Real theta) const {
  const Real q = rule(theta);
  return prim_.utility().value(q) + theta * q - information_rent(rule, theta);
}

TariffPoint Monopoly::tariff(Real q) const {
  if (!(q > beta0_) || q > solution_.cap * (1.0 + 1e-12))
    throw DomainError("tariff: quality outside (beta(0), cap]");
  const Real b = b_inverse(q);
  return {q, transfer(b), prim_.utility().derivative(q) + b};
}

std::vector<TariffPoint> Monopoly::tariff_curve(int points) const {
  std::vector<TariffPoint> out;
  const Real cap = solution_.cap;
  if (solution_.full_bunching) {
    // A single pooled contract; the increment is the bunching-branch limit.
    out.push_back({cap, transfer(1.0), prim_.utility().derivative(cap)});
    return out;
  }
  for (int i = 1; i <= points; ++i) out.push_back(tariff(beta0_ + (cap - beta0_) * i / points));
  return out;
}

Real Monopoly::maximize_price_slice(Real q) const {
  if (q <= 0.0) return 0.0;
  const Real slope = prim_.utility().derivative(q);
  const auto& dist = prim_.distribution();
  auto objective = [&](Real t) { return dist.survival(t) * (t + slope); };
  return grid_maximize(objective, 0.0, 1.0, 1024).first;
}

Real Monopoly::upper_survival_integral(Real theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("upper_survival_integral: type outside [0,1]");
  return (*survival_table_->spline)(theta);
}

struct RevenueTable::Splines {
  std::shared_ptr<Hermite> revenue;
  std::shared_ptr<Hermite> kernel;
};

RevenueTable::RevenueTable(const Monopoly& mono) : RevenueTable(mono, 4.0 * mono.efficient_quality()) {}

RevenueTable::RevenueTable(const Monopoly& mono, Real q_max, int points)
    : mono_(std::make_shared<const Monopoly>(mono)), q_min_(q_max * 1e-9), q_max_(q_max) {
  if (points < 16) throw GridError("revenue table: need at least 16 points");
  const Monopoly& m = *mono_;
  const Real beta0 = m.beta_at_zero();
  std::vector<Real> q(points);
  const Real log_lo = std::log(q_min_);
  const Real log_hi = std::log(q_max_);
  for (int i = 0; i < points; ++i) q[i] = std::exp(log_lo + (log_hi - log_lo) * i / (points - 1));
  q.front() = q_min_;
  q.back() = q_max_;

  auto kernel_slope = [&m](Real s) { return m.upper_survival_integral(m.b_inverse(s)); };
  auto mr = [&m](Real s) { return m.marginal_revenue(s); };
  std::vector<Real> v(points);
  std::vector<Real> dv(points);
  std::vector<Real> k(points);
  std::vector<Real> dk(points);
  v[0] = m.revenue(q[0]);
  k[0] = q[0] * kernel_slope(q[0]);
  for (int i = 0; i < points; ++i) {
    dv[i] = mr(q[i]);
    dk[i] = kernel_slope(q[i]);
    if (i == 0) continue;
    const std::vector<Real> brk{beta0};
    v[i] = v[i - 1] + integrate(mr, q[i - 1], q[i], brk, 1e-13);
    k[i] = k[i - 1] + integrate(kernel_slope, q[i - 1], q[i], brk, 1e-13);
  }
  auto s = std::make_shared<Splines>();
  std::vector<Real> q2 = q;
  s->revenue = std::make_shared<Hermite>(std::move(q), std::move(v), std::move(dv));
  s->kernel = std::make_shared<Hermite>(std::move(q2), std::move(k), std::move(dk));
  splines_ = s;
}

Real RevenueTable::revenue(Real q) const {
  if (!(q >= 0.0 && q <= q_max_)) throw DomainError("revenue table: quality outside the table");
  if (q < q_min_) return mono_->revenue(q);
  return (*splines_->revenue)(q);
}

Real RevenueTable::surplus_kernel(Real q) const {
  if (!(q >= 0.0 && q <= q_max_)) throw DomainError("revenue table: quality outside the table");
  if (q < q_min_) return q * mono_->upper_survival_integral(mono_->b_inverse(q));
  return (*splines_->kernel)(q);
}

SweepReport comparative_sweep(const ModelPrimitives& base, const std::vector<Real>& kappa_c,
                              const std::vector<Real>& kappa_g) {
  SweepReport report;
  for (Real kc : kappa_c) {
    Monopoly m(base.with_cost(base.cost().scaled(kc)));
    const auto& s = m.solution();
    report.kappa_c_rows.push_back({kc, 1.0, s.cap, s.marginally_bunched, s.full_bunching});
  }
  for (Real kg : kappa_g) {
    Monopoly m(base.with_utility(base.utility().scaled(kg)));
    const auto& s = m.solution();
    report.kappa_g_rows.push_back({1.0, kg, s.cap, s.marginally_bunched, s.full_bunching});
  }
  for (std::size_t i = 1; i < report.kappa_c_rows.size(); ++i) {
    const auto& a = report.kappa_c_rows[i - 1];
    const auto& b = report.kappa_c_rows[i];
    if (b.kappa_c > a.kappa_c && !(b.cap < a.cap)) report.cap_decreasing_in_kappa_c = false;
  }
  for (std::size_t i = 1; i < report.kappa_g_rows.size(); ++i) {
    const auto& a = report.kappa_g_rows[i - 1];
    const auto& b = report.kappa_g_rows[i];
    if (!(b.kappa_g > a.kappa_g)) continue;
    if (b.cap < a.cap - 1e-12) report.cap_nondecreasing_in_kappa_g = false;
    if (b.marginally_bunched > a.marginally_bunched + 1e-12) report.bunched_type_nonincreasing_in_kappa_g = false;
  }
  return report;
}

Real full_bunching_threshold(const ModelPrimitives& base, Real kappa_c, Real tol) {
  const ModelPrimitives costed = base.with_cost(base.cost().scaled(kappa_c));
  auto bunches = [&](Real kg) {
    return Monopoly(costed.with_utility(costed.utility().scaled(kg))).solution().full_bunching;
  };
  if (costed.utility().is_linear()) throw DomainError("full_bunching_threshold: linear utility never bunches");
  Real hi = 1.0;
  int guard = 0;
  while (!bunches(hi)) {
    hi *= 2.0;
    if (++guard > 60) throw BracketExhausted("full_bunching_threshold: no bunching found");
  }
  Real lo = hi / 2.0;
  while (bunches(lo)) {
    lo /= 2.0;
    if (++guard > 120) return lo;
  }
  while (hi - lo > tol * hi) {
    const Real mid = 0.5 * (lo + hi);
    (bunches(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace screening
