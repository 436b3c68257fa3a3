#include "screening/competition.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace screening {

MixedEquilibrium::MixedEquilibrium(const Monopoly& mono, int firms, int table_points)
    : mono_(std::make_shared<const Monopoly>(mono)), n_(firms), top_(mono.cap()) {
  if (firms < 2) throw DomainError("mixed equilibrium: needs at least two active firms");
  if (table_points < 2) throw GridError("mixed equilibrium: inverse table needs two points");
  nodes_.resize(table_points);
  for (int i = 0; i < table_points; ++i) nodes_[i] = exact_inverse(static_cast<Real>(i) / (table_points - 1));
}

Real MixedEquilibrium::ratio(Real q) const {
  if (q <= 0.0) return 0.0;
  if (q >= top_) return 1.0;
  const Real r = mono_->primitives().cost().derivative(q) / mono_->marginal_revenue(q);
  return std::clamp(r, 0.0, 1.0);
}

Real MixedEquilibrium::cdf(Real q) const {
  if (!(q >= 0.0 && q <= top_)) throw DomainError("equilibrium cdf: quality outside the support");
  return std::pow(ratio(q), 1.0 / (n_ - 1));
}

Real MixedEquilibrium::exact_inverse(Real u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("equilibrium inverse: probability outside [0,1]");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return top_;
  // Solve in ratio units, where the map is closer to linear.
  const Real level = std::pow(u, static_cast<Real>(n_ - 1));
  auto gap = [&](Real q) { return ratio(q) - level; };
  return find_root(gap, Bracket<Real>{0.0, top_, -level, 1.0 - level}, 1e-15);
}

Real MixedEquilibrium::inverse(Real u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("equilibrium inverse: probability outside [0,1]");
  const Eigen::Index last = nodes_.size() - 1;
  const Real pos = u * static_cast<Real>(last);
  const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), last - 1);
  const Real w = pos - static_cast<Real>(i);
  return nodes_[i] + w * (nodes_[i + 1] - nodes_[i]);
}

Real MixedEquilibrium::first_order_cdf(Real q) const { return std::pow(ratio(q), static_cast<Real>(n_) / (n_ - 1)); }

Real MixedEquilibrium::second_order_cdf(Real q) const {
  const Real h = cdf(q);
  return std::pow(h, n_) + n_ * std::pow(h, n_ - 1) * (1.0 - h);
}

Real MixedEquilibrium::conditional_cdf(Real y, Real x) const {
  if (!(y >= 0.0 && y <= x && x <= top_ && x > 0.0))
    throw DomainError("conditional cdf: need 0 <= y <= x <= q^M and x > 0");
  return std::pow(cdf(y) / cdf(x), n_ - 1);
}

std::vector<Real> MixedEquilibrium::cdf_table(int points) const {
  if (points < 2) throw GridError("cdf table: need two points");
  std::vector<Real> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const Real q = i == points - 1 ? top_ : top_ * i / (points - 1);
    out[i] = cdf(q);
  }
  return out;
}

OrderStats order_stats_from_uniforms(const MixedEquilibrium& eq, std::span<const Real> uniforms) {
  if (static_cast<int>(uniforms.size()) != eq.firms()) throw DomainError("order stats: need one uniform per firm");
  const auto& c = eq.monopoly().primitives().cost();
  OrderStats s;
  s.x = -1.0;
  s.y = -1.0;
  for (Real u : uniforms) {
    const Real q = eq.inverse(u);
    s.total_cost += c.value(q);
    if (q > s.x) {
      s.y = s.x;
      s.x = q;
    } else if (q > s.y) {
      s.y = q;
    }
  }
  return s;
}

OrderStats sample_order_stats(const MixedEquilibrium& eq, RandomStream& stream) {
  std::vector<Real> u(static_cast<std::size_t>(eq.firms()));
  for (auto& v : u) v = stream.uniform();
  return order_stats_from_uniforms(eq, u);
}

Real subgame_allocation(const Monopoly& mono, Real x, Real y, Real theta) {
  if (!(y >= 0.0 && y <= x)) throw DomainError("subgame allocation: need 0 <= y <= x");
  if (x == y) return y;
  return std::max(mono.beta_alloc(theta).capped(x), y);
}

SubgameOutcome subgame_outcome(const Monopoly& mono, Real x, Real y) {
  if (!(y >= 0.0 && y <= x)) throw DomainError("subgame outcome: need 0 <= y <= x");
  SubgameOutcome out{x, y, {}, 0.0};
  auto& rule = out.allocation;
  rule.kind = AllocationKind::Subgame;
  rule.cap = x;
  rule.floor = y;
  if (x > y) {
    rule.marginal_type = x > 0.0 ? mono.b_inverse(x) : 0.0;
    const Real low = y > 0.0 ? mono.b_inverse(y) : 0.0;
    rule.breakpoints = {low, rule.marginal_type};
    out.winner_revenue = mono.revenue(x) - mono.revenue(y);
  }
  auto self = std::make_shared<const Monopoly>(mono);
  rule.evaluate = [self, x, y](Real t) { return subgame_allocation(*self, x, y, t); };
  return out;
}

Real surplus_kernel(const Monopoly& mono, Real q) {
  if (q < 0.0) throw DomainError("surplus kernel: negative quality");
  if (q == 0.0) return 0.0;
  auto slope = [&mono](Real s) { return mono.upper_survival_integral(mono.b_inverse(s)); };
  std::vector<Real> breaks;
  if (mono.beta_at_zero() > 0.0 && mono.beta_at_zero() < q) breaks.push_back(mono.beta_at_zero());
  return integrate(slope, 0.0, q, breaks, 1e-12);
}

Real subgame_surplus(const Monopoly& mono, Real x, Real y) {
  if (!(y >= 0.0 && y <= x)) throw DomainError("subgame surplus: need 0 <= y <= x");
  const auto& prim = mono.primitives();
  return prim.utility().value(y) + prim.mean_type() * y + surplus_kernel(mono, x) - surplus_kernel(mono, y);
}

Real monopoly_welfare(const Monopoly& mono) { return surplus_kernel(mono, mono.cap()) + mono.solution().profit; }

Real deviation_payoff(const MixedEquilibrium& eq, Real q) {
  if (q < 0.0) throw DomainError("deviation payoff: negative quality");
  if (q == 0.0) return 0.0;
  const auto& mono = eq.monopoly();
  const Real top = eq.support_top();
  const int rivals = eq.firms() - 1;
  // Winning against n-1 rivals has probability H_n^{n-1}, which is one above the support.
  auto integrand = [&](Real s) {
    const Real win = s >= top ? 1.0 : std::pow(eq.cdf(s), rivals);
    return win == 0.0 ? 0.0 : mono.marginal_revenue(s) * win;
  };
  std::vector<Real> breaks;
  if (q > top) breaks.push_back(top);
  return integrate(integrand, 0.0, q, breaks, 1e-12) - mono.primitives().cost().value(q);
}

namespace {

struct Moments {
  long long count = 0;
  Real mean = 0.0;
  Real m2 = 0.0;

  void add(Real v) {
    ++count;
    const Real d = v - mean;
    mean += d / static_cast<Real>(count);
    m2 += d * (v - mean);
  }

  static Moments merge(const Moments& a, const Moments& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    Moments out;
    out.count = a.count + b.count;
    const Real d = b.mean - a.mean;
    const Real wb = static_cast<Real>(b.count) / static_cast<Real>(out.count);
    out.mean = a.mean + d * wb;
    out.m2 = a.m2 + b.m2 + d * d * static_cast<Real>(a.count) * wb;
    return out;
  }

  Real half_width() const {
    if (count < 2) return 0.0;
    const Real var = m2 / static_cast<Real>(count - 1);
    return 1.96 * std::sqrt(var / static_cast<Real>(count));
  }
};

struct ChunkResult {
  Moments welfare;
  Moments profit;
  Real x_max = 0.0;
  bool below = true;
  long long above_floor = 0;

  static ChunkResult merge(const ChunkResult& a, const ChunkResult& b) {
    return {Moments::merge(a.welfare, b.welfare), Moments::merge(a.profit, b.profit), std::max(a.x_max, b.x_max),
            a.below && b.below, a.above_floor + b.above_floor};
  }
};

constexpr long long kChunk = 1 << 14;

// Pairwise reduction in index order, independent of how chunks were scheduled.
ChunkResult reduce(std::vector<ChunkResult> parts) {
  while (parts.size() > 1) {
    std::vector<ChunkResult> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(ChunkResult::merge(parts[i], parts[i + 1]));
    if (parts.size() % 2 == 1) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts.empty() ? ChunkResult{} : parts.front();
}

}  // namespace

MonteCarloReport simulate_competition(const MixedEquilibrium& eq, const MonteCarloConfig& config) {
  if (config.samples < 2) throw DomainError("monte carlo: need at least two samples");
  if (config.samples > kSampleBudget) throw SampleBudgetExceeded("monte carlo: sample budget exceeded");
  const auto& mono = eq.monopoly();
  const auto& prim = mono.primitives();
  const RevenueTable table(mono);
  const Real top = eq.support_top();
  const Real floor = mono.beta_at_zero();
  const Real mu = prim.mean_type();
  const auto& g = prim.utility();

  const long long chunks = (config.samples + kChunk - 1) / kChunk;
  std::vector<ChunkResult> parts(static_cast<std::size_t>(chunks));
  std::atomic<long long> next{0};
  auto work = [&]() {
    std::vector<Real> u(static_cast<std::size_t>(eq.firms()));
    for (long long k = next++; k < chunks; k = next++) {
      RandomStream stream(config.seed, static_cast<std::uint64_t>(k));
      const long long begin = k * kChunk;
      const long long end = std::min(config.samples, begin + kChunk);
      ChunkResult r;
      for (long long i = begin; i < end; ++i) {
        for (auto& v : u) v = stream.uniform();
        const OrderStats s = order_stats_from_uniforms(eq, u);
        const Real kx = table.surplus_kernel(s.x);
        const Real ky = table.surplus_kernel(s.y);
        r.welfare.add(g.value(s.y) + mu * s.y + kx - ky);
        r.profit.add(table.revenue(s.x) - table.revenue(s.y) - s.total_cost);
        r.x_max = std::max(r.x_max, s.x);
        r.below = r.below && s.x < top;
        if (s.y > floor) ++r.above_floor;
      }
      parts[static_cast<std::size_t>(k)] = r;
    }
  };
  const int threads = config.threads > 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  const ChunkResult total = reduce(std::move(parts));
  MonteCarloReport rep;
  rep.welfare = {total.welfare.mean, total.welfare.half_width(), total.welfare.count, WelfareMethod::MonteCarlo};
  rep.industry_profit = total.profit.mean;
  rep.industry_profit_half_width = total.profit.half_width();
  rep.x_max_observed = total.x_max;
  rep.all_below_cap = total.below;
  rep.y_above_floor_frequency = static_cast<Real>(total.above_floor) / static_cast<Real>(total.welfare.count);
  return rep;
}

WelfareEstimate expected_welfare_quadrature(const MixedEquilibrium& eq) {
  const auto& mono = eq.monopoly();
  const auto& prim = mono.primitives();
  const auto& g = prim.utility();
  const Real top = eq.support_top();
  const Real mu = prim.mean_type();
  // E[phi(Z)] = phi(top) - integral of phi' F_Z, applied to K(X) and g(Y) + mu Y - K(Y).
  auto integrand = [&](Real q) {
    const Real slope = mono.upper_survival_integral(mono.b_inverse(q));
    const Real fx = eq.first_order_cdf(q);
    const Real fy = eq.second_order_cdf(q);
    const Real low = fy == 0.0 ? 0.0 : (g.derivative(q) + mu - slope) * fy;
    return slope * fx + low;
  };
  std::vector<Real> breaks;
  if (mono.beta_at_zero() > 0.0 && mono.beta_at_zero() < top) breaks.push_back(mono.beta_at_zero());
  WelfareEstimate est;
  est.method = WelfareMethod::OrderStatQuadrature;
  est.mean = g.value(top) + mu * top - integrate(integrand, 0.0, top, breaks, 1e-13);
  return est;
}

WelfareEstimate expected_welfare(const MixedEquilibrium& eq, WelfareMethod method, const MonteCarloConfig& config) {
  if (method == WelfareMethod::OrderStatQuadrature) return expected_welfare_quadrature(eq);
  return simulate_competition(eq, config).welfare;
}

DominanceReport full_bunching_dominance_check(const Monopoly& mono) {
  DominanceReport rep;
  rep.applicable = mono.solution().full_bunching;
  rep.monopoly_welfare = monopoly_welfare(mono);
  rep.duopoly_welfare = expected_welfare_quadrature(MixedEquilibrium(mono, 2)).mean;
  rep.monopoly_dominates = rep.monopoly_welfare > rep.duopoly_welfare;
  return rep;
}

ModelPrimitives linear_family(Real scale, Real alpha) {
  return {TypeDistribution::uniform(), QualityUtility::linear(), CostFunction::scaled_power(scale, alpha)};
}

LimitReport limit_experiment(Real scale, const std::vector<Real>& alphas) {
  LimitReport rep;
  rep.scale = scale;
  rep.limit = scale / 8.0;
  for (Real alpha : alphas) {
    const Monopoly mono(linear_family(scale, alpha));
    LimitRow row;
    row.alpha = alpha;
    row.cap_closed_form = std::pow(std::pow(scale, alpha) / (4.0 * alpha), 1.0 / (alpha - 1.0));
    row.cap_root = mono.cap();
    row.duopoly_welfare = expected_welfare_quadrature(MixedEquilibrium(mono, 2)).mean;
    row.monopoly_welfare = monopoly_welfare(mono);
    row.gap = row.duopoly_welfare - row.monopoly_welfare;
    row.distance = std::abs(row.gap - rep.limit);
    rep.rows.push_back(row);
  }
  rep.approaches_monotonically = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].distance > rep.rows[i - 1].distance) rep.approaches_monotonically = false;
  return rep;
}

}  // namespace screening
