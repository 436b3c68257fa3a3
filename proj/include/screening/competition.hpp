#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "screening/monopoly.hpp"
#include "screening/random.hpp"

namespace screening {

/// Symmetric mixed investment strategy of n active firms on [0, q^M].
class MixedEquilibrium {
 public:
  MixedEquilibrium(const Monopoly& mono, int firms, int table_points = 4096);

  int firms() const { return n_; }
  Real support_top() const { return top_; }
  const Monopoly& monopoly() const { return *mono_; }

  /// H_n(q) = (c'(q)/V'(q))^{1/(n-1)}, exact.
  Real cdf(Real q) const;
  /// Table inverse of H_n, linear between exact nodes on an even probability grid.
  Real inverse(Real u) const;
  /// Root-found inverse, for checking the table.
  Real exact_inverse(Real u) const;

  /// CDFs of the highest and second-highest of n draws.
  Real first_order_cdf(Real q) const;
  Real second_order_cdf(Real q) const;
  /// G(y | x) = (H_n(y)/H_n(x))^{n-1}: law of the runner-up given the winner.
  Real conditional_cdf(Real y, Real x) const;

  /// H_n on an even grid of `points` qualities over [0, q^M].
  std::vector<Real> cdf_table(int points) const;

 private:
  /// c'(q)/V'(q), clipped to [0, 1].
  Real ratio(Real q) const;

  std::shared_ptr<const Monopoly> mono_;
  int n_;
  Real top_;
  Vector<Real> nodes_;  // H_n^{-1}(i / (size-1))
};

struct OrderStats {
  Real x = 0.0;           // highest quality
  Real y = 0.0;           // second highest
  Real total_cost = 0.0;  // sum of c over all firms
};

/// Maps one uniform per firm through the inverse CDF.
OrderStats order_stats_from_uniforms(const MixedEquilibrium& eq, std::span<const Real> uniforms);
OrderStats sample_order_stats(const MixedEquilibrium& eq, RandomStream& stream);

struct SubgameOutcome {
  Real x;
  Real y;
  AllocationRule allocation;
  Real winner_revenue;  // V(x) - V(y)
};

/// max{min{beta(theta), x}, y}.
Real subgame_allocation(const Monopoly& mono, Real x, Real y, Real theta);
SubgameOutcome subgame_outcome(const Monopoly& mono, Real x, Real y);

/// Consumer surplus of the sliced allocation, counting the free quality y.
Real subgame_surplus(const Monopoly& mono, Real x, Real y);
/// K(q): consumer surplus of the monopoly allocation capped at q.
Real surplus_kernel(const Monopoly& mono, Real q);
/// Monopoly welfare: consumer surplus plus profit.
Real monopoly_welfare(const Monopoly& mono);

/// Profit of a firm investing q against n-1 rivals playing the equilibrium.
Real deviation_payoff(const MixedEquilibrium& eq, Real q);

enum class WelfareMethod { MonteCarlo, OrderStatQuadrature };

struct WelfareEstimate {
  Real mean = 0.0;
  Real half_width_95 = 0.0;
  long long n_samples = 0;
  WelfareMethod method = WelfareMethod::OrderStatQuadrature;
};

struct MonteCarloConfig {
  long long samples = 1'000'000;
  std::uint64_t seed = 42;
  int threads = 0;  // 0: hardware concurrency
};

/// Largest Monte Carlo budget accepted.
inline constexpr long long kSampleBudget = 200'000'000;

struct MonteCarloReport {
  WelfareEstimate welfare;
  Real industry_profit = 0.0;  // mean of V(x) - V(y) - sum of costs
  Real industry_profit_half_width = 0.0;
  Real x_max_observed = 0.0;
  bool all_below_cap = true;
  Real y_above_floor_frequency = 0.0;  // share of draws with y > beta(0)
};

MonteCarloReport simulate_competition(const MixedEquilibrium& eq, const MonteCarloConfig& config);

/// E over the order statistics of the subgame consumer surplus, by 1-D quadrature.
WelfareEstimate expected_welfare_quadrature(const MixedEquilibrium& eq);

WelfareEstimate expected_welfare(const MixedEquilibrium& eq, WelfareMethod method,
                                 const MonteCarloConfig& config = {});

struct DominanceReport {
  bool applicable = false;  // the cap lies in the fully bunched region
  Real monopoly_welfare = 0.0;
  Real duopoly_welfare = 0.0;
  bool monopoly_dominates = false;
};

DominanceReport full_bunching_dominance_check(const Monopoly& mono);

struct LimitRow {
  Real alpha;
  Real cap_closed_form;
  Real cap_root;
  Real duopoly_welfare;
  Real monopoly_welfare;
  Real gap;          // duopoly minus monopoly welfare
  Real distance;     // |gap - a/8|
};

struct LimitReport {
  Real scale;
  Real limit;  // a/8
  std::vector<LimitRow> rows;
  bool approaches_monotonically = false;
};

/// Linear utility, uniform types, c(q) = (q/a)^alpha.
LimitReport limit_experiment(Real scale, const std::vector<Real>& alphas);

/// Primitives of the linear-preference family used by the limit experiment.
ModelPrimitives linear_family(Real scale, Real alpha);

}  // namespace screening
