#pragma once

#include <functional>
#include <vector>

#include "screening/monopoly.hpp"

namespace screening {

/// Grid discretisation of the virtual-surplus problem.
struct DiscreteModel {
  Vector<Real> types;     // cell midpoints (i + 1/2)/m
  Vector<Real> weights;   // F-measure of each type cell
  Vector<Real> phi;       // virtual value at each type
  Vector<Real> qualities; // k points on [q_lo, q_hi]
  Eigen::MatrixXd surplus;  // J(i, j) = g(q_j) + phi(theta_i) q_j
  Vector<Real> cost;      // c(q_j)

  Eigen::Index type_count() const { return types.size(); }
  Eigen::Index quality_count() const { return qualities.size(); }
  Real quality_step() const { return qualities[1] - qualities[0]; }
};

/// Largest m*k the desk-scale oracle accepts.
inline constexpr long long kOracleBudget = 1'000'000;

DiscreteModel make_discrete_model(const ModelPrimitives& prim, int m, int k, Real q_lo, Real q_hi);
/// Quality grid on [0, 1.5 q*].
DiscreteModel make_discrete_model(const ModelPrimitives& prim, int m, int k);

struct DiscreteSolution {
  int cap_index = 0;
  Real cap = 0.0;
  std::vector<int> allocation;  // quality index per type
  Real virtual_surplus = 0.0;   // sum_i w_i J(i, a_i)
  Real value = 0.0;             // virtual surplus minus c(cap)
};

/// Exact optimum of the discrete monopoly problem. With `monotone` false the
/// allocation is only bounded by the cap.
DiscreteSolution brute_monopoly(const DiscreteModel& model, bool monotone = true);

/// Weighted surplus of a given allocation rule on the model's type grid, minus c(cap).
Real discrete_value(const ModelPrimitives& prim, const DiscreteModel& model,
                    const std::function<Real(Real)>& allocation, Real cap);

/// Bound on the value change from moving every quality by one grid step.
Real one_cell_bound(const DiscreteModel& model, bool with_cost = true);

struct IcAudit {
  Real incentive = 0.0;      // worst gain from misreporting
  Real participation = 0.0;  // worst negative net utility
  long long pairs = 0;

  Real worst() const { return std::max(incentive, participation); }
};

/// Checks every ordered pair on an evenly spaced type grid with about `pairs` pairs.
IcAudit ic_audit(const ModelPrimitives& prim, const std::function<Real(Real)>& allocation,
                 const std::function<Real(Real)>& transfer, long long pairs);

struct XyCheck {
  Real dp_value = 0.0;  // discrete optimum with qualities restricted to [y, x]
  Real analytic = 0.0;  // V(x) - V(y)
  Real gap = 0.0;       // dp_value - g(y) - analytic
  Real bound = 0.0;     // one-cell bound of the grid used
};

/// Discrete check of the second-best identity between the two qualities.
XyCheck xy_second_best_check(const Monopoly& mono, Real x, Real y, int m = 200, int k = 400);

}  // namespace screening
