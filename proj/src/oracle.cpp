#include "screening/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace screening {

namespace {

// D(i, j): best weighted surplus of types 0..i given a nondecreasing
// allocation that ends at quality j for type i.
DiscreteSolution monotone_dp(const DiscreteModel& model, bool charge_cost) {
  const Eigen::Index m = model.type_count();
  const Eigen::Index k = model.quality_count();
  Eigen::MatrixXd best(m, k);
  best.row(0) = model.weights[0] * model.surplus.row(0);
  for (Eigen::Index i = 1; i < m; ++i) {
    Real running = -std::numeric_limits<Real>::infinity();
    for (Eigen::Index j = 0; j < k; ++j) {
      running = std::max(running, best(i - 1, j));
      best(i, j) = model.weights[i] * model.surplus(i, j) + running;
    }
  }

  DiscreteSolution sol;
  sol.value = -std::numeric_limits<Real>::infinity();
  for (Eigen::Index j = 0; j < k; ++j) {
    const Real v = best(m - 1, j) - (charge_cost ? model.cost[j] : 0.0);
    if (v > sol.value) {
      sol.value = v;
      sol.cap_index = static_cast<int>(j);
    }
  }
  sol.allocation.assign(static_cast<std::size_t>(m), 0);
  sol.allocation[m - 1] = sol.cap_index;
  for (Eigen::Index i = m - 2; i >= 0; --i) {
    const int upper = sol.allocation[i + 1];
    int arg = 0;
    for (int j = 1; j <= upper; ++j)
      if (best(i, j) > best(i, arg)) arg = j;
    sol.allocation[i] = arg;
  }
  sol.cap = model.qualities[sol.cap_index];
  sol.virtual_surplus = best(m - 1, sol.cap_index);
  return sol;
}

DiscreteSolution pointwise_dp(const DiscreteModel& model) {
  const Eigen::Index m = model.type_count();
  const Eigen::Index k = model.quality_count();
  // Per-type running argmax over qualities up to each candidate cap.
  Eigen::MatrixXi arg(m, k);
  Vector<Real> total = Vector<Real>::Zero(k);
  for (Eigen::Index i = 0; i < m; ++i) {
    int a = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (model.surplus(i, j) > model.surplus(i, a)) a = static_cast<int>(j);
      arg(i, j) = a;
      total[j] += model.weights[i] * model.surplus(i, a);
    }
  }
  DiscreteSolution sol;
  sol.value = -std::numeric_limits<Real>::infinity();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (total[j] - model.cost[j] > sol.value) {
      sol.value = total[j] - model.cost[j];
      sol.cap_index = static_cast<int>(j);
    }
  }
  sol.cap = model.qualities[sol.cap_index];
  sol.virtual_surplus = total[sol.cap_index];
  sol.allocation.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) sol.allocation[i] = arg(i, sol.cap_index);
  return sol;
}

}  // namespace

DiscreteModel make_discrete_model(const ModelPrimitives& prim, int m, int k, Real q_lo, Real q_hi) {
  if (m < 1 || k < 2) throw GridError("discrete model: need m >= 1 and k >= 2");
  if (static_cast<long long>(m) * k > kOracleBudget) throw BudgetExceeded("discrete model: m*k exceeds 1e6");
  if (!(q_hi > q_lo) || q_lo < 0.0) throw GridError("discrete model: quality grid must be increasing and nonnegative");
  const auto& dist = prim.distribution();
  DiscreteModel model;
  model.types.resize(m);
  model.weights.resize(m);
  model.phi.resize(m);
  for (int i = 0; i < m; ++i) {
    model.types[i] = (i + 0.5) / m;
    model.weights[i] = dist.cdf(static_cast<Real>(i + 1) / m) - dist.cdf(static_cast<Real>(i) / m);
  }
  model.qualities = linspace<Real>(k, q_lo, q_hi);
  model.cost.resize(k);
  Vector<Real> g(k);
  for (int j = 0; j < k; ++j) {
    g[j] = prim.utility().value(model.qualities[j]);
    model.cost[j] = prim.cost().value(model.qualities[j]);
  }
  model.surplus.resize(m, k);
  for (int i = 0; i < m; ++i) {
    model.phi[i] = prim.virtual_value_extended(model.types[i]);
    model.surplus.row(i) = (g + model.phi[i] * model.qualities).transpose();
  }
  if (!model.surplus.allFinite()) throw GridError("discrete model: surplus table is not finite");
  return model;
}

DiscreteModel make_discrete_model(const ModelPrimitives& prim, int m, int k) {
  return make_discrete_model(prim, m, k, 0.0, 1.5 * efficient_quality(prim));
}

DiscreteSolution brute_monopoly(const DiscreteModel& model, bool monotone) {
  if (static_cast<long long>(model.type_count()) * model.quality_count() > kOracleBudget)
    throw BudgetExceeded("brute_monopoly: m*k exceeds 1e6");
  return monotone ? monotone_dp(model, true) : pointwise_dp(model);
}

Real discrete_value(const ModelPrimitives& prim, const DiscreteModel& model,
                    const std::function<Real(Real)>& allocation, Real cap) {
  const auto& g = prim.utility();
  Real total = 0.0;
  for (Eigen::Index i = 0; i < model.type_count(); ++i) {
    const Real q = allocation(model.types[i]);
    total += model.weights[i] * (g.value(q) + model.phi[i] * q);
  }
  return total - prim.cost().value(cap);
}

Real one_cell_bound(const DiscreteModel& model, bool with_cost) {
  const Eigen::Index k = model.quality_count();
  Real bound = 0.0;
  for (Eigen::Index i = 0; i < model.type_count(); ++i) {
    const auto row = model.surplus.row(i);
    bound += model.weights[i] * (row.tail(k - 1) - row.head(k - 1)).cwiseAbs().maxCoeff();
  }
  if (with_cost) bound += (model.cost.tail(k - 1) - model.cost.head(k - 1)).cwiseAbs().maxCoeff();
  return bound;
}

IcAudit ic_audit(const ModelPrimitives& prim, const std::function<Real(Real)>& allocation,
                 const std::function<Real(Real)>& transfer, long long pairs) {
  const int n = std::max(2, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(pairs)))));
  const auto& g = prim.utility();
  std::vector<Real> q(n), t(n), gq(n);
  for (int i = 0; i < n; ++i) {
    const Real theta = static_cast<Real>(i) / (n - 1);
    q[i] = allocation(theta);
    t[i] = transfer(theta);
    gq[i] = g.value(q[i]);
  }
  IcAudit audit;
  audit.pairs = static_cast<long long>(n) * n;
  for (int i = 0; i < n; ++i) {
    const Real theta = static_cast<Real>(i) / (n - 1);
    const Real truthful = gq[i] + theta * q[i] - t[i];
    audit.participation = std::max(audit.participation, -truthful);
    for (int j = 0; j < n; ++j) {
      const Real mimic = gq[j] + theta * q[j] - t[j];
      audit.incentive = std::max(audit.incentive, mimic - truthful);
    }
  }
  return audit;
}

XyCheck xy_second_best_check(const Monopoly& mono, Real x, Real y, int m, int k) {
  const Real top = mono.cap();
  if (!(y >= 0.0 && y <= x && x <= top * (1.0 + 1e-12)))
    throw DomainError("xy_second_best_check: need 0 <= y <= x <= cap");
  const auto& prim = mono.primitives();
  XyCheck out;
  out.analytic = mono.revenue(x) - mono.revenue(y);
  if (x == y) {
    // Only one feasible quality: everybody gets y.
    const auto model = make_discrete_model(prim, m, 2, y, y + 1.0);
    out.dp_value = model.weights.dot(model.surplus.col(0));
  } else {
    const auto model = make_discrete_model(prim, m, k, y, x);
    out.dp_value = monotone_dp(model, false).value;
    out.bound = one_cell_bound(model, false);
  }
  out.gap = out.dp_value - prim.utility().value(y) - out.analytic;
  return out;
}

}  // namespace screening
