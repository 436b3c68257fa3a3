#pragma once

#include <vector>

#include "screening/monopoly.hpp"

namespace screening {

struct Interval {
  Real lo;
  Real hi;
};

/// Cumulative virtual value on a quantile grid and its greatest convex minorant.
struct QuantileEnvelope {
  Vector<Real> quantiles;   // t_i = i/n
  Vector<Real> types;       // F^{-1}(t_i)
  Vector<Real> cumulative;  // H(t_i)
  PiecewiseLinearEnvelope<Real> hull;
  std::vector<bool> ironed;  // per cell: strictly inside a pooling region
  std::vector<Interval> ironed_quantiles;

  Eigen::Index cells() const { return hull.cells(); }
  /// Cell whose type span [types_j, types_{j+1}) contains theta.
  Eigen::Index cell_of_type(Real theta) const;
};

/// Ironing contact threshold: H - convH above this marks a pooled knot.
inline constexpr Real kIroningThreshold = 1e-10;

QuantileEnvelope build_quantile_envelope(const ModelPrimitives& prim, int cells);

struct IronedSolution {
  Real cap = 0.0;
  Real marginal_quantile = 0.0;   // T^-(cap) in quantile units
  Real marginally_bunched = 0.0;  // T^-(cap) as a type
  bool full_bunching = false;
  Real revenue = 0.0;
  Real profit = 0.0;
  int grid_cells = 0;
  bool grid_converged = false;
  std::vector<Interval> ironed_quantiles;
  std::vector<Interval> ironed_types;
};

/// Monopolist with a possibly non-monotone virtual value.
class IronedMonopoly {
 public:
  /// Doubles the quantile grid from `initial_cells` until the cap moves by less than `cap_tol`.
  explicit IronedMonopoly(ModelPrimitives prim, int initial_cells = 4096, Real cap_tol = 1e-6,
                          int max_cells = 1 << 17);

  const ModelPrimitives& primitives() const { return prim_; }
  const QuantileEnvelope& envelope() const { return env_; }
  const IronedSolution& solution() const { return solution_; }
  Real cap() const { return solution_.cap; }
  Real efficient_quality() const { return q_star_; }

  /// H(t) = integral of phi(F^{-1}(s)) over [0, t].
  Real cumulative_virtual(Real t) const;
  /// Envelope value conv H(t).
  Real envelope_value(Real t) const;
  /// Right slope of conv H at F(theta).
  Real ironed_phi(Real theta) const;
  /// Virtual value driving the allocation: the envelope slope on pooled cells,
  /// the raw value (kept between neighbouring slopes) elsewhere.
  Real allocation_phi(Real theta) const;

  Quality beta(Real theta) const;
  Real allocation(Real theta) const;
  AllocationRule allocation_rule() const;

  /// Left-continuous inverse of the uncapped allocation, in quantile units.
  Real boundary_quantile(Real q) const;
  /// Left derivative of the revenue curve.
  Real marginal_revenue_left(Real q) const;

 private:
  Real solve_cap() const;
  void finalize();

  ModelPrimitives prim_;
  Real q_star_;
  QuantileEnvelope env_;
  IronedSolution solution_;
};

}  // namespace screening
