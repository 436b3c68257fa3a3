#pragma once

#include <memory>
#include <string>
#include <vector>

#include "screening/numerics.hpp"

namespace screening {

using Real = double;

enum class DistributionFamily { Uniform, Beta, Tabulated, CosineBump };

/// Type distribution on [0,1]. Immutable and cheap to copy.
class TypeDistribution {
 public:
  static TypeDistribution uniform();
  static TypeDistribution beta(Real a, Real b);
  /// Density sampled on an ascending grid from 0 to 1; normalised on load.
  static TypeDistribution tabulated(std::vector<Real> grid, std::vector<Real> density);
  /// Reads a two-column CSV (theta, density) with a header row.
  static TypeDistribution tabulated_from_csv(const std::string& path);
  /// Density proportional to 1 + amplitude * cos(2 pi frequency theta).
  static TypeDistribution cosine_bump(Real amplitude, Real frequency);

  DistributionFamily family() const;
  std::string name() const;

  Real cdf(Real theta) const;
  /// 1 - F, evaluated without cancellation where the family allows it.
  Real survival(Real theta) const;
  Real density(Real theta) const;
  Real quantile(Real p) const;

  struct Impl;

 private:
  explicit TypeDistribution(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

enum class UtilityFamily { SqrtScaled, PowerScaled, Linear };

/// Quality utility g scaled by kappa: kappa*sqrt(q), kappa*q^alpha, or zero.
class QualityUtility {
 public:
  static QualityUtility sqrt_scaled(Real kappa = 1.0);
  static QualityUtility power_scaled(Real kappa, Real alpha);
  static QualityUtility linear();

  UtilityFamily family() const { return family_; }
  bool is_linear() const { return family_ == UtilityFamily::Linear; }
  Real kappa() const { return kappa_; }
  Real alpha() const { return alpha_; }

  Real value(Real q) const;
  Real derivative(Real q) const;
  /// The q > 0 with g'(q) = slope, for slope > 0 (nonlinear families only).
  Real derivative_inverse(Real slope) const;
  QualityUtility scaled(Real k) const;

 private:
  QualityUtility(UtilityFamily f, Real kappa, Real alpha) : family_(f), kappa_(kappa), alpha_(alpha) {}
  UtilityFamily family_;
  Real kappa_;
  Real alpha_;
};

enum class CostFamily { PowerCost, ScaledPower };

/// Cost kappa*q^exponent, or (q/a)^alpha; stored as coefficient*q^exponent.
class CostFunction {
 public:
  static CostFunction power(Real kappa, Real exponent);
  static CostFunction scaled_power(Real a, Real alpha);

  CostFamily family() const { return family_; }
  Real coefficient() const { return coefficient_; }
  Real exponent() const { return exponent_; }

  Real value(Real q) const;
  Real derivative(Real q) const;
  Real derivative_inverse(Real slope) const;
  CostFunction scaled(Real k) const;

 private:
  CostFunction(CostFamily f, Real coefficient, Real exponent)
      : family_(f), coefficient_(coefficient), exponent_(exponent) {}
  CostFamily family_;
  Real coefficient_;
  Real exponent_;
};

inline constexpr Real kDensityFloor = 1e-12;

class ModelPrimitives {
 public:
  ModelPrimitives(TypeDistribution distribution, QualityUtility utility, CostFunction cost);

  const TypeDistribution& distribution() const { return distribution_; }
  const QualityUtility& utility() const { return utility_; }
  const CostFunction& cost() const { return cost_; }

  /// Expected type, by quadrature of theta*f.
  Real mean_type() const { return mean_type_; }
  bool regular() const { return regular_; }

  Real virtual_value(Real theta) const;
  /// Same, but where the density vanishes returns the one-sided limit
  /// (-inf in the lower tail, theta in the upper tail) instead of throwing.
  Real virtual_value_extended(Real theta) const;
  /// Zero of the virtual value (the exclusion threshold under linear utility).
  Real virtual_value_root() const { return virtual_value_root_; }
  /// Monotonicity of the virtual value on interior quantiles.
  bool is_regular(int grid_size) const;

  ModelPrimitives with_utility(QualityUtility u) const { return {distribution_, std::move(u), cost_}; }
  ModelPrimitives with_cost(CostFunction c) const { return {distribution_, utility_, std::move(c)}; }

 private:
  TypeDistribution distribution_;
  QualityUtility utility_;
  CostFunction cost_;
  Real mean_type_;
  Real virtual_value_root_;
  bool regular_;
};

/// Uniform types, g = sqrt(q), c = q^2/8: the family behind the worked figures.
ModelPrimitives reference_primitives();

/// The canonical non-regular fixture: density 1 + 0.9 cos(4 pi theta).
TypeDistribution cosine_bump_fixture();

}  // namespace screening
