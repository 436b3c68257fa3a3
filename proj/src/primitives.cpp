#include "screening/primitives.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/interpolators/pchip.hpp>

namespace screening {

struct TypeDistribution::Impl {
  virtual ~Impl() = default;
  virtual DistributionFamily family() const = 0;
  virtual std::string name() const = 0;
  virtual Real cdf(Real x) const = 0;
  virtual Real survival(Real x) const { return 1.0 - cdf(x); }
  virtual Real density(Real x) const = 0;

  // Generic quantile: bracketing root of the CDF.
  virtual Real quantile(Real p) const {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    auto f = [this, p](Real x) { return cdf(x) - p; };
    return find_root(f, make_bracket(f, 0.0, 1.0), 1e-14);
  }
};

namespace {

void check_unit(Real x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError(std::string(what) + ": argument outside [0,1]");
}

struct UniformImpl final : TypeDistribution::Impl {
  DistributionFamily family() const override { return DistributionFamily::Uniform; }
  std::string name() const override { return "uniform"; }
  Real cdf(Real x) const override { return x; }
  Real survival(Real x) const override { return 1.0 - x; }
  Real density(Real) const override { return 1.0; }
  Real quantile(Real p) const override { return std::clamp(p, 0.0, 1.0); }
};

// Evaluated in double: long-double promotion is several times slower for no usable gain.
using BetaPolicy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

struct BetaImpl final : TypeDistribution::Impl {
  boost::math::beta_distribution<Real, BetaPolicy> dist;
  BetaImpl(Real a, Real b) : dist(a, b) {}
  DistributionFamily family() const override { return DistributionFamily::Beta; }
  std::string name() const override { return "beta"; }
  Real cdf(Real x) const override { return boost::math::cdf(dist, x); }
  Real survival(Real x) const override { return boost::math::cdf(boost::math::complement(dist, x)); }
  Real density(Real x) const override { return boost::math::pdf(dist, x); }
  Real quantile(Real p) const override {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    return boost::math::quantile(dist, p);
  }
};

struct TabulatedImpl final : TypeDistribution::Impl {
  using Pchip = boost::math::interpolators::pchip<std::vector<Real>>;
  std::shared_ptr<Pchip> interp;

  TabulatedImpl(std::vector<Real> grid, std::vector<Real> dens) {
    if (grid.size() < 4 || grid.size() != dens.size())
      throw DomainError("tabulated density: need >= 4 matching (theta, density) rows");
    if (grid.front() != 0.0 || grid.back() != 1.0)
      throw DomainError("tabulated density: grid must run from 0 to 1");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (i > 0 && !(grid[i] > grid[i - 1])) throw GridError("tabulated density: grid not increasing");
      if (!(dens[i] > 0.0)) throw DegenerateDensity("tabulated density: values must be positive");
    }
    std::vector<Real> cum(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i)
      cum[i] = cum[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (grid[i] - grid[i - 1]);
    const Real total = cum.back();
    for (auto& c : cum) c /= total;
    cum.back() = 1.0;
    const Real left = dens.front() / total;
    const Real right = dens.back() / total;
    interp = std::make_shared<Pchip>(std::move(grid), std::move(cum), left, right);
  }
  DistributionFamily family() const override { return DistributionFamily::Tabulated; }
  std::string name() const override { return "tabulated"; }
  Real cdf(Real x) const override { return std::clamp((*interp)(x), 0.0, 1.0); }
  Real density(Real x) const override { return interp->prime(x); }
};

struct CosineBumpImpl final : TypeDistribution::Impl {
  Real amplitude;
  Real omega;  // 2 pi frequency
  Real norm;

  CosineBumpImpl(Real a, Real frequency) : amplitude(a), omega(2.0 * std::numbers::pi * frequency) {
    if (!(std::abs(a) < 1.0)) throw DomainError("cosine bump: |amplitude| must be below 1");
    if (!(frequency > 0.0)) throw DomainError("cosine bump: frequency must be positive");
    norm = 1.0 + a * std::sin(omega) / omega;
  }
  DistributionFamily family() const override { return DistributionFamily::CosineBump; }
  std::string name() const override { return "cosine_bump"; }
  Real cdf(Real x) const override { return (x + amplitude * std::sin(omega * x) / omega) / norm; }
  Real survival(Real x) const override {
    return ((1.0 - x) + amplitude * (std::sin(omega) - std::sin(omega * x)) / omega) / norm;
  }
  Real density(Real x) const override { return (1.0 + amplitude * std::cos(omega * x)) / norm; }
};

}  // namespace

TypeDistribution TypeDistribution::uniform() { return TypeDistribution(std::make_shared<UniformImpl>()); }

TypeDistribution TypeDistribution::beta(Real a, Real b) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta: shape parameters must be positive");
  return TypeDistribution(std::make_shared<BetaImpl>(a, b));
}

TypeDistribution TypeDistribution::tabulated(std::vector<Real> grid, std::vector<Real> density) {
  return TypeDistribution(std::make_shared<TabulatedImpl>(std::move(grid), std::move(density)));
}

TypeDistribution TypeDistribution::tabulated_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("tabulated density: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DomainError("tabulated density: missing header row in " + path);
  std::vector<Real> grid;
  std::vector<Real> dens;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a;
    std::string b;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ','))
      throw DomainError("tabulated density: malformed row '" + line + "'");
    try {
      grid.push_back(std::stod(a));
      dens.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw DomainError("tabulated density: non-numeric row '" + line + "'");
    }
  }
  return tabulated(std::move(grid), std::move(dens));
}

TypeDistribution TypeDistribution::cosine_bump(Real amplitude, Real frequency) {
  return TypeDistribution(std::make_shared<CosineBumpImpl>(amplitude, frequency));
}

DistributionFamily TypeDistribution::family() const { return impl_->family(); }
std::string TypeDistribution::name() const { return impl_->name(); }

Real TypeDistribution::cdf(Real theta) const {
  check_unit(theta, "cdf");
  return impl_->cdf(theta);
}

Real TypeDistribution::survival(Real theta) const {
  check_unit(theta, "survival");
  return impl_->survival(theta);
}

Real TypeDistribution::density(Real theta) const {
  check_unit(theta, "density");
  return impl_->density(theta);
}

Real TypeDistribution::quantile(Real p) const {
  check_unit(p, "quantile");
  return impl_->quantile(p);
}

QualityUtility QualityUtility::sqrt_scaled(Real kappa) {
  if (!(kappa > 0.0)) throw DomainError("sqrt utility: kappa must be positive");
  return {UtilityFamily::SqrtScaled, kappa, 0.5};
}

QualityUtility QualityUtility::power_scaled(Real kappa, Real alpha) {
  if (!(kappa > 0.0)) throw DomainError("power utility: kappa must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("power utility: alpha must lie in (0,1)");
  return {UtilityFamily::PowerScaled, kappa, alpha};
}

QualityUtility QualityUtility::linear() { return {UtilityFamily::Linear, 0.0, 1.0}; }

Real QualityUtility::value(Real q) const {
  if (q < 0.0) throw DomainError("utility: negative quality");
  if (family_ == UtilityFamily::Linear) return 0.0;
  return kappa_ * std::pow(q, alpha_);
}

Real QualityUtility::derivative(Real q) const {
  if (q < 0.0) throw DomainError("utility: negative quality");
  if (family_ == UtilityFamily::Linear) return 0.0;
  if (q == 0.0) return std::numeric_limits<Real>::infinity();
  return kappa_ * alpha_ * std::pow(q, alpha_ - 1.0);
}

Real QualityUtility::derivative_inverse(Real slope) const {
  if (family_ == UtilityFamily::Linear) throw DomainError("utility: linear family has no marginal inverse");
  if (!(slope > 0.0)) throw DomainError("utility: marginal inverse needs a positive slope");
  return std::pow(slope / (kappa_ * alpha_), 1.0 / (alpha_ - 1.0));
}

QualityUtility QualityUtility::scaled(Real k) const {
  if (!(k > 0.0)) throw DomainError("utility: scale must be positive");
  return {family_, kappa_ * k, alpha_};
}

CostFunction CostFunction::power(Real kappa, Real exponent) {
  if (!(kappa > 0.0)) throw DomainError("cost: kappa must be positive");
  if (!(exponent > 1.0)) throw DomainError("cost: exponent must exceed 1");
  return {CostFamily::PowerCost, kappa, exponent};
}

CostFunction CostFunction::scaled_power(Real a, Real alpha) {
  if (!(a > 0.0)) throw DomainError("cost: scale a must be positive");
  if (!(alpha > 1.0)) throw DomainError("cost: alpha must exceed 1");
  return {CostFamily::ScaledPower, std::pow(a, -alpha), alpha};
}

Real CostFunction::value(Real q) const {
  if (q < 0.0) throw DomainError("cost: negative quality");
  return coefficient_ * std::pow(q, exponent_);
}

Real CostFunction::derivative(Real q) const {
  if (q < 0.0) throw DomainError("cost: negative quality");
  return coefficient_ * exponent_ * std::pow(q, exponent_ - 1.0);
}

Real CostFunction::derivative_inverse(Real slope) const {
  if (slope < 0.0) throw DomainError("cost: marginal inverse needs a nonnegative slope");
  return std::pow(slope / (coefficient_ * exponent_), 1.0 / (exponent_ - 1.0));
}

CostFunction CostFunction::scaled(Real k) const {
  if (!(k > 0.0)) throw DomainError("cost: scale must be positive");
  return {family_, coefficient_ * k, exponent_};
}

ModelPrimitives::ModelPrimitives(TypeDistribution distribution, QualityUtility utility, CostFunction cost)
    : distribution_(std::move(distribution)), utility_(std::move(utility)), cost_(std::move(cost)) {
  const auto& d = distribution_;
  mean_type_ = integrate([&d](Real x) { return x * d.density(x); }, 0.0, 1.0, 1e-12);
  if (!(mean_type_ > 0.0 && mean_type_ < 1.0)) throw DomainError("primitives: mean type outside (0,1)");
  auto phi = [this](Real t) { return virtual_value_extended(t); };
  virtual_value_root_ = find_root(phi, make_bracket(phi, 0.0, 1.0), 1e-14);
  regular_ = is_regular(4096);
}

Real ModelPrimitives::virtual_value(Real theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("virtual value: type outside [0,1]");
  if (theta == 1.0) return 1.0;
  const Real f = distribution_.density(theta);
  if (f < kDensityFloor) throw DegenerateDensity("virtual value: density below floor");
  return theta - distribution_.survival(theta) / f;
}

Real ModelPrimitives::virtual_value_extended(Real theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("virtual value: type outside [0,1]");
  if (theta == 1.0) return 1.0;
  const Real f = distribution_.density(theta);
  const Real s = distribution_.survival(theta);
  if (f < kDensityFloor) return s > 0.5 ? -std::numeric_limits<Real>::infinity() : theta;
  return theta - s / f;
}

bool ModelPrimitives::is_regular(int grid_size) const {
  if (grid_size < 64) throw DomainError("is_regular: grid_size must be at least 64");
  Real prev = -std::numeric_limits<Real>::infinity();
  for (int i = 0; i < grid_size; ++i) {
    const Real p = (i + 0.5) / grid_size;
    const Real v = virtual_value_extended(distribution_.quantile(p));
    if (v - prev < -1e-9) return false;
    prev = v;
  }
  return true;
}

ModelPrimitives reference_primitives() {
  return {TypeDistribution::uniform(), QualityUtility::sqrt_scaled(1.0), CostFunction::power(0.125, 2.0)};
}

TypeDistribution cosine_bump_fixture() { return TypeDistribution::cosine_bump(0.9, 2.0); }

}  // namespace screening
