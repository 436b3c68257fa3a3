#include <doctest.h>

#include <cmath>

#include "screening/ironing.hpp"
#include "screening/noscreening.hpp"
#include "screening/oracle.hpp"

using namespace screening;

namespace {

const Monopoly& reference() {
  static const Monopoly m(reference_primitives());
  return m;
}

ModelPrimitives bump_primitives() {
  return {cosine_bump_fixture(), QualityUtility::sqrt_scaled(1.0), CostFunction::power(0.125, 2.0)};
}

const IronedMonopoly& bump() {
  static const IronedMonopoly m(bump_primitives());
  return m;
}

// Largest distance of the DP allocation outside the range the analytic rule
// takes on the type's cell, widened by one quality step.
Real cell_excess(const DiscreteModel& model, const DiscreteSolution& sol, const std::function<Real(Real)>& rule) {
  const Eigen::Index m = model.type_count();
  Real worst = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Real lo = rule(static_cast<Real>(i) / m);
    const Real hi = rule(static_cast<Real>(i + 1) / m);
    const Real q = model.qualities[sol.allocation[i]];
    worst = std::max({worst, lo - q, q - hi});
  }
  return worst;
}

}  // namespace

TEST_CASE("discrete model layout") {
  const auto model = make_discrete_model(reference_primitives(), 200, 400, 0.0, 4.0);
  CHECK(model.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(model.types[0] == doctest::Approx(0.0025));
  CHECK(model.quality_step() == doctest::Approx(4.0 / 399.0));
  CHECK(model.surplus(10, 20) == doctest::Approx(std::sqrt(model.qualities[20]) + model.phi[10] * model.qualities[20]));
  const auto wide = make_discrete_model(reference_primitives(), 10, 20);
  CHECK(wide.qualities[19] == doctest::Approx(1.5 * reference().efficient_quality()));
  CHECK_THROWS_AS(make_discrete_model(reference_primitives(), 2000, 1000, 0.0, 4.0), BudgetExceeded);
}

TEST_CASE("grid monopolist on the reference family") {
  const auto& mono = reference();
  const auto model = make_discrete_model(mono.primitives(), 200, 400, 0.0, 4.0);
  const auto sol = brute_monopoly(model);
  const Real dq = model.quality_step();
  CHECK(std::abs(sol.cap - 1.8660254) <= dq);
  CHECK(sol.cap == doctest::Approx(1.86466).epsilon(1e-5));
  auto rule = [&](Real t) { return mono.monopoly_allocation(t); };
  CHECK(cell_excess(model, sol, rule) <= dq);
  for (std::size_t i = 1; i < sol.allocation.size(); ++i) CHECK(sol.allocation[i] >= sol.allocation[i - 1]);

  // Two-sided sandwich against the analytic rule evaluated on the same grid.
  const Real analytic = discrete_value(mono.primitives(), model, rule, mono.cap());
  const Real bound = one_cell_bound(model);
  CHECK(sol.value >= analytic - bound);
  CHECK(sol.value <= analytic + bound);
}

TEST_CASE("monotonicity is slack on regular fixtures") {
  for (const auto& prim : {reference_primitives(), reference_primitives().with_cost(CostFunction::power(2.5, 2.0)),
                           ModelPrimitives(TypeDistribution::beta(2.0, 2.0), QualityUtility::sqrt_scaled(1.0),
                                           CostFunction::power(0.125, 2.0))}) {
    const auto model = make_discrete_model(prim, 150, 300);
    const auto a = brute_monopoly(model, true);
    const auto b = brute_monopoly(model, false);
    CHECK(a.value == b.value);
    CHECK(a.allocation == b.allocation);
  }
}

TEST_CASE("grid doubling shrinks the value discrepancy") {
  const auto& mono = reference();
  Real prev = 0.0;
  for (int s : {1, 2, 4}) {
    const auto model = make_discrete_model(mono.primitives(), 100 * s, 200 * s, 0.0, 4.0);
    const Real disc = std::abs(brute_monopoly(model).value - mono.solution().profit);
    if (s > 1) CHECK(prev / disc >= 1.8);
    prev = disc;
  }
}

TEST_CASE("ironing agrees with the monotone grid monopolist") {
  const auto& im = bump();
  const auto model = make_discrete_model(im.primitives(), 200, 400, 0.0, 4.0);
  const auto sol = brute_monopoly(model);
  const auto free = brute_monopoly(model, false);
  const Real dq = model.quality_step();
  CHECK(std::abs(sol.cap - im.cap()) <= dq);
  CHECK(cell_excess(model, sol, [&](Real t) { return im.allocation(t); }) <= dq);
  // Without monotonicity the grid problem is strictly better and not implementable.
  CHECK(free.value > sol.value + 1e-3);
  bool decreasing = false;
  for (std::size_t i = 1; i < free.allocation.size(); ++i) decreasing |= free.allocation[i] < free.allocation[i - 1];
  CHECK(decreasing);

  const Real ironed = discrete_value(im.primitives(), model, [&](Real t) { return im.allocation(t); }, im.cap());
  CHECK(std::abs(sol.value - ironed) <= one_cell_bound(model));
}

TEST_CASE("ironing beats the naive capped allocation") {
  const auto& im = bump();
  const auto& prim = im.primitives();
  const auto model = make_discrete_model(prim, 200, 400, 0.0, 4.0);
  // Raw pointwise maximiser, capped, then made monotone by a running maximum.
  std::vector<Real> naive(static_cast<std::size_t>(model.type_count()));
  Real running = 0.0;
  for (Eigen::Index i = 0; i < model.type_count(); ++i) {
    const Real phi = model.phi[i];
    const Real beta = phi >= 0.0 ? im.cap() : std::min(im.cap(), 0.25 / (phi * phi));
    running = std::max(running, beta);
    naive[i] = running;
  }
  auto naive_rule = [&](Real t) { return naive[std::min<std::size_t>(t * model.type_count(), naive.size() - 1)]; };
  const Real naive_value = discrete_value(prim, model, naive_rule, im.cap());
  const Real ironed = discrete_value(prim, model, [&](Real t) { return im.allocation(t); }, im.cap());
  CHECK(ironed > naive_value);
}

TEST_CASE("incentive audit") {
  const auto& mono = reference();
  const auto& prim = mono.primitives();
  auto q = [&](Real t) { return mono.monopoly_allocation(t); };
  auto t = [&](Real th) { return mono.transfer(th); };
  const auto clean = ic_audit(prim, q, t, 10000);
  CHECK(clean.pairs >= 10000);
  CHECK(clean.worst() <= 1e-8);

  // Charging the lowest type an extra 0.01 breaks participation and IC by that much.
  auto bumped = [&](Real th) { return mono.transfer(th) + (th == 0.0 ? 0.01 : 0.0); };
  const auto fault = ic_audit(prim, q, bumped, 10000);
  CHECK(fault.participation == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(fault.incentive == doctest::Approx(0.01).epsilon(1e-2));

  const NoScreening ns(mono);
  const auto posted = ic_audit(prim, [&](Real th) { return ns.allocation_rule()(th); },
                               [&](Real th) { return ns.transfer(th); }, 10000);
  CHECK(posted.worst() <= 1e-8);
}

TEST_CASE("x-y second-best identity") {
  const auto& mono = reference();
  const auto coarse = xy_second_best_check(mono, 1.0, 0.5, 200, 400);
  const auto fine = xy_second_best_check(mono, 1.0, 0.5, 400, 800);
  CHECK(std::abs(coarse.gap) <= coarse.bound);
  CHECK(std::abs(fine.gap) < std::abs(coarse.gap));

  const auto bottom = xy_second_best_check(mono, 1.0, 0.0);
  CHECK(std::abs(bottom.gap) <= bottom.bound);
  CHECK(bottom.analytic == doctest::Approx(mono.revenue(1.0)));

  const auto same = xy_second_best_check(mono, 1.5, 1.5);
  CHECK(same.analytic == 0.0);
  CHECK(std::abs(same.gap) < 1e-12);

  CHECK_THROWS_AS(xy_second_best_check(mono, 0.5, 1.0), DomainError);
}
