#include <doctest.h>

#include <cmath>

#include "screening/monopoly.hpp"
#include "screening/random.hpp"

using namespace screening;

namespace {

const Monopoly& reference() {
  static const Monopoly m(reference_primitives());
  return m;
}

Monopoly linear_uniform(Real a = 1.0, Real alpha = 2.0) {
  return Monopoly({TypeDistribution::uniform(), QualityUtility::linear(), CostFunction::scaled_power(a, alpha)});
}

// Closed forms for uniform types and g = sqrt(q).
Real closed_b(Real q) { return std::max(0.0, (1.0 - 1.0 / (2.0 * std::sqrt(q))) / 2.0); }
Real closed_mr(Real q) {
  const Real gp = 1.0 / (2.0 * std::sqrt(q));
  return q <= 0.25 ? gp : std::pow((1.0 + gp) / 2.0, 2);
}

}  // namespace

TEST_CASE("virtual-surplus maximiser on the reference family") {
  const auto& m = reference();
  CHECK(m.beta_alloc(0.0).value == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(m.beta_alloc(0.5).unbounded);
  CHECK(m.beta_alloc(0.25).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.beta_at_zero() == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("generalised inverse b(q)") {
  const auto& m = reference();
  CHECK(m.b_inverse(0.2) == 0.0);
  CHECK(m.b_inverse(1.866) == doctest::Approx(closed_b(1.866)).epsilon(1e-12));
  CHECK(m.b_inverse(1.866) == doctest::Approx(0.31699).epsilon(1e-4));
  CHECK(linear_uniform().b_inverse(0.7) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("marginal revenue") {
  const auto& m = reference();
  CHECK(m.marginal_revenue(0.25) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.marginal_revenue(1.866) == doctest::Approx(closed_mr(1.866)).epsilon(1e-12));
  CHECK(m.marginal_revenue(1.866) == doctest::Approx(0.46651).epsilon(1e-4));
  CHECK(linear_uniform().marginal_revenue(0.3) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(linear_uniform().marginal_revenue(7.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(m.marginal_revenue(0.0), DomainError);
}

TEST_CASE("revenue V(q)") {
  const auto& m = reference();
  CHECK(m.revenue(0.0) == 0.0);
  CHECK(m.revenue(0.25) == doctest::Approx(0.5).epsilon(1e-13));
  // Antiderivative of ((1 + 1/(2 sqrt x))/2)^2 is (x + 2 sqrt x + ln(x)/4)/4.
  const Real v1 = 0.5 + 0.25 * (0.75 + 1.0 + std::log(4.0) / 4.0);
  CHECK(m.revenue(1.0) == doctest::Approx(v1).epsilon(1e-11));
  CHECK(m.revenue(1.0) == doctest::Approx(1.0241434).epsilon(1e-7));
}

TEST_CASE("efficient quality") {
  CHECK(reference().efficient_quality() == doctest::Approx(3.1303954347672788).epsilon(1e-11));
  // Linear utility, uniform types, c'(q) = 2q.
  Monopoly lin({TypeDistribution::uniform(), QualityUtility::linear(), CostFunction::power(1.0, 2.0)});
  CHECK(lin.efficient_quality() == doctest::Approx(0.25).epsilon(1e-12));
  // g = sqrt(q), E = 0.5, c'(q) = q: 1/2 + 1/2 - 1 = 0 at q = 1.
  Monopoly half(reference_primitives().with_cost(CostFunction::power(0.5, 2.0)));
  CHECK(half.efficient_quality() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("monopoly cap on the reference family") {
  const auto& s = reference().solution();
  const Real root = (1.0 + std::sqrt(3.0)) / 2.0;  // 2s^2 - 2s - 1 = 0
  CHECK(s.cap == doctest::Approx(root * root).epsilon(1e-11));
  CHECK(s.marginally_bunched == doctest::Approx(closed_b(root * root)).epsilon(1e-11));
  CHECK_FALSE(s.full_bunching);
  CHECK(s.profit == doctest::Approx(s.revenue_at_cap - s.cost_at_cap).epsilon(1e-15));
  CHECK(s.profit == doctest::Approx(1.027394269235016).epsilon(1e-9));
  CHECK(s.cap < reference().efficient_quality());
}

TEST_CASE("full bunching under steep cost") {
  Monopoly steep(reference_primitives().with_cost(CostFunction::power(2.5, 2.0)));
  const auto& s = steep.solution();
  CHECK(s.full_bunching);
  CHECK(s.marginally_bunched == 0.0);
  CHECK(s.cap == doctest::Approx(std::pow(0.1, 2.0 / 3.0)).epsilon(1e-11));
  CHECK(s.cap < steep.beta_at_zero());
}

TEST_CASE("linear preferences: cap by direct calculation") {
  auto m = linear_uniform(1.0, 2.0);
  CHECK(m.cap() == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(m.monopoly_allocation(0.3) == 0.0);
  CHECK(m.monopoly_allocation(0.7) == doctest::Approx(0.125));
  CHECK(m.transfer(0.4) == 0.0);
}

TEST_CASE("monopoly allocation") {
  const auto& m = reference();
  CHECK(m.monopoly_allocation(0.9) == doctest::Approx(1.8660254037844386).epsilon(1e-11));
  CHECK(m.monopoly_allocation(0.0) == doctest::Approx(0.25).epsilon(1e-14));
  Real prev = -1.0;
  for (int i = 0; i < 1024; ++i) {
    const Real q = m.monopoly_allocation(i / 1023.0);
    CHECK(q >= prev);
    prev = q;
  }
}

TEST_CASE("transfers") {
  const auto& m = reference();
  CHECK(m.transfer(0.0) == doctest::Approx(0.5).epsilon(1e-13));
  const auto& s = m.solution();
  const Real b = s.marginally_bunched;
  // Rent at the top: integral of beta = 1/(4(1-2t)^2) up to b, then the cap.
  const Real rent = 1.0 / (8.0 * (1.0 - 2.0 * b)) - 0.125 + (1.0 - b) * s.cap;
  CHECK(m.transfer(1.0) == doctest::Approx(std::sqrt(s.cap) + s.cap - rent).epsilon(1e-10));
  CHECK(m.transfer(1.0) == doctest::Approx(m.tariff(s.cap).price).epsilon(1e-10));
}

TEST_CASE("tariff and price increments") {
  const auto& m = reference();
  const auto top = m.tariff(m.cap());
  CHECK(top.increment == doctest::Approx(0.68301).epsilon(1e-5));
  // At the cap, the marginal buyer mass times the increment equals marginal cost.
  CHECK((1.0 - m.solution().marginally_bunched) * top.increment ==
        doctest::Approx(m.cap() / 4.0).epsilon(1e-10));
  CHECK(m.tariff(0.25 + 1e-10).increment == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(m.tariff(1.0).increment == doctest::Approx(0.75).epsilon(1e-12));
  CHECK_THROWS_AS(m.tariff(0.2), DomainError);

  auto curve = m.tariff_curve(64);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].price >= curve[i - 1].price);
    // Increments are decreasing here, so the tariff is concave.
    CHECK(curve[i].increment <= curve[i - 1].increment);
    const Real dq = curve[i].quality - curve[i - 1].quality;
    const Real avg = 0.5 * (curve[i].increment + curve[i - 1].increment);
    CHECK((curve[i].price - curve[i - 1].price) / dq == doctest::Approx(avg).epsilon(1e-3));
  }
}

TEST_CASE("price-slice maximisation is an independent oracle for b") {
  const auto& m = reference();
  CHECK(m.maximize_price_slice(1.866) == doctest::Approx(0.31699).epsilon(1e-4));
  CHECK(m.maximize_price_slice(0.1) == 0.0);
  CHECK(linear_uniform().maximize_price_slice(0.9) == doctest::Approx(0.5).epsilon(1e-7));

  RandomStream rs(7, 0);
  for (int i = 0; i < 64; ++i) {
    const Real q = 0.05 + 4.0 * rs.uniform();
    CHECK(std::abs(m.maximize_price_slice(q) - m.b_inverse(q)) < 1e-6);
  }
}

TEST_CASE("marginal revenue pastes continuously at beta(0)") {
  const auto& m = reference();
  const Real b0 = m.beta_at_zero();
  Real prev = 1e9;
  for (Real eps : {1e-2, 1e-3, 1e-4}) {
    const Real gap = std::abs(m.marginal_revenue(b0 - eps) - m.marginal_revenue(b0 + eps));
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("ordering properties over random regular primitives") {
  RandomStream rs(11, 3);
  for (int draw = 0; draw < 100; ++draw) {
    const Real a = 1.0 + 3.0 * rs.uniform();
    const Real b = 1.0 + 3.0 * rs.uniform();
    const Real kg = 0.25 + 3.75 * rs.uniform();
    const Real kc = 0.25 + 3.75 * rs.uniform();
    ModelPrimitives p(TypeDistribution::beta(a, b), QualityUtility::sqrt_scaled(kg), CostFunction::power(kc / 8.0, 2.0));
    REQUIRE(p.regular());
    Monopoly m(p);
    CHECK(m.cap() < m.efficient_quality());
    for (int i = 1; i <= 256; ++i) {
      const Real q = 2.0 * m.efficient_quality() * i / 256.0;
      CHECK(m.marginal_revenue(q) < p.utility().derivative(q) + p.mean_type());
    }
  }
}

TEST_CASE("discrete incentive compatibility and participation") {
  const auto& m = reference();
  const auto rule = m.allocation_rule();
  const auto& g = m.primitives().utility();
  RandomStream rs(99, 0);
  Real worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Real t = rs.uniform();
    const Real s = rs.uniform();
    const Real qt = rule(t);
    const Real qs = rule(s);
    const Real own = g.value(qt) + t * qt - m.transfer(rule, t);
    const Real mimic = g.value(qs) + t * qs - m.transfer(rule, s);
    worst = std::max({worst, mimic - own, -own});
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("profit equals expected transfers minus cost") {
  const auto& m = reference();
  const auto rule = m.allocation_rule();
  const auto& dist = m.primitives().distribution();
  auto payment = [&](Real t) { return m.transfer(rule, t) * dist.density(t); };
  const Real expected = integrate(payment, 0.0, 1.0, {m.solution().marginally_bunched}, 1e-10);
  CHECK(std::abs(expected - m.primitives().cost().value(m.cap()) - m.solution().profit) < 1e-6);
}

TEST_CASE("revenue table reproduces exact revenue and the surplus kernel") {
  const auto& m = reference();
  RevenueTable table(m);
  RandomStream rs(5, 5);
  for (int i = 0; i < 50; ++i) {
    const Real q = 3.0 * rs.uniform();
    CHECK(std::abs(table.revenue(q) - m.revenue(q)) < 1e-9);
    // Uniform: the upper survival integral is (1-b)^2/2.
    const Real k = integrate([](Real s) { return 0.5 * std::pow(1.0 - closed_b(s), 2); }, 0.0, q, {0.25}, 1e-12);
    CHECK(std::abs(table.surplus_kernel(q) - k) < 1e-9);
  }
  CHECK_THROWS_AS(table.revenue(100.0), DomainError);
}

TEST_CASE("comparative statics in the cost and utility scales") {
  auto base = reference_primitives();
  auto rep = comparative_sweep(base, {0.5, 1.0, 2.0}, {0.5, 1.0, 2.0});
  CHECK(rep.cap_decreasing_in_kappa_c);
  CHECK(rep.cap_nondecreasing_in_kappa_g);
  CHECK(rep.bunched_type_nonincreasing_in_kappa_g);
  CHECK(rep.kappa_c_rows[0].cap > rep.kappa_c_rows[2].cap);

  Monopoly high(base.with_utility(base.utility().scaled(16.0)));
  CHECK(high.solution().full_bunching);

  // Full bunching starts where (2k)^(2/3) = k^2/4, i.e. k = 4.
  CHECK(full_bunching_threshold(base) == doctest::Approx(4.0).epsilon(1e-7));
}

TEST_CASE("non-regular primitives are routed away") {
  ModelPrimitives p(cosine_bump_fixture(), QualityUtility::sqrt_scaled(1.0), CostFunction::power(0.125, 2.0));
  CHECK_THROWS_AS(Monopoly{p}, DomainError);
}
