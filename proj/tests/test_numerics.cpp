#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "screening/numerics.hpp"
#include "screening/random.hpp"

using namespace screening;

TEST_CASE("find_root on textbook functions") {
  auto lin = [](double x) { return x - 1.0; };
  CHECK(find_root(lin, make_bracket(lin, 0.0, 2.0), 1e-10) == doctest::Approx(1.0).epsilon(1e-10));

  auto sq = [](double x) { return x * x - 2.0; };
  CHECK(find_root(sq, make_bracket(sq, 1.0, 2.0), 1e-12) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("find_root on the efficient-quality equation agrees with a fine scan") {
  auto f = [](double q) { return 1.0 / (2.0 * std::sqrt(q)) + 0.5 - q / 4.0; };
  const double root = find_root(f, make_bracket(f, 1.0, 8.0), 1e-10);

  // Independent oracle: sign change on a 1e-6 scan.
  double scan = 0.0;
  for (double q = 1.0; q < 8.0; q += 1e-6) {
    if (f(q) > 0.0 && f(q + 1e-6) <= 0.0) {
      scan = q;
      break;
    }
  }
  CHECK(std::abs(root - 3.1303954347672788) < 1e-9);
  CHECK(std::abs(root - scan) < 2e-6);
  CHECK(std::abs(f(root)) <= 10 * 1e-10 * (1 + std::abs(f(1.0))));
}

TEST_CASE("find_root rejects a bracket without a sign change") {
  auto f = [](double x) { return x * x + 1.0; };
  CHECK_THROWS_AS(find_root(f, make_bracket(f, -1.0, 1.0), 1e-10), NoSignChange);
}

TEST_CASE("find_root tolerates infinite endpoint values") {
  auto f = [](double x) { return x == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(x) + 1.0; };
  CHECK(find_root(f, make_bracket(f, 0.0, 1.0), 1e-12) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("integrate handles smooth and endpoint-singular integrands") {
  CHECK(integrate([](double) { return 1.0; }, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return 2.0 * x; }, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  const double v = integrate([](double x) { return 1.0 / (2.0 * std::sqrt(x)); }, 0.0, 1.0, 1e-9);
  CHECK(std::abs(v - 1.0) < 1e-8);
}

TEST_CASE("integrate with breakpoints handles a jump") {
  auto step = [](double x) { return x < 0.3 ? 0.0 : 1.0; };
  CHECK(integrate(step, 0.0, 1.0, std::vector<double>{0.3}) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("expand_upper_bracket brackets the root") {
  auto f = [](double q) { return 1.0 - q; };
  auto b = expand_upper_bracket(f, 0.5);
  CHECK(b.lo <= 1.0);
  CHECK(b.hi >= 1.0);
  CHECK(b.valid());

  auto g = [](double q) { return 0.25 - q / 4.0 - 1e-3; };
  auto bg = expand_upper_bracket(g, 0.01);
  CHECK(bg.hi >= 0.996);

  auto never = [](double) { return 1.0; };
  CHECK_THROWS_AS(expand_upper_bracket(never, 0.5), BracketExhausted);
}

TEST_CASE("lower convex envelope: convex input is its own envelope") {
  Vector<double> x = linspace<double>(5, 0.0, 1.0);
  Vector<double> y = x.array().square();
  auto env = lower_convex_envelope(x, y);
  CHECK((env.values - y).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("lower convex envelope of a tent is its base") {
  Vector<double> x(3);
  x << 0.0, 0.5, 1.0;
  Vector<double> y(3);
  y << 0.0, 1.0, 0.0;
  auto env = lower_convex_envelope(x, y);
  CHECK(env.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(env.slopes.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lower convex envelope of a concave bump matches brute-force chords") {
  const int n = 129;
  Vector<double> x = linspace<double>(n, 0.0, 1.0);
  Vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = x[i] - 0.25 * std::sin(2.0 * std::numbers::pi * x[i]);
  auto env = lower_convex_envelope(x, y);

  for (int i = 0; i + 1 < n - 1; ++i) CHECK(env.slopes[i + 1] >= env.slopes[i]);
  for (int i = 0; i < n; ++i) CHECK(env.values[i] <= y[i]);
  CHECK(env.values[0] == y[0]);
  CHECK(env.values[n - 1] == y[n - 1]);

  // Brute force: the minorant at x_k is the minimum over all chords spanning it.
  for (int k = 0; k < n; ++k) {
    double best = y[k];
    for (int i = 0; i <= k; ++i) {
      for (int j = k; j < n; ++j) {
        if (i == j) continue;
        const double lam = (x[j] - x[k]) / (x[j] - x[i]);
        best = std::min(best, lam * y[i] + (1.0 - lam) * y[j]);
      }
    }
    CHECK(env.values[k] == doctest::Approx(best).epsilon(1e-12));
  }

  auto twice = lower_convex_envelope(x, env.values);
  CHECK((twice.values - env.values).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("lower convex envelope rejects a non-monotone grid") {
  Vector<double> x(3);
  x << 0.0, 0.7, 0.5;
  Vector<double> y = Vector<double>::Zero(3);
  CHECK_THROWS_AS(lower_convex_envelope(x, y), GridError);
}

TEST_CASE("random streams reproduce bit-identical sequences per key") {
  RandomStream a(42, 7);
  RandomStream b(42, 7);
  RandomStream c(42, 8);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    differs = differs || (u != c.uniform());
  }
  CHECK(differs);
}

TEST_CASE("grid_maximize finds a boundary optimum") {
  auto f = [](double t) { return (1.0 - t) * (t + 1.5); };
  auto [x, v] = grid_maximize(f, 0.0, 1.0);
  CHECK(x == 0.0);
  CHECK(v == doctest::Approx(1.5));
}
