#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "screening/errors.hpp"

namespace screening {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Bracket {
  Scalar lo;
  Scalar hi;
  Scalar f_lo;
  Scalar f_hi;

  bool valid() const { return lo < hi && !(f_lo * f_hi > Scalar(0)); }
};

template <typename Scalar, typename F>
Bracket<Scalar> make_bracket(F&& f, Scalar lo, Scalar hi) {
  return {lo, hi, f(lo), f(hi)};
}

/// Bracketing root finder (TOMS 748 with a bisection fallback).
///
/// Terminates once the bracket is narrower than `tol` or the residual is
/// exactly zero. Throws NoSignChange for an invalid bracket.
template <typename Scalar, typename F>
Scalar find_root(F&& f, const Bracket<Scalar>& bracket, Scalar tol = Scalar(1e-10)) {
  if (!(tol > Scalar(0))) throw DomainError("find_root: tolerance must be positive");
  if (!bracket.valid()) throw NoSignChange("find_root: bracket does not straddle a sign change");
  if (bracket.f_lo == Scalar(0)) return bracket.lo;
  if (bracket.f_hi == Scalar(0)) return bracket.hi;

  auto width_ok = [tol](Scalar a, Scalar b) { return std::abs(b - a) <= tol; };
  std::uintmax_t iters = 200;
  std::pair<Scalar, Scalar> r;
  // Bisect only until both ends carry finite values, then switch to TOMS 748.
  Bracket<Scalar> b = bracket;
  for (int i = 0; i < 400 && (!std::isfinite(b.f_lo) || !std::isfinite(b.f_hi)); ++i) {
    if (width_ok(b.lo, b.hi)) return (b.lo + b.hi) / Scalar(2);
    const Scalar mid = (b.lo + b.hi) / Scalar(2);
    const Scalar fm = f(mid);
    if (fm == Scalar(0)) return mid;
    if ((fm < Scalar(0)) == (b.f_lo < Scalar(0))) {
      b.lo = mid;
      b.f_lo = fm;
    } else {
      b.hi = mid;
      b.f_hi = fm;
    }
  }
  if (!std::isfinite(b.f_lo) || !std::isfinite(b.f_hi)) return (b.lo + b.hi) / Scalar(2);
  try {
    r = boost::math::tools::toms748_solve(f, b.lo, b.hi, b.f_lo, b.f_hi, width_ok, iters);
  } catch (const std::exception&) {
    iters = 200;  // fall through to bisection
  }
  if (iters >= 200 || !width_ok(r.first, r.second)) {
    std::uintmax_t bis_iters = 400;
    r = boost::math::tools::bisect(f, b.lo, b.hi, width_ok, bis_iters);
  }
  return (r.first + r.second) / Scalar(2);
}

/// Doubles the upper end from max(2 lo, 1) until f turns negative.
template <typename Scalar, typename F>
Bracket<Scalar> expand_upper_bracket(F&& f, Scalar lo) {
  const Scalar f_lo = f(lo);
  if (!(f_lo > Scalar(0))) throw DomainError("expand_upper_bracket: f(lo) must be positive");
  Scalar hi = std::max(Scalar(2) * lo, Scalar(1));
  for (int i = 0; i < 128; ++i, hi *= Scalar(2)) {
    const Scalar f_hi = f(hi);
    if (f_hi < Scalar(0)) return {lo, hi, f_lo, f_hi};
  }
  throw BracketExhausted("expand_upper_bracket: no sign change after 128 doublings");
}

/// Halves from `start` until f turns positive; used where c'(0)=0 guarantees
/// a positive excess near the origin.
template <typename Scalar, typename F>
Scalar shrink_lower_bracket(F&& f, Scalar start = Scalar(1)) {
  Scalar lo = start;
  for (int i = 0; i < 1100; ++i, lo /= Scalar(2)) {
    if (f(lo) > Scalar(0)) return lo;
  }
  throw BracketExhausted("shrink_lower_bracket: no positive value near the origin");
}

/// Adaptive Gauss-Kronrod (7/15) quadrature: globally adaptive bisection of
/// the interval with the largest error estimate, with a tanh-sinh fallback.
/// Only the fixed G7/K15 rule comes from Boost; its recursive driver compares
/// an unscaled local error against a scaled tolerance and over-refines.
template <typename Scalar, typename F>
Scalar integrate(F&& f, Scalar a, Scalar b, Scalar tol = Scalar(1e-9)) {
  if (a > b) throw DomainError("integrate: a > b");
  if (a == b) return Scalar(0);

  struct Piece {
    Scalar lo, hi, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  auto rule = [&f](Scalar lo, Scalar hi) {
    Scalar err = 0;
    const Scalar v = boost::math::quadrature::gauss_kronrod<Scalar, 15>::integrate(f, lo, hi, 0, Scalar(0), &err);
    return Piece{lo, hi, v, err * (hi - lo) / Scalar(2)};
  };

  std::vector<Piece> heap{rule(a, b)};
  Scalar total = heap.front().value;
  Scalar total_err = heap.front().error;
  constexpr int kMaxPieces = 4000;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  while (std::isfinite(total) && total_err > tol && static_cast<int>(heap.size()) < kMaxPieces) {
    std::pop_heap(heap.begin(), heap.end());
    const Piece worst = heap.back();
    heap.pop_back();
    const Scalar mid = (worst.lo + worst.hi) / Scalar(2);
    if (!(mid > worst.lo && mid < worst.hi)) {  // interval exhausted at machine resolution
      heap.push_back(Piece{worst.lo, worst.hi, worst.value, Scalar(0)});
      std::push_heap(heap.begin(), heap.end());
      total_err -= worst.error;
      continue;
    }
    const Piece left = rule(worst.lo, mid);
    const Piece right = rule(mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    for (const Piece& p : {left, right}) {
      heap.push_back(p);
      std::push_heap(heap.begin(), heap.end());
    }
    if (total_err <= Scalar(50) * eps * std::abs(total)) break;
  }
  if (std::isfinite(total) && total_err <= std::max(tol, Scalar(50) * eps * std::abs(total))) {
    // Re-sum to shed the drift of the running total.
    Scalar sum = 0;
    for (const Piece& p : heap) sum += p.value;
    return sum;
  }

  try {
    boost::math::quadrature::tanh_sinh<Scalar> ts;
    Scalar ts_err = 0;
    Scalar l1 = 0;
    const Scalar v = ts.integrate(f, a, b, tol, &ts_err, &l1);
    if (std::isfinite(v) && ts_err <= std::max(Scalar(10) * tol, Scalar(10) * tol * l1)) return v;
  } catch (const std::exception&) {
  }
  throw QuadratureFailure("integrate: no convergence on [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");
}

/// Splits [a,b] at interior breakpoints (kinks, jumps) and sums the pieces.
template <typename Scalar, typename F>
Scalar integrate(F&& f, Scalar a, Scalar b, std::vector<Scalar> breaks, Scalar tol = Scalar(1e-9)) {
  std::sort(breaks.begin(), breaks.end());
  Scalar total = 0;
  Scalar left = a;
  for (Scalar p : breaks) {
    if (p <= left || p >= b) continue;
    total += integrate(f, left, p, tol);
    left = p;
  }
  return total + integrate(f, left, b, tol);
}

/// Golden-section/Brent maximisation of a unimodal function on [a,b].
template <typename Scalar, typename F>
std::pair<Scalar, Scalar> maximize(F&& f, Scalar a, Scalar b) {
  auto neg = [&f](Scalar x) { return -f(x); };
  auto r = boost::math::tools::brent_find_minima(neg, a, b, std::numeric_limits<Scalar>::digits / 2);
  return {r.first, -r.second};
}

/// Maximises a possibly multi-modal function: grid scan then local refinement
/// around the best grid point. Boundary optima are kept when they win.
template <typename Scalar, typename F>
std::pair<Scalar, Scalar> grid_maximize(F&& f, Scalar a, Scalar b, int grid = 1024) {
  Scalar best_x = a;
  Scalar best_v = f(a);
  const Scalar h = (b - a) / Scalar(grid);
  int best_i = 0;
  for (int i = 1; i <= grid; ++i) {
    const Scalar x = i == grid ? b : a + h * Scalar(i);
    const Scalar v = f(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
      best_i = i;
    }
  }
  const Scalar lo = std::max(a, a + h * Scalar(best_i - 1));
  const Scalar hi = std::min(b, a + h * Scalar(best_i + 1));
  auto refined = maximize(f, lo, hi);
  if (refined.second > best_v) return refined;
  return {best_x, best_v};
}

template <typename Scalar>
struct PiecewiseLinearEnvelope {
  Vector<Scalar> knots;
  Vector<Scalar> values;
  Vector<Scalar> slopes;  // right-slopes, one per cell

  Eigen::Index cells() const { return slopes.size(); }

  /// Index of the cell whose half-open span [knot_j, knot_{j+1}) holds x;
  /// the last knot maps to the last cell.
  Eigen::Index cell_of(Scalar x) const {
    const Scalar* begin = knots.data();
    const Scalar* end = begin + knots.size();
    Eigen::Index j = std::upper_bound(begin, end, x) - begin - 1;
    return std::clamp<Eigen::Index>(j, 0, cells() - 1);
  }

  Scalar value_at(Scalar x) const {
    const Eigen::Index j = cell_of(x);
    return values[j] + slopes[j] * (x - knots[j]);
  }

  Scalar right_slope(Scalar x) const { return slopes[cell_of(x)]; }
};

/// Greatest convex minorant of sampled data, interpolated back on the grid.
/// Monotone-chain lower hull; exact for piecewise-linear input.
template <typename Scalar>
PiecewiseLinearEnvelope<Scalar> lower_convex_envelope(const Vector<Scalar>& grid,
                                                      const Vector<Scalar>& values) {
  const Eigen::Index n = grid.size();
  if (n < 2 || values.size() != n) throw GridError("lower_convex_envelope: need >= 2 matching points");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(grid[i] > grid[i - 1])) throw GridError("lower_convex_envelope: grid not strictly increasing");
  }

  std::vector<Eigen::Index> hull;
  hull.reserve(static_cast<std::size_t>(n));
  auto slope = [&](Eigen::Index i, Eigen::Index j) {
    return (values[j] - values[i]) / (grid[j] - grid[i]);
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    // Pop while the last hull point does not lie strictly below the chord,
    // which keeps consecutive hull slopes strictly increasing.
    while (hull.size() >= 2) {
      const Eigen::Index a = hull[hull.size() - 2];
      const Eigen::Index b = hull.back();
      if (slope(a, b) >= slope(a, i)) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }

  PiecewiseLinearEnvelope<Scalar> env;
  env.knots = grid;
  env.values.resize(n);
  env.slopes.resize(n - 1);
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
    const Eigen::Index a = hull[h];
    const Eigen::Index b = hull[h + 1];
    const Scalar s = slope(a, b);
    for (Eigen::Index i = a; i < b; ++i) {
      env.slopes[i] = s;
      const Scalar chord = values[a] + s * (grid[i] - grid[a]);
      env.values[i] = std::min(chord, values[i]);
    }
  }
  env.values[n - 1] = values[n - 1];
  env.values[0] = values[0];
  return env;
}

template <typename Scalar>
Vector<Scalar> linspace(Eigen::Index n, Scalar a, Scalar b) {
  return Vector<Scalar>::LinSpaced(n, a, b);
}

}  // namespace screening
