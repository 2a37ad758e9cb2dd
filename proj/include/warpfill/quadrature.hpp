#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace warpfill::quad {

// Gauss-Legendre nodes and weights on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Cached rule with n points, 1 <= n <= 32.
const Rule& gauss_legendre(int n);

template <class F>
double fixed(F&& f, double a, double b, const Rule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

namespace detail {

template <class F>
double adaptive_step(F& f, double a, double b, double whole, double tol, int depth, const Rule& rule) {
  const double m = 0.5 * (a + b);
  const double left = fixed(f, a, m, rule);
  const double right = fixed(f, m, b, rule);
  const double refined = left + right;
  const double gap = std::abs(refined - whole);
  if (depth <= 0 || gap <= tol || gap <= 64.0 * std::numeric_limits<double>::epsilon() * std::abs(refined))
    return refined;
  return adaptive_step(f, a, m, left, 0.5 * tol, depth - 1, rule) +
         adaptive_step(f, m, b, right, 0.5 * tol, depth - 1, rule);
}

}  // namespace detail

/// Adaptive Gauss-Legendre (10-point panels, bisection on disagreement
/// between a panel and its two halves). Tolerance is relative to the
/// first whole-interval estimate, floored by abs_tol.
template <class F>
double adaptive(F&& f, double a, double b, double rel_tol = 1e-10, double abs_tol = 1e-15, int max_depth = 30) {
  if (a == b) return 0.0;
  const Rule& rule = gauss_legendre(10);
  const double whole = fixed(f, a, b, rule);
  const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
  return detail::adaptive_step(f, a, b, whole, tol, max_depth, rule);
}

}  // namespace warpfill::quad
