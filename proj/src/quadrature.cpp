#include "warpfill/quadrature.hpp"

#include <array>
#include <numbers>
#include <stdexcept>

namespace warpfill::quad {

namespace {

Rule make_rule(int n) {
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

const Rule& gauss_legendre(int n) {
  static const std::array<Rule, 33> rules = [] {
    std::array<Rule, 33> out;
    out[1] = Rule{{0.0}, {2.0}};
    for (int k = 2; k <= 32; ++k) out[k] = make_rule(k);
    return out;
  }();
  if (n < 1 || n > 32) throw std::out_of_range("gauss_legendre: n must be in [1, 32]");
  return rules[n];
}

}  // namespace warpfill::quad
