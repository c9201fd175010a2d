#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "gbarq/errors.hpp"

namespace gbarq {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  auto integrate(F&& f) const {
    decltype(f(0.0) * 1.0) acc{};
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

// Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n from Chebyshev guesses).
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: order must be >= 1");
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

// Composite Gauss-Legendre: [a, b] split into `panels` equal panels, `order`
// nodes each. Nodes come out in ascending order.
inline QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order) {
  if (!(b > a) || panels < 1) throw DomainError("composite_gauss_legendre: bad interval or panel count");
  const QuadratureRule base = gauss_legendre(order);
  QuadratureRule r;
  r.nodes.reserve(static_cast<std::size_t>(panels) * order);
  r.weights.reserve(static_cast<std::size_t>(panels) * order);
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double mid = lo + 0.5 * width;
    for (int i = 0; i < order; ++i) {
      r.nodes.push_back(mid + 0.5 * width * base.nodes[i]);
      r.weights.push_back(0.5 * width * base.weights[i]);
    }
  }
  return r;
}

// Panels of (at most) `panel_width`, covering [a, b] exactly.
inline QuadratureRule panel_gauss_legendre(double a, double b, double panel_width, int order) {
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / panel_width - 1e-12)));
  return composite_gauss_legendre(a, b, panels, order);
}

}  // namespace gbarq
