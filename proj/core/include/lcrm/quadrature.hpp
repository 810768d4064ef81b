#pragma once

#include <functional>
#include <vector>

namespace lcrm {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Nodes by Newton iteration on P_n, seeded with the Tricomi approximation.
GaussLegendreRule gauss_legendre(int order);

// Cached order-64 rule.
const GaussLegendreRule& gauss_legendre_64();

// Integrates f over [a, b] with order-64 Gauss-Legendre, bisecting intervals
// until the panel estimate and its two halves agree to `tol`.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-12, int max_depth = 30);

}  // namespace lcrm
