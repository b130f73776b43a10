#pragma once

#include <functional>

namespace idmauc {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // accumulated Kronrod error bound
  int evaluations = 0;
};

// Adaptive Gauss-Kronrod 7-15 integration of f over [a, b] (a <= b) to an
// absolute tolerance. Bisects panels whose error estimate exceeds their
// share of the tolerance; throws std::runtime_error (reporting the achieved
// error) if the recursion depth limit is hit before converging.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-8);

}  // namespace idmauc
