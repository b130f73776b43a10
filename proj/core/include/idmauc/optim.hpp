#pragma once

#include <functional>
#include <vector>

namespace idmauc {

using ObjectiveFn = std::function<double(const std::vector<double>&)>;

struct OptimOptions {
  int max_iterations = 500;
  double gradient_tol = 1e-6;   // gradient infinity norm, scaled by max(1, |f|)
  double rel_change_tol = 1e-10;  // relative objective change per accepted step
  double fd_step = 1e-5;        // central-difference step, scaled by max(1, |x_i|)
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> gradient;
  int iterations = 0;
  bool converged = false;
};

// Central-difference gradient with per-coordinate step h*max(1, |x_i|).
std::vector<double> fd_gradient(const ObjectiveFn& f, const std::vector<double>& x, double step);

// Central-difference Hessian (full matrix, step scaled like fd_gradient).
std::vector<std::vector<double>> fd_hessian(const ObjectiveFn& f, const std::vector<double>& x,
                                            double step);

// Solves H * x = b by Gaussian elimination with partial pivoting; returns
// false when H is numerically singular.
bool solve_linear(std::vector<std::vector<double>> h, std::vector<double> b,
                  std::vector<double>& x);

// Dense BFGS minimizer with numerically differenced gradients and Armijo
// backtracking. Converged means the gradient infinity norm fell below
// gradient_tol * max(1, |f|), or a full accepted step changed the objective
// by less than rel_change_tol relatively. Objectives may return +infinity to
// reject a point; the line search backs away from such points.
OptimResult minimize_bfgs(const ObjectiveFn& f, std::vector<double> x0,
                          const OptimOptions& options = {});

// Max relative deviation between the optimizer's internal gradient (scaled
// central differences) and plain central differences with step 1e-5. Near
// machine-exact for quadratics; bounds the differencing noise on rough
// objectives.
double gradient_check(const ObjectiveFn& f, const std::vector<double>& x);

}  // namespace idmauc
