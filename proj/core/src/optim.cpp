#include "idmauc/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace idmauc {

namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::vector<double> fd_gradient(const ObjectiveFn& f, const std::vector<double>& x, double step) {
  const std::size_t n = x.size();
  std::vector<double> g(n);
  std::vector<double> p = x;
  // Off-center evaluations may sit past a cliff where the objective is
  // infinite; fall back to the one-sided difference on the usable side so the
  // gradient stays finite (the line search rejects the infinite side anyway).
  double f0 = std::numeric_limits<double>::quiet_NaN();
  auto center = [&]() {
    if (std::isnan(f0)) f0 = f(x);
    return f0;
  };
  for (std::size_t i = 0; i < n; ++i) {
    double h = step * std::max(1.0, std::abs(x[i]));
    p[i] = x[i] + h;
    double fp = f(p);
    p[i] = x[i] - h;
    double fm = f(p);
    p[i] = x[i];
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * h);
    } else if (std::isfinite(fp)) {
      g[i] = (fp - center()) / h;
    } else if (std::isfinite(fm)) {
      g[i] = (center() - fm) / h;
    } else {
      g[i] = 0.0;
    }
  }
  return g;
}

std::vector<std::vector<double>> fd_hessian(const ObjectiveFn& f, const std::vector<double>& x,
                                            double step) {
  const std::size_t n = x.size();
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = step * std::max(1.0, std::abs(x[i]));

  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  const double f0 = f(x);
  std::vector<double> p = x;

  for (std::size_t i = 0; i < n; ++i) {
    p[i] = x[i] + h[i];
    double fp = f(p);
    p[i] = x[i] - h[i];
    double fm = f(p);
    p[i] = x[i];
    out[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      p[i] = x[i] + h[i];
      p[j] = x[j] + h[j];
      double fpp = f(p);
      p[j] = x[j] - h[j];
      double fpm = f(p);
      p[i] = x[i] - h[i];
      double fmm = f(p);
      p[j] = x[j] + h[j];
      double fmp = f(p);
      p[i] = x[i];
      p[j] = x[j];
      out[i][j] = out[j][i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }
  return out;
}

bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
  const std::size_t n = b.size();
  if (a.size() != n) return false;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double sum = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) sum -= a[ri][c] * x[c];
    x[ri] = sum / a[ri][ri];
    if (!std::isfinite(x[ri])) return false;
  }
  return true;
}

OptimResult minimize_bfgs(const ObjectiveFn& f, std::vector<double> x0,
                          const OptimOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("minimize_bfgs needs at least one parameter");

  OptimResult res;
  res.x = std::move(x0);
  res.value = f(res.x);
  if (!std::isfinite(res.value))
    throw std::invalid_argument("objective is not finite at the starting point");
  res.gradient = fd_gradient(f, res.x, options.fd_step);

  // Inverse-Hessian approximation, reset to identity whenever curvature
  // information degenerates.
  std::vector<std::vector<double>> hinv(n, std::vector<double>(n, 0.0));
  auto reset_h = [&hinv, n]() {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) hinv[i][j] = i == j ? 1.0 : 0.0;
  };
  reset_h();

  constexpr double kArmijoC1 = 1e-4;
  auto grad_small = [&res, &options]() {
    return inf_norm(res.gradient) < options.gradient_tol * std::max(1.0, std::abs(res.value));
  };
  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    if (grad_small() && res.iterations > 0) {
      res.converged = true;
      return res;
    }

    std::vector<double> dir(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) dir[i] -= hinv[i][j] * res.gradient[j];
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += dir[i] * res.gradient[i];
    if (!(slope < 0.0)) {
      // Not a descent direction: restart from steepest descent.
      reset_h();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -res.gradient[i];
      slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += dir[i] * res.gradient[i];
      if (!(slope < 0.0)) {
        res.converged = grad_small();
        return res;
      }
    }

    double alpha = 1.0;
    std::vector<double> x_new(n);
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = res.x[i] + alpha * dir[i];
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= res.value + kArmijoC1 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      res.converged = grad_small();
      return res;
    }

    std::vector<double> g_new = fd_gradient(f, x_new, options.fd_step);
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - res.x[i];
      y[i] = g_new[i] - res.gradient[i];
    }
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) sy += s[i] * y[i];

    double rel_change = std::abs(res.value - f_new) / std::max(1.0, std::abs(res.value));
    res.x = x_new;
    res.value = f_new;
    res.gradient = std::move(g_new);

    // Converged: small scaled gradient, or a genuine (not collapsed) step
    // that no longer moves the objective.
    if (grad_small() || (rel_change < options.rel_change_tol && alpha >= 1e-6)) {
      ++res.iterations;
      res.converged = true;
      return res;
    }

    if (sy > 1e-12) {
      // BFGS update of the inverse Hessian:
      // H <- (I - s y'/sy) H (I - y s'/sy) + s s'/sy.
      std::vector<double> hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) hy[i] += hinv[i][j] * y[j];
      double yhy = 0.0;
      for (std::size_t i = 0; i < n; ++i) yhy += y[i] * hy[i];
      double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          hinv[i][j] += (1.0 + rho * yhy) * rho * s[i] * s[j] -
                        rho * (s[i] * hy[j] + hy[i] * s[j]);
    } else {
      reset_h();
    }
  }
  res.converged = grad_small();
  return res;
}

double gradient_check(const ObjectiveFn& f, const std::vector<double>& x) {
  std::vector<double> internal = fd_gradient(f, x, OptimOptions{}.fd_step);
  // Plain (unscaled) central differences as the reference.
  const std::size_t n = x.size();
  std::vector<double> reference(n);
  std::vector<double> p = x;
  const double h = 1e-5;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = x[i] + h;
    double fp = f(p);
    p[i] = x[i] - h;
    double fm = f(p);
    p[i] = x[i];
    reference[i] = (fp - fm) / (2.0 * h);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double denom = std::max(1.0, std::abs(reference[i]));
    worst = std::max(worst, std::abs(internal[i] - reference[i]) / denom);
  }
  return worst;
}

}  // namespace idmauc
