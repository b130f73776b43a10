#include "idmauc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace idmauc {

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1]. Odd-indexed Kronrod nodes are
// the embedded 7-point Gauss nodes.
constexpr double kNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
  bool splittable = true;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fc = f(center);
  double kron = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    double x = half * kNodes[i];
    double sum2 = f(center - x) + f(center + x);
    kron += kKronrodWeights[i] * sum2;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum2;
  }
  kron *= half;
  gauss *= half;
  if (!std::isfinite(kron)) throw std::runtime_error("integrand produced a non-finite value");
  Panel p{a, b, kron, std::abs(kron - gauss), true};
  // Splitting cannot improve a panel whose error sits at roundoff level or
  // whose endpoints are adjacent floating-point numbers.
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double width_floor = eps * std::max({std::abs(a), std::abs(b), 1e-300});
  if (p.error <= 64.0 * eps * std::abs(kron) || b - a <= 8.0 * width_floor) p.splittable = false;
  return p;
}

constexpr std::size_t kMaxPanels = 4096;

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol) {
  if (!(a <= b)) throw std::invalid_argument("integrate needs a <= b");
  QuadratureResult out;
  if (a == b) return out;

  auto worse = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> panels(worse);
  panels.push(gk15(f, a, b));
  out.evaluations = 15;
  double total_error = panels.top().error;

  while (total_error > abs_tol && panels.top().splittable) {
    if (panels.size() >= kMaxPanels) {
      std::ostringstream os;
      os << "quadrature failed to converge: error " << total_error << " exceeds tolerance "
         << abs_tol << " after " << panels.size() << " panels";
      throw std::runtime_error(os.str());
    }
    Panel worst = panels.top();
    panels.pop();
    double mid = 0.5 * (worst.a + worst.b);
    Panel left = gk15(f, worst.a, mid);
    Panel right = gk15(f, mid, worst.b);
    out.evaluations += 30;
    total_error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }

  // Sorted accumulation keeps the final sum reproducible across refinements.
  std::vector<Panel> ordered;
  ordered.reserve(panels.size());
  while (!panels.empty()) {
    ordered.push_back(panels.top());
    panels.pop();
  }
  std::sort(ordered.begin(), ordered.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const Panel& p : ordered) {
    out.value += p.value;
    out.error_estimate += p.error;
  }
  if (out.error_estimate > abs_tol * 16.0 && out.error_estimate > 1e-12 * std::abs(out.value)) {
    std::ostringstream os;
    os << "quadrature failed to converge: error " << out.error_estimate << " exceeds tolerance "
       << abs_tol;
    throw std::runtime_error(os.str());
  }
  return out;
}

}  // namespace idmauc
