#include "idmauc/transprob.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "idmauc/quadrature.hpp"

namespace idmauc {

namespace {

bool any_step(const IllnessDeathModel& m) {
  return is_step(m.h01) || is_step(m.h02) || is_step(m.h12);
}

bool all_step(const IllnessDeathModel& m) {
  return is_step(m.h01) && is_step(m.h02) && is_step(m.h12);
}

bool all_piecewise(const IllnessDeathModel& m) {
  return is_piecewise(m.h01) && is_piecewise(m.h02) && is_piecewise(m.h12);
}

void require_interval(double s, double t) {
  if (!(0.0 <= s) || !(s <= t) || !std::isfinite(t))
    throw std::domain_error("transition probabilities need 0 <= s <= t, finite");
}

void append_cutpoints(const Hazard& h, double s, double t, std::set<double>& points) {
  if (const auto* p = std::get_if<PiecewiseConstantHazard>(&h))
    for (double c : p->cutpoints)
      if (s < c && c < t) points.insert(c);
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Constant-rate segment matrix entries for rates a=h01, b=h02, c=h12 over a
// duration d. The generic P01 expression a*(e^{-(a+b)d} - e^{-cd})/(c-a-b)
// degenerates when c ~ a+b; the limit is a*d*e^{-(a+b)d}.
void segment_entries(double a, double b, double c, double d, double out[3][3]) {
  double e0 = std::exp(-(a + b) * d);
  double e1 = std::exp(-c * d);
  double p01;
  double gap = c - a - b;
  double scale = std::max({a, b, c, 1e-300});
  if (std::abs(gap) < 1e-10 * scale)
    p01 = a * d * e0;
  else
    p01 = a * (e0 - e1) / gap;
  p01 = clamp01(p01);
  out[0][0] = e0;
  out[0][1] = p01;
  out[0][2] = clamp01(1.0 - e0 - p01);
  out[1][0] = 0.0;
  out[1][1] = e1;
  out[1][2] = 1.0 - e1;
  out[2][0] = 0.0;
  out[2][1] = 0.0;
  out[2][2] = 1.0;
}

}  // namespace

double p00(const IllnessDeathModel& m, double s, double t) {
  require_interval(s, t);
  return std::exp(-cumulative_hazard(m.h01, s, t) - cumulative_hazard(m.h02, s, t));
}

double p11(const IllnessDeathModel& m, double s, double t) {
  require_interval(s, t);
  return std::exp(-cumulative_hazard(m.h12, s, t));
}

double p01(const IllnessDeathModel& m, double s, double t, double abs_tol) {
  require_interval(s, t);
  if (any_step(m))
    throw std::invalid_argument("p01 quadrature needs smooth hazards; use aalen_johansen");
  if (s == t) return 0.0;

  std::set<double> points;
  append_cutpoints(m.h01, s, t, points);
  append_cutpoints(m.h02, s, t, points);
  append_cutpoints(m.h12, s, t, points);
  std::vector<double> edges{s};
  edges.insert(edges.end(), points.begin(), points.end());
  edges.push_back(t);

  const double panel_tol = abs_tol / static_cast<double>(edges.size() - 1);
  auto integrand = [&m, s, t](double u) {
    return p00(m, s, u) * hazard_at(m.h01, u) * p11(m, u, t);
  };

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double lo = edges[i];
    double hi = edges[i + 1];
    const auto* w01 = std::get_if<WeibullHazard>(&m.h01);
    if (i == 0 && lo == 0.0 && w01 && w01->shape < 1.0) {
      // Onset-time substitution w = u^shape: h01(u) du becomes alpha * dw,
      // so the singular factor integrates exactly and the remaining factors
      // are bounded.
      double alpha = w01->alpha;
      double inv_shape = 1.0 / w01->shape;
      auto sub = [&m, s, t, alpha, inv_shape](double w) {
        double u = std::pow(w, inv_shape);
        return p00(m, s, u) * alpha * p11(m, u, t);
      };
      total += integrate(sub, 0.0, std::pow(hi, w01->shape), panel_tol).value;
    } else {
      total += integrate(integrand, lo, hi, panel_tol).value;
    }
  }
  return clamp01(total);
}

TransitionMatrix pwc_transition_matrix(const IllnessDeathModel& m, double s, double t) {
  require_interval(s, t);
  if (!all_piecewise(m))
    throw std::invalid_argument("pwc_transition_matrix needs piecewise-constant hazards");
  check_hazard(m.h01);
  check_hazard(m.h02);
  check_hazard(m.h12);

  std::set<double> points;
  append_cutpoints(m.h01, s, t, points);
  append_cutpoints(m.h02, s, t, points);
  append_cutpoints(m.h12, s, t, points);
  std::vector<double> edges{s};
  edges.insert(edges.end(), points.begin(), points.end());
  edges.push_back(t);

  double acc[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double lo = edges[i];
    double hi = edges[i + 1];
    if (hi <= lo) continue;
    double a = hazard_at(m.h01, lo);
    double b = hazard_at(m.h02, lo);
    double c = hazard_at(m.h12, lo);
    double seg[3][3];
    segment_entries(a, b, c, hi - lo, seg);
    double next[3][3] = {};
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k)
        for (int col = 0; col < 3; ++col) next[r][col] += acc[r][k] * seg[k][col];
    std::copy(&next[0][0], &next[0][0] + 9, &acc[0][0]);
  }

  TransitionMatrix out;
  out.s = s;
  out.t = t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.p[r][c] = acc[r][c];
  return out;
}

TransitionMatrix aalen_johansen(const StepCumulativeHazard& h01, const StepCumulativeHazard& h02,
                                const StepCumulativeHazard& h12, double s, double t,
                                bool include_jumps_at_t, std::vector<std::string>* warnings) {
  require_interval(s, t);
  check_hazard(Hazard{h01});
  check_hazard(Hazard{h02});
  check_hazard(Hazard{h12});

  std::set<double> times;
  auto collect = [&](const StepCumulativeHazard& h) {
    for (std::size_t i = 0; i < h.jump_times.size(); ++i) {
      double u = h.jump_times[i];
      if (u > s && (include_jumps_at_t ? u <= t : u < t) && h.increments[i] > 0.0) times.insert(u);
    }
  };
  collect(h01);
  collect(h02);
  collect(h12);

  auto increment_at = [](const StepCumulativeHazard& h, double u) {
    auto it = std::lower_bound(h.jump_times.begin(), h.jump_times.end(), u);
    if (it != h.jump_times.end() && *it == u)
      return h.increments[static_cast<std::size_t>(it - h.jump_times.begin())];
    return 0.0;
  };

  double r00 = 1.0, r01 = 0.0, r02 = 0.0;  // row of state 0
  double r11 = 1.0, r12 = 0.0;             // row of state 1
  for (double u : times) {
    double d01 = increment_at(h01, u);
    double d02 = increment_at(h02, u);
    double d12 = increment_at(h12, u);
    if (d01 + d02 > 1.0) {
      if (warnings) {
        std::ostringstream os;
        os << "hazard increments out of state 0 at time " << u << " sum to " << (d01 + d02)
           << "; renormalized to total mass 1";
        warnings->push_back(os.str());
      }
      double scale = 1.0 / (d01 + d02);
      d01 *= scale;
      d02 *= scale;
    }
    if (d12 > 1.0) {
      if (warnings) {
        std::ostringstream os;
        os << "hazard increment out of state 1 at time " << u << " is " << d12
           << "; clipped to 1";
        warnings->push_back(os.str());
      }
      d12 = 1.0;
    }
    double n00 = r00 * (1.0 - d01 - d02);
    double n01 = r01 * (1.0 - d12) + r00 * d01;
    double n02 = r02 + r01 * d12 + r00 * d02;
    double n11 = r11 * (1.0 - d12);
    double n12 = r12 + r11 * d12;
    r00 = n00;
    r01 = n01;
    r02 = n02;
    r11 = n11;
    r12 = n12;
  }

  TransitionMatrix out;
  out.s = s;
  out.t = t;
  out.p = {{{r00, r01, r02}, {0.0, r11, r12}, {0.0, 0.0, 1.0}}};
  return out;
}

TransitionMatrix transition_matrix(const IllnessDeathModel& m, double s, double t) {
  require_interval(s, t);
  if (any_step(m)) {
    if (!all_step(m))
      throw std::invalid_argument(
          "transition_matrix cannot mix step and smooth hazards in one model");
    return aalen_johansen(std::get<StepCumulativeHazard>(m.h01),
                          std::get<StepCumulativeHazard>(m.h02),
                          std::get<StepCumulativeHazard>(m.h12), s, t);
  }
  if (all_piecewise(m)) return pwc_transition_matrix(m, s, t);

  double q00 = p00(m, s, t);
  double q01 = p01(m, s, t);
  double q11 = p11(m, s, t);
  TransitionMatrix out;
  out.s = s;
  out.t = t;
  out.p = {{{q00, q01, clamp01(1.0 - q00 - q01)}, {0.0, q11, 1.0 - q11}, {0.0, 0.0, 1.0}}};
  return out;
}

}  // namespace idmauc
