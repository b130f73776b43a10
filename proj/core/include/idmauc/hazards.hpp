#pragma once

#include <variant>
#include <vector>

namespace idmauc {

// lambda(t) = alpha * shape * t^(shape-1); cumulative alpha * t^shape.
// alpha > 0, shape > 0. shape < 1 gives a hazard that is singular (but
// integrable) at t = 0.
struct WeibullHazard {
  double alpha = 0.0;
  double shape = 0.0;
};

// Constant rate on each segment. cutpoints are strictly increasing and
// positive; rates has one more entry than cutpoints. Segments are closed on
// the left: t in [cutpoints[k-1], cutpoints[k]) uses rates[k].
struct PiecewiseConstantHazard {
  std::vector<double> cutpoints;
  std::vector<double> rates;
};

// Nonparametric cumulative hazard that jumps by increments[j] at
// jump_times[j] (strictly increasing, increments >= 0). The pointwise hazard
// is undefined; only cumulative quantities are meaningful.
struct StepCumulativeHazard {
  std::vector<double> jump_times;
  std::vector<double> increments;

  // Sum of increments at jump times <= t (right-continuous value).
  double value_at(double t) const;
  // Sum of increments at jump times < t (left limit).
  double value_before(double t) const;
};

using Hazard = std::variant<WeibullHazard, PiecewiseConstantHazard, StepCumulativeHazard>;

bool is_step(const Hazard& h);
bool is_piecewise(const Hazard& h);

// Instantaneous hazard at t >= 0. Throws std::domain_error for step hazards
// and for a Weibull with shape < 1 at exactly t = 0 (the hazard diverges).
double hazard_at(const Hazard& h, double t);

// Integrated hazard over [s, t], 0 <= s <= t. Exact for every family
// (steps sum the increments in (s, t]).
double cumulative_hazard(const Hazard& h, double s, double t);

// Validates parameter constraints; throws std::invalid_argument on violation.
void check_hazard(const Hazard& h);

}  // namespace idmauc
