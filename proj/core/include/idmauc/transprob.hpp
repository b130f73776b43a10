#pragma once

#include <array>
#include <string>
#include <vector>

#include "idmauc/hazards.hpp"

namespace idmauc {

// The three transition intensities of an irreversible illness-death process:
// h01 disease onset, h02 death while disease-free, h12 death after disease.
struct IllnessDeathModel {
  Hazard h01;
  Hazard h02;
  Hazard h12;
};

// Row-stochastic 3x3 matrix of P(state at t = column | state at s = row).
// Row 2 is the absorbing death row (0, 0, 1).
struct TransitionMatrix {
  double s = 0.0;
  double t = 0.0;
  std::array<std::array<double, 3>, 3> p{};

  double operator()(int from, int to) const { return p[from][to]; }
};

// P(stay in 0 over [s,t]) = exp(-H01(s,t) - H02(s,t)). Exact for smooth and
// step hazards alike.
double p00(const IllnessDeathModel& m, double s, double t);

// P(stay in 1 over [s,t]) = exp(-H12(s,t)).
double p11(const IllnessDeathModel& m, double s, double t);

// P(0 at s -> 1 at t): integral over the onset time u of
// p00(s,u) * h01(u) * p11(u,t), computed by adaptive quadrature. Panels are
// split at piecewise cutpoints; a Weibull h01 with shape < 1 starting from
// s = 0 is integrated in the w = u^shape scale, which removes the endpoint
// singularity exactly. Requires smooth (non-step) hazards.
double p01(const IllnessDeathModel& m, double s, double t, double abs_tol = 1e-8);

// Full matrix for any model: smooth hazards go through p00/p01/p11 with
// complements, all-piecewise models use the per-segment closed form, and
// all-step models use the product integral. Mixing step and smooth hazards
// in one model throws std::invalid_argument.
TransitionMatrix transition_matrix(const IllnessDeathModel& m, double s, double t);

// Closed-form product of per-segment constant-rate matrices. All three
// hazards must be piecewise constant.
TransitionMatrix pwc_transition_matrix(const IllnessDeathModel& m, double s, double t);

// Aalen-Johansen product integral over the pooled jump times in (s, t].
// With include_jumps_at_t = false the product stops just before t, giving
// the left limit P(s, t-). Rows are renormalized (with a warning pushed to
// *warnings when provided) if increments at one time exceed the available
// probability mass.
TransitionMatrix aalen_johansen(const StepCumulativeHazard& h01, const StepCumulativeHazard& h02,
                                const StepCumulativeHazard& h12, double s, double t,
                                bool include_jumps_at_t = true,
                                std::vector<std::string>* warnings = nullptr);

}  // namespace idmauc
