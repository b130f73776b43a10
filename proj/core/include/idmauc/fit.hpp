#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "idmauc/transprob.hpp"
#include "idmauc/types.hpp"

namespace idmauc {

// Estimation failure that the data made unavoidable (degenerate design,
// non-convergence); distinct from argument errors.
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cox proportional-hazards fit with the observed disease marker as a binary
// time-dependent covariate (positive from first_positive on). Treats
// first_positive as the illness time, ignoring the interval censoring.
struct CoxTdFit {
  double beta = 0.0;     // log hazard ratio of death for marker-positive
  double beta_se = 0.0;  // inverse-information standard error
  StepCumulativeHazard cumhaz01;    // Nelson-Aalen for observed illness incidence
  StepCumulativeHazard baseline02;  // Breslow baseline for death while marker-negative
  double loglik = 0.0;              // maximized partial log-likelihood
  int iterations = 0;

  // Death hazard after disease under proportionality: baseline02 scaled by
  // exp(beta).
  StepCumulativeHazard cumhaz12() const;
};

// Newton-Raphson on the partial likelihood, Breslow tie handling.
CoxTdFit fit_cox_td(std::span<const ObservedRecord> records);

// Interval-censored log-likelihood of an illness-death model: disease onset
// is only known to lie in (last_negative, first_positive] (or after the last
// negative visit), death times are exact. Returns -infinity on a
// zero-probability record; when diagnostics is given, one line per offending
// subject index explains which factor vanished.
double ic_loglik(const IllnessDeathModel& model, std::span<const ObservedRecord> records,
                 std::vector<std::string>* diagnostics = nullptr);

struct MleFit {
  std::vector<std::string> param_names;
  std::vector<double> params;       // natural scale (rates/shapes, beta as log HR)
  std::vector<double> stderrs;      // delta-method natural scale; empty if information singular
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  IllnessDeathModel model;          // fitted hazards, ready for transition probabilities
  std::vector<std::string> warnings;
};

// Maximum likelihood for three Weibull intensities over 6 log-parameters.
// init, when given, is {alpha01, shape01, alpha02, shape02, alpha12, shape12}
// on the natural scale; the default start is the exponential moment
// estimator with all shapes 1.
MleFit fit_weibull_ic(std::span<const ObservedRecord> records,
                      std::optional<std::vector<double>> init = std::nullopt);

struct PwcSpec {
  std::vector<double> cutpoints01;
  std::vector<double> cutpoints02;
  std::vector<double> cutpoints12;  // ignored when proportional (h12 shares h02's grid)
  bool proportional = false;        // h12(t) = h02(t) * exp(beta)
};

// Maximum likelihood for piecewise-constant intensities. Segments with zero
// risk time are merged away with a warning before fitting.
MleFit fit_pwc_ic(std::span<const ObservedRecord> records, const PwcSpec& spec);

// Proportional piecewise-constant fit that scores the records the way a
// panel study observes them. Disease onset may sit anywhere in
// (last_negative, first_positive], but the death hazard switches from the
// baseline rates to baseline * exp(beta) only at the first positive visit --
// a subject who is ill but not yet diagnosed keeps the baseline death rate.
// A death is likewise scored as "in the death state at survival_time" given
// the state at the last attended visit before it, not as an exact event
// time. All hazards share the cutpoint grid; h12 reuses h02's fitted rates
// scaled by exp(beta), reported as the final parameter "beta".
MleFit fit_pwc_panel(std::span<const ObservedRecord> records,
                     const std::vector<double>& cutpoints);

// Max relative deviation between the optimizer's gradient of the
// interval-censored Weibull objective and plain central differences, at the
// given natural-scale parameters {alpha01, shape01, ..., shape12}.
double gradient_check_weibull_ic(std::span<const ObservedRecord> records,
                                 const std::vector<double>& params);

// Nonparametric cumulative hazards per transition under the diagnosis-time
// convention (illness happens at first_positive): occurrence over risk-set
// size at each event time. Input to the log-log Weibull adequacy check.
struct TransitionNelsonAalen {
  StepCumulativeHazard h01;  // observed diagnoses / disease-free at risk
  StepCumulativeHazard h02;  // undiagnosed deaths / disease-free at risk
  StepCumulativeHazard h12;  // post-diagnosis deaths / diseased at risk
};
TransitionNelsonAalen nelson_aalen_by_transition(std::span<const ObservedRecord> records);

}  // namespace idmauc
