#include "idmauc/auc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace idmauc {

namespace {

void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::domain_error("AUC needs finite t > 0");
}

void require_window(double s, double t) {
  require_time(s);
  if (!(s <= t) || !std::isfinite(t))
    throw std::domain_error("cumulative/dynamic AUC needs 0 < s <= t");
}

struct Occupancy {
  double p00;
  double p01;
};

Occupancy state0_row(const IllnessDeathModel& m, double t) {
  TransitionMatrix tm = transition_matrix(m, 0.0, t);
  return {tm(0, 0), tm(0, 1)};
}

}  // namespace

double prevalence_id(const IllnessDeathModel& model, double t) {
  require_time(t);
  Occupancy occ = state0_row(model, t);
  double denom = occ.p00 + occ.p01;
  if (denom < 1e-12) throw std::domain_error("no survivors at t");
  return occ.p01 / denom;
}

double case_prob_id(const IllnessDeathModel& model, double t) {
  require_time(t);
  double h02 = hazard_at(model.h02, t);
  double h12 = hazard_at(model.h12, t);
  if (h02 == 0.0 && h12 == 0.0) throw std::domain_error("no deaths possible at t");
  Occupancy occ = state0_row(model, t);
  double num = occ.p01 * h12;
  double denom = occ.p00 * h02 + num;
  if (denom < 1e-300) throw std::domain_error("no deaths possible at t");
  return num / denom;
}

double auc_id(const IllnessDeathModel& model, double t) {
  return 0.5 + 0.5 * (case_prob_id(model, t) - prevalence_id(model, t));
}

double prevalence_cd(const IllnessDeathModel& model, double s, double t) {
  require_window(s, t);
  Occupancy at_s = state0_row(model, s);
  Occupancy at_t = state0_row(model, t);
  double denom = at_t.p00 + at_t.p01;
  if (denom < 1e-12) throw std::domain_error("no survivors at t");
  return at_s.p01 * p11(model, s, t) / denom;
}

double case_prob_cd(const IllnessDeathModel& model, double s, double t) {
  require_window(s, t);
  TransitionMatrix window = transition_matrix(model, s, t);
  Occupancy at_s = state0_row(model, s);
  double num = at_s.p01 * window(1, 2);
  double denom = at_s.p00 * window(0, 2) + num;
  if (denom < 1e-300) throw std::domain_error("no deaths in window");
  return num / denom;
}

double auc_cd(const IllnessDeathModel& model, double s, double t) {
  return 0.5 + 0.5 * (case_prob_cd(model, s, t) - prevalence_cd(model, s, t));
}

double auc_id_cox(const CoxTdFit& fit, double t) {
  require_time(t);
  // Left-limit occupation probabilities: jumps strictly before t, so the
  // deaths at t themselves are excluded from the survivor pool.
  TransitionMatrix before =
      aalen_johansen(fit.cumhaz01, fit.baseline02, fit.cumhaz12(), 0.0, t, false);
  double q00 = before(0, 0);
  double q01 = before(0, 1);
  double hr = std::exp(fit.beta);
  double death_mass = q00 + q01 * hr;
  double survivor_mass = q00 + q01;
  if (death_mass < 1e-300 || survivor_mass < 1e-12)
    throw std::domain_error("no probability mass at t");
  double p = q01 * hr / death_mass;
  double pi1 = q01 / survivor_mass;
  return 0.5 + 0.5 * (p - pi1);
}

double auc_cd_cox(const CoxTdFit& fit, double s, double t) {
  require_window(s, t);
  StepCumulativeHazard h12 = fit.cumhaz12();
  TransitionMatrix at_s = aalen_johansen(fit.cumhaz01, fit.baseline02, h12, 0.0, s);
  TransitionMatrix window = aalen_johansen(fit.cumhaz01, fit.baseline02, h12, s, t);
  double q00 = at_s(0, 0);
  double q01 = at_s(0, 1);
  double num_case = q01 * window(1, 2);
  double denom_case = q00 * window(0, 2) + num_case;
  double survivor_mass = q00 * (window(0, 0) + window(0, 1)) + q01 * window(1, 1);
  if (denom_case < 1e-300) throw std::domain_error("no deaths in window");
  if (survivor_mass < 1e-12) throw std::domain_error("no survivors at t");
  double p = num_case / denom_case;
  double pi1 = q01 * window(1, 1) / survivor_mass;
  return 0.5 + 0.5 * (p - pi1);
}

double auc_id_riskset(const CoxTdFit& fit, std::span<const ObservedRecord> records, double t) {
  require_time(t);
  double death_time = -1.0;
  for (const auto& r : records)
    if (r.death_indicator == 1 && r.survival_time <= t)
      death_time = std::max(death_time, r.survival_time);
  if (death_time < 0.0) return 0.5;  // no deaths yet: marker uninformative

  double n_pos = 0.0, n_total = 0.0;
  for (const auto& r : records) {
    if (r.survival_time >= death_time) {
      n_total += 1.0;
      n_pos += marker_at(r, death_time);
    }
  }
  if (n_total == 0.0) throw std::domain_error("empty risk set");
  if (n_pos == 0.0) return 0.5;
  double hr = std::exp(fit.beta);
  double p = n_pos * hr / ((n_total - n_pos) + n_pos * hr);
  double pi1 = n_pos / n_total;
  return 0.5 + 0.5 * (p - pi1);
}

namespace {

template <typename Eval>
AucCurve build_curve(AucDefinition definition, std::span<const double> grid,
                     std::optional<double> window, std::string label, Eval&& eval) {
  if (definition == AucDefinition::CumulativeDynamic && !window)
    throw std::invalid_argument("cumulative/dynamic curves need a window");
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  AucCurve curve;
  curve.definition = definition;
  curve.window = definition == AucDefinition::CumulativeDynamic ? window : std::nullopt;
  curve.estimator = std::move(label);
  for (double s : sorted) {
    try {
      double value = definition == AucDefinition::IncidentDynamic ? eval(s, s) : eval(s, s + *window);
      if (!std::isfinite(value)) throw std::domain_error("non-finite AUC");
      curve.points.push_back({s, value});
    } catch (const std::domain_error&) {
      curve.skipped.push_back(s);
    }
  }
  return curve;
}

}  // namespace

AucCurve auc_model_based(const IllnessDeathModel& model, AucDefinition definition,
                         std::span<const double> grid, std::optional<double> window,
                         std::string estimator_label) {
  return build_curve(definition, grid, window, std::move(estimator_label),
                     [&model, definition](double s, double t) {
                       return definition == AucDefinition::IncidentDynamic
                                  ? auc_id(model, s)
                                  : auc_cd(model, s, t);
                     });
}

AucCurve auc_model_based(const CoxTdFit& fit, AucDefinition definition,
                         std::span<const double> grid, std::optional<double> window) {
  return build_curve(definition, grid, window, "cox-prob",
                     [&fit, definition](double s, double t) {
                       return definition == AucDefinition::IncidentDynamic
                                  ? auc_id_cox(fit, s)
                                  : auc_cd_cox(fit, s, t);
                     });
}

}  // namespace idmauc
