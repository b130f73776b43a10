#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idmauc/auc.hpp"
#include "idmauc/simulate.hpp"

namespace idmauc {

enum class Estimator { CoxProb, CoxRiskset, Pwc, Weibull };

std::string estimator_label(Estimator e);
Estimator estimator_from_label(const std::string& label);

// One evaluation target: incident/dynamic AUC at `time`, or
// cumulative/dynamic AUC over (time, time + *window].
struct AucTarget {
  AucDefinition definition = AucDefinition::IncidentDynamic;
  double time = 0.0;
  std::optional<double> window;

  std::string label() const;
};

struct Performance {
  double bias = 0.0;
  double emp_se = 0.0;  // sample standard deviation, n-1 denominator
  double rmse = 0.0;
};

// Throws std::invalid_argument("insufficient replications") below 2 estimates.
Performance performance(std::span<const double> estimates, double truth);

struct StudyResult {
  std::string scenario;
  std::string estimator;
  AucTarget target;
  std::vector<double> estimates;  // valid replications only, in replication order
  double truth = 0.0;
  std::optional<Performance> summary;  // absent when n_valid < 2
  std::size_t n_valid = 0;
  std::size_t n_replications = 0;
};

struct StudyOptions {
  std::size_t n_replications = 200;
  std::uint64_t base_seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  // Cutpoint grid for the panel piecewise-constant estimator in the study.
  std::vector<double> pwc_cutpoints{6.0, 30.0, 60.0, 90.0};
};

// Replication loop: per replication, generate the scenario dataset with seed
// base_seed + replication index, fit the requested estimators, and evaluate
// each target. A replication is valid for an estimator only when the fit
// converged and every target value is finite. Replications run on a thread
// pool; results are identical regardless of thread count.
std::vector<StudyResult> run_scenario(const std::string& scenario_name,
                                      const ScenarioConfig& scenario,
                                      std::span<const Estimator> estimators,
                                      std::span<const AucTarget> targets,
                                      const StudyOptions& options);

// Hazard-ratio recovery companion: mean exp(beta) of the Cox fit and of the
// panel piecewise-constant fit over the same replications.
struct HrStudyResult {
  std::string scenario;
  double cox_mean_hr = 0.0;
  double pwc_mean_hr = 0.0;
  std::size_t cox_valid = 0;
  std::size_t pwc_valid = 0;
  std::size_t n_replications = 0;
};

HrStudyResult run_hr_study(const std::string& scenario_name, const ScenarioConfig& scenario,
                           const StudyOptions& options);

// Plain table (header + string cells) rendering of study results, one row
// per (scenario, estimator, target); serialized by the io module.
struct ReportTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

ReportTable study_report(std::span<const StudyResult> results);

// True-model AUC value for one target (the oracle the summaries compare to).
double oracle_value(const IllnessDeathModel& truth_model, const AucTarget& target);

// The shared-shape Weibull truth model of a scenario.
IllnessDeathModel truth_model(const SharedShapeWeibull& weibull);

}  // namespace idmauc
