#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idmauc/fit.hpp"
#include "idmauc/transprob.hpp"
#include "idmauc/types.hpp"

namespace idmauc {

enum class AucDefinition { IncidentDynamic, CumulativeDynamic };

struct AucPoint {
  double time = 0.0;
  double value = 0.0;
};

struct AucCurve {
  AucDefinition definition = AucDefinition::IncidentDynamic;
  std::optional<double> window;  // months; present for cumulative/dynamic
  std::vector<AucPoint> points;  // times strictly increasing, values in [0,1]
  std::string estimator;         // cox-prob | cox-riskset | pwc | weibull | truth
  std::vector<double> skipped;   // grid points where a probability degenerated
};

// Probability that a survivor at t has already experienced disease:
// pi1(t) = P01(0,t) / (P00(0,t) + P01(0,t)).
double prevalence_id(const IllnessDeathModel& model, double t);

// Probability that a subject dying at t has a disease history:
// p(t) = P01 h12(t) / (P00 h02(t) + P01 h12(t)), probabilities at t (equal to
// the left limit for continuous hazards).
double case_prob_id(const IllnessDeathModel& model, double t);

// Incident/dynamic AUC of the binary disease marker:
// 0.5 + 0.5 (p(t) - pi1(t)). Exceeds 0.5 exactly when the death-hazard ratio
// h12(t)/h02(t) exceeds 1.
double auc_id(const IllnessDeathModel& model, double t);

// Probability that a survivor at t was diseased by s:
// pi1(s,t) = P01(0,s) P11(s,t) / (P00(0,t) + P01(0,t)).
double prevalence_cd(const IllnessDeathModel& model, double s, double t);

// Probability that a subject dying in (s,t] was diseased by s:
// p(s,t) = P01(0,s) P12(s,t) / (P00(0,s) P02(s,t) + P01(0,s) P12(s,t)).
double case_prob_cd(const IllnessDeathModel& model, double s, double t);

// Cumulative/dynamic AUC: 0.5 + 0.5 (p(s,t) - pi1(s,t)).
double auc_cd(const IllnessDeathModel& model, double s, double t);

// Incident/dynamic AUC from a Cox fit via the product-integral backend.
// Occupation probabilities enter as left limits P(0, t-) in both the case
// probability and the prevalence (the value just before the jump at t), and
// the hazard ratio h12/h02 is exp(beta).
double auc_id_cox(const CoxTdFit& fit, double t);

// Cumulative/dynamic AUC from a Cox fit; P(0,s) is right-continuous and the
// window probabilities come from the product integral over (s, t].
double auc_cd_cox(const CoxTdFit& fit, double s, double t);

// Empirical incident/dynamic AUC at the most recent death time <= t: with
// risk-set counts n1 (marker-positive) and n0, returns
// 0.5 + 0.5(n1 e^b/(n0 + n1 e^b) - n1/(n0+n1)). Returns 0.5 before the first
// death.
double auc_id_riskset(const CoxTdFit& fit, std::span<const ObservedRecord> records, double t);

// Pointwise curve over a grid for a smooth model; degenerate grid points are
// skipped and recorded. For CumulativeDynamic, each grid time s is paired
// with t = s + window.
AucCurve auc_model_based(const IllnessDeathModel& model, AucDefinition definition,
                         std::span<const double> grid, std::optional<double> window,
                         std::string estimator_label);

// Same curve for a Cox fit through the product-integral probabilities.
AucCurve auc_model_based(const CoxTdFit& fit, AucDefinition definition,
                         std::span<const double> grid, std::optional<double> window);

}  // namespace idmauc
