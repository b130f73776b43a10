#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "idmauc/auc.hpp"
#include "idmauc/hazards.hpp"
#include "idmauc/study.hpp"
#include "idmauc/types.hpp"

namespace idmauc {

// Parse or serialization failure, carrying the line number where known.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NamedRecord {
  std::string id;
  ObservedRecord record;
};

// Long format, one row per visit: id,visit_time,marker,survival_time,
// death_indicator (comma-separated, header mandatory). Rows are grouped by
// id, sorted by visit time, and validated; any invariant violation rejects
// the whole file naming the offending subject.
std::vector<NamedRecord> read_records(std::istream& in);
void write_records(std::span<const NamedRecord> records, std::ostream& out);

// True trajectories: id,illness_time,death_time,exit_direct with an empty
// illness_time field for direct deaths.
struct NamedPath {
  std::string id;
  SubjectPath path;
};
std::vector<NamedPath> read_paths(std::istream& in);
void write_paths(std::span<const NamedPath> paths, std::ostream& out);

// AUC curves: definition,estimator,window,time,value (window empty for
// incident/dynamic rows).
AucCurve read_curve(std::istream& in);
void write_curve(const AucCurve& curve, std::ostream& out);

// Study report tables, serialized as plain CSV.
ReportTable read_report(std::istream& in);
void write_report(const ReportTable& table, std::ostream& out);

// Screening schedule: visits every `interval` months while t <= `until`
// (the last phase's until is +infinity).
struct VisitScheme {
  struct Phase {
    double until = 0.0;
    double interval = 0.0;
  };
  std::vector<Phase> phases;
};

// The follow-up schedule used for the diagnosis-only reconstruction: every
// 3 months for 3 years, every 6 months until year 5, yearly afterwards.
VisitScheme standard_followup_scheme();

// Grid of scheduled visits from 0 up to `until` (inclusive when hit exactly).
std::vector<double> synthesize_visits(const VisitScheme& scheme, double until);

// Rule-based last negative visit when only the diagnosis date is known:
// diagnosis_time minus the scheme interval in force at diagnosis, clamped
// at 0. Throws std::invalid_argument for nonpositive diagnosis times.
double reconstruct_screening(double diagnosis_time, const VisitScheme& scheme);

// Reconciliation of the rule value with the synthesized grid: the later of
// reconstruct_screening and the last scheduled visit strictly before
// diagnosis; `adjusted` flags records where the two disagreed.
struct ReconstructedInterval {
  double last_negative = 0.0;
  bool adjusted = false;
};
ReconstructedInterval reconstruct_last_negative(double diagnosis_time, const VisitScheme& scheme);

// Log-log linearity check of step cumulative hazards: points
// (log t, log H(t)) at jump times with H(t) > 0, least-squares slope/
// intercept and R-squared per transition. A Weibull hazard is linear in
// this scale with slope equal to its shape.
struct WeibullDiagnostic {
  struct Transition {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (log time, log cumulative hazard)
    bool has_line = false;  // false when fewer than 2 usable points
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
  };
  std::vector<Transition> transitions;
};

WeibullDiagnostic weibull_diagnostic(
    std::span<const std::pair<std::string, StepCumulativeHazard>> hazards);

void write_diagnostic(const WeibullDiagnostic& diag, std::ostream& out);

}  // namespace idmauc
