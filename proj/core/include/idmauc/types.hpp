#pragma once

#include <optional>
#include <string>
#include <vector>

namespace idmauc {

// Three-state irreversible illness-death process. Disease-free subjects may
// become diseased or die; diseased subjects may die; dead is absorbing.
enum class State { DiseaseFree = 0, Diseased = 1, Dead = 2 };

// Complete latent trajectory of one subject, in months from baseline.
struct SubjectPath {
  std::optional<double> illness_time;  // absent when the subject left state 0 by dying
  double death_time = 0.0;             // true (uncensored) death time
  bool exit_direct = false;            // true when the first exit from state 0 was death
};

// One subject as the analyst sees them: a screening history plus right-censored
// survival. The disease marker is observed only at visits, so disease onset is
// known only up to the (last_negative, first_positive] interval.
struct ObservedRecord {
  std::vector<double> visit_times;  // attended visits, ascending, all <= survival_time
  std::vector<int> marker;          // 0/1 disease marker per visit, non-decreasing
  double survival_time = 0.0;       // follow-up end: death or censoring time
  int death_indicator = 0;          // 1 = died at survival_time, 0 = censored
  std::optional<double> last_negative;   // last visit with marker 0 before the first positive
  std::optional<double> first_positive;  // first visit with marker 1; absent if never positive
};

// Derives the censoring interval from the visit history and assembles a record.
ObservedRecord make_record(std::vector<double> visit_times, std::vector<int> marker,
                           double survival_time, int death_indicator);

// Marker value in force at time t: 1 iff the subject has tested positive by t.
int marker_at(const ObservedRecord& record, double t);

// Returns human-readable violations (empty means the record is consistent):
// ascending visits within follow-up, binary non-decreasing marker, censoring
// interval fields matching the visit history.
std::vector<std::string> validate_record(const ObservedRecord& record);

}  // namespace idmauc
