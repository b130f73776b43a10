#include "idmauc/types.hpp"

#include <cmath>
#include <sstream>

namespace idmauc {

ObservedRecord make_record(std::vector<double> visit_times, std::vector<int> marker,
                           double survival_time, int death_indicator) {
  ObservedRecord rec;
  rec.visit_times = std::move(visit_times);
  rec.marker = std::move(marker);
  rec.survival_time = survival_time;
  rec.death_indicator = death_indicator;
  for (std::size_t i = 0; i < rec.marker.size() && i < rec.visit_times.size(); ++i) {
    if (rec.marker[i] == 1) {
      rec.first_positive = rec.visit_times[i];
      if (i > 0) rec.last_negative = rec.visit_times[i - 1];
      break;
    }
  }
  if (!rec.first_positive && !rec.visit_times.empty()) {
    rec.last_negative = rec.visit_times.back();
  }
  return rec;
}

int marker_at(const ObservedRecord& record, double t) {
  return record.first_positive && *record.first_positive <= t ? 1 : 0;
}

std::vector<std::string> validate_record(const ObservedRecord& record) {
  std::vector<std::string> issues;
  auto add = [&issues](const std::string& msg) { issues.push_back(msg); };

  if (record.visit_times.empty()) add("record has no visits");
  if (record.visit_times.size() != record.marker.size())
    add("visit_times and marker lengths differ");
  if (!(record.survival_time > 0.0) || !std::isfinite(record.survival_time))
    add("survival_time must be positive and finite");
  if (record.death_indicator != 0 && record.death_indicator != 1)
    add("death_indicator must be 0 or 1");

  for (std::size_t i = 0; i < record.visit_times.size(); ++i) {
    double v = record.visit_times[i];
    if (!std::isfinite(v) || v < 0.0) {
      add("visit times must be finite and non-negative");
      break;
    }
    if (i > 0 && !(record.visit_times[i - 1] < v)) {
      add("visit times must be strictly increasing");
      break;
    }
    if (v > record.survival_time) {
      std::ostringstream os;
      os << "visit at " << v << " exceeds survival_time " << record.survival_time;
      add(os.str());
      break;
    }
  }

  bool any_positive = false;
  for (std::size_t i = 0; i < record.marker.size(); ++i) {
    int m = record.marker[i];
    if (m != 0 && m != 1) {
      add("marker values must be 0 or 1");
      break;
    }
    if (i > 0 && m < record.marker[i - 1]) {
      add("marker must be non-decreasing (disease is irreversible)");
      break;
    }
    if (m == 1) any_positive = true;
  }

  if (any_positive != record.first_positive.has_value())
    add("first_positive must be present exactly when some marker is 1");

  if (record.first_positive) {
    if (!record.last_negative) {
      add("last_negative missing for a marker-positive record");
    } else if (!(*record.last_negative < *record.first_positive)) {
      add("last_negative must precede first_positive");
    }
    if (*record.first_positive > record.survival_time)
      add("first_positive exceeds survival_time");
  } else if (!record.visit_times.empty() && record.last_negative &&
             *record.last_negative != record.visit_times.back()) {
    add("last_negative must equal the final visit when no marker is positive");
  }
  return issues;
}

}  // namespace idmauc
