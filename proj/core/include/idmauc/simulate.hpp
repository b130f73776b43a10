#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "idmauc/rng.hpp"
#include "idmauc/types.hpp"

namespace idmauc {

// Everyone still under follow-up is censored at `end` months.
struct AdministrativeCensoring {
  double end = 0.0;
};

// Censoring time drawn uniformly on [lower, upper]; upper doubles as the end
// of the visit schedule.
struct UniformCensoring {
  double lower = 0.0;
  double upper = 0.0;
};

using CensoringScheme = std::variant<AdministrativeCensoring, UniformCensoring>;

// Weibull intensities with a shape shared by all three transitions:
// h0l(t) = alpha0l * shape * t^(shape-1), h12 likewise.
struct SharedShapeWeibull {
  double shape = 0.0;
  double alpha01 = 0.0;
  double alpha02 = 0.0;
  double alpha12 = 0.0;
};

struct ScenarioConfig {
  std::size_t n_subjects = 0;
  SharedShapeWeibull weibull;
  CensoringScheme censoring;
  double visit_interval = 0.0;   // screening spacing tau, months
  double followup_length = 0.0;  // visit schedule runs over {0, tau, ..., <= this}
  std::uint64_t seed = 0;
};

struct SimulatedSubject {
  SubjectPath path;
  ObservedRecord record;
};

// One subject by inverse transform: time of leaving state 0 is Weibull with
// rate alpha01+alpha02; the exit is an illness with probability
// alpha01/(alpha01+alpha02); post-illness survival continues the shared
// Weibull clock for h12. Screening visits sit on the tau-grid; the subject
// attends every visit up to the censored survival time, and the marker turns
// positive at the first visit on or after the true illness time.
SimulatedSubject draw_subject(const ScenarioConfig& config, SplitMix64& stream);

// Independent per-subject streams derived from config.seed, so the dataset
// is reproducible and any subject can be regenerated in isolation.
std::vector<SimulatedSubject> generate_dataset(const ScenarioConfig& config);

struct NamedScenario {
  std::string name;
  ScenarioConfig config;
};

// The 18 benchmark scenarios A..R: sample sizes 1000/2000/400 crossed with
// uniform-on-(60,120) or administrative-at-120 censoring and visit spacings
// 3, 6, 12 months; intensities shared by all scenarios.
std::vector<NamedScenario> scenario_table();

// Scenario by name (case-sensitive); throws std::invalid_argument if unknown.
ScenarioConfig scenario_by_name(const std::string& name);

}  // namespace idmauc
