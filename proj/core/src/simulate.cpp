#include "idmauc/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace idmauc {

namespace {

void check_config(const ScenarioConfig& c) {
  if (c.n_subjects == 0) throw std::invalid_argument("scenario needs n_subjects > 0");
  const auto& w = c.weibull;
  if (!(w.shape > 0.0) || !(w.alpha01 > 0.0) || !(w.alpha02 > 0.0) || !(w.alpha12 > 0.0))
    throw std::invalid_argument("scenario needs positive Weibull shape and rates");
  if (!(c.visit_interval > 0.0)) throw std::invalid_argument("scenario needs visit_interval > 0");
  if (!(c.followup_length > 0.0))
    throw std::invalid_argument("scenario needs followup_length > 0");
  if (const auto* a = std::get_if<AdministrativeCensoring>(&c.censoring)) {
    if (!(a->end > 0.0)) throw std::invalid_argument("administrative censoring needs end > 0");
  } else {
    const auto& u = std::get<UniformCensoring>(c.censoring);
    if (!(0.0 <= u.lower) || !(u.lower < u.upper))
      throw std::invalid_argument("uniform censoring needs 0 <= lower < upper");
  }
}

}  // namespace

SimulatedSubject draw_subject(const ScenarioConfig& config, SplitMix64& stream) {
  const auto& w = config.weibull;
  const double k = w.shape;
  const double rate0 = w.alpha01 + w.alpha02;

  // Exit from state 0: cumulative hazard rate0 * t^k inverted at -log(U).
  double u1 = stream.uniform01();
  double t1 = std::pow(-std::log(u1) / rate0, 1.0 / k);

  bool ill = stream.uniform01() < w.alpha01 / rate0;

  SubjectPath path;
  double death;
  if (ill) {
    // Conditional on illness at t1, survival solves
    // H12(t1, T) = alpha12 * (T^k - t1^k) = -log(U2).
    double u2 = stream.uniform01();
    death = std::pow(std::pow(t1, k) - std::log(u2) / w.alpha12, 1.0 / k);
    path.illness_time = t1;
  } else {
    death = t1;
    path.exit_direct = true;
  }
  path.death_time = death;

  double censor;
  if (const auto* a = std::get_if<AdministrativeCensoring>(&config.censoring)) {
    censor = a->end;
  } else {
    const auto& u = std::get<UniformCensoring>(config.censoring);
    censor = u.lower + (u.upper - u.lower) * stream.uniform01();
  }
  double survival = std::min(death, censor);
  int died = death <= censor ? 1 : 0;

  // Visits attended: the tau-grid points up to the follow-up end.
  const double tau = config.visit_interval;
  double last_visit = std::floor(survival / tau) * tau;
  std::size_t n_visits = static_cast<std::size_t>(std::floor(survival / tau)) + 1;
  std::vector<double> visits(n_visits);
  std::vector<int> marker(n_visits, 0);
  for (std::size_t i = 0; i < n_visits; ++i) visits[i] = static_cast<double>(i) * tau;

  // The marker turns positive at the first attended visit on or after the
  // true illness time; illness after the last attended visit is never seen.
  if (ill && t1 <= last_visit) {
    double first_pos = std::ceil(t1 / tau) * tau;
    for (std::size_t i = 0; i < n_visits; ++i)
      if (visits[i] >= first_pos) marker[i] = 1;
  }

  SimulatedSubject out;
  out.path = path;
  out.record = make_record(std::move(visits), std::move(marker), survival, died);
  return out;
}

std::vector<SimulatedSubject> generate_dataset(const ScenarioConfig& config) {
  check_config(config);
  std::vector<SimulatedSubject> subjects;
  subjects.reserve(config.n_subjects);
  for (std::size_t i = 0; i < config.n_subjects; ++i) {
    SplitMix64 stream = subject_stream(config.seed, i);
    subjects.push_back(draw_subject(config, stream));
  }
  return subjects;
}

std::vector<NamedScenario> scenario_table() {
  const SharedShapeWeibull weibull{0.5, 0.05, 0.05, 0.56};
  const double followup = 120.0;
  struct Block {
    std::size_t n;
    CensoringScheme censoring;
  };
  const Block blocks[] = {
      {1000, UniformCensoring{60.0, 120.0}},
      {1000, AdministrativeCensoring{120.0}},
      {2000, UniformCensoring{60.0, 120.0}},
      {2000, AdministrativeCensoring{120.0}},
      {400, UniformCensoring{60.0, 120.0}},
      {400, AdministrativeCensoring{120.0}},
  };
  const double taus[] = {3.0, 6.0, 12.0};

  std::vector<NamedScenario> table;
  char name = 'A';
  for (const auto& block : blocks) {
    for (double tau : taus) {
      ScenarioConfig cfg;
      cfg.n_subjects = block.n;
      cfg.weibull = weibull;
      cfg.censoring = block.censoring;
      cfg.visit_interval = tau;
      cfg.followup_length = followup;
      table.push_back({std::string(1, name), cfg});
      ++name;
    }
  }
  return table;
}

ScenarioConfig scenario_by_name(const std::string& name) {
  for (const auto& s : scenario_table())
    if (s.name == name) return s.config;
  throw std::invalid_argument("unknown scenario '" + name + "' (expected A..R)");
}

}  // namespace idmauc
