#include "idmauc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>

#include "idmauc/optim.hpp"

namespace idmauc {

namespace {

// Rate and shape parameters live on the log scale inside the optimizer;
// mapping back clamps away from exact zero so extreme trial points still
// build a valid (if hopeless) model instead of tripping validation.
double positive_from_log(double v) { return std::max(std::exp(v), 1e-290); }

void require_valid(std::span<const ObservedRecord> records, const char* where) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto issues = validate_record(records[i]);
    if (!issues.empty()) {
      std::ostringstream os;
      os << where << ": record " << i << " is invalid: " << issues.front();
      throw FitError(os.str());
    }
  }
}

// ---------------------------------------------------------------------------
// Cox partial likelihood with the binary time-dependent disease marker.

struct DeathEvent {
  double time = 0.0;
  int deaths = 0;        // tied deaths at this time
  int marker_sum = 0;    // sum of markers of the dying
  double n_total = 0.0;  // subjects at risk
  double n_pos = 0.0;    // at risk with a positive marker
};

// Risk counts per unique death time. A subject is at risk at t when their
// follow-up reaches t (survival_time >= t); their marker at t is
// marker_at(record, t).
std::vector<DeathEvent> death_event_table(std::span<const ObservedRecord> records) {
  std::vector<double> death_times;
  for (const auto& r : records)
    if (r.death_indicator == 1) death_times.push_back(r.survival_time);
  std::sort(death_times.begin(), death_times.end());
  death_times.erase(std::unique(death_times.begin(), death_times.end()), death_times.end());

  std::vector<double> survival_sorted;
  survival_sorted.reserve(records.size());
  for (const auto& r : records) survival_sorted.push_back(r.survival_time);
  std::sort(survival_sorted.begin(), survival_sorted.end());

  // Subjects with a positive marker, processed in first_positive order; the
  // heap tracks which of them have already left follow-up.
  struct Positive {
    double first_positive;
    double survival;
  };
  std::vector<Positive> positives;
  for (const auto& r : records)
    if (r.first_positive) positives.push_back({*r.first_positive, r.survival_time});
  std::sort(positives.begin(), positives.end(),
            [](const Positive& a, const Positive& b) { return a.first_positive < b.first_positive; });

  std::vector<DeathEvent> events;
  events.reserve(death_times.size());
  std::size_t next_pos = 0;
  std::priority_queue<double, std::vector<double>, std::greater<>> exits;
  std::size_t exited = 0;

  for (double t : death_times) {
    while (next_pos < positives.size() && positives[next_pos].first_positive <= t) {
      exits.push(positives[next_pos].survival);
      ++next_pos;
    }
    while (!exits.empty() && exits.top() < t) {
      exits.pop();
      ++exited;
    }
    DeathEvent ev;
    ev.time = t;
    ev.n_total = static_cast<double>(
        survival_sorted.end() -
        std::lower_bound(survival_sorted.begin(), survival_sorted.end(), t));
    ev.n_pos = static_cast<double>(next_pos - exited);
    events.push_back(ev);
  }

  for (const auto& r : records) {
    if (r.death_indicator != 1) continue;
    auto it = std::lower_bound(events.begin(), events.end(), r.survival_time,
                               [](const DeathEvent& e, double t) { return e.time < t; });
    it->deaths += 1;
    it->marker_sum += marker_at(r, r.survival_time);
  }
  return events;
}

// ---------------------------------------------------------------------------
// Interval-censored likelihood machinery.

// Probability evaluations backing ic_loglik: piecewise-constant models take
// the closed-form segment products, other smooth models the quadrature route.
struct ProbBackend {
  const IllnessDeathModel& model;
  bool all_pwc;

  explicit ProbBackend(const IllnessDeathModel& m)
      : model(m),
        all_pwc(is_piecewise(m.h01) && is_piecewise(m.h02) && is_piecewise(m.h12)) {}

  double P00(double a, double b) const { return p00(model, a, b); }
  double P11(double a, double b) const { return p11(model, a, b); }
  double P01(double a, double b) const {
    if (a == b) return 0.0;
    if (all_pwc) return pwc_transition_matrix(model, a, b)(0, 1);
    return p01(model, a, b);
  }
};

struct ParamSpace {
  std::vector<std::string> names;                                   // natural-scale labels
  std::function<IllnessDeathModel(const std::vector<double>&)> build;  // from optimizer coords
  std::vector<double> start;                                        // optimizer coords
  // natural value and derivative d(natural)/d(coord) for delta-method SEs
  std::function<double(std::size_t, double)> natural;
  std::function<double(std::size_t, double)> natural_deriv;
};

MleFit maximize_objective(const ObjectiveFn& objective, const ParamSpace& space,
                          std::vector<std::string> warnings) {
  OptimResult opt = minimize_bfgs(objective, space.start);

  MleFit fit;
  fit.param_names = space.names;
  fit.loglik = -opt.value;
  fit.converged = opt.converged;
  fit.iterations = opt.iterations;
  fit.model = space.build(opt.x);
  fit.warnings = std::move(warnings);
  fit.params.resize(opt.x.size());
  for (std::size_t i = 0; i < opt.x.size(); ++i) fit.params[i] = space.natural(i, opt.x[i]);

  auto hessian = fd_hessian(objective, opt.x, 1e-4);
  bool spd = true;
  std::vector<std::vector<double>> cov(opt.x.size());
  for (std::size_t i = 0; i < opt.x.size() && spd; ++i) {
    std::vector<double> e(opt.x.size(), 0.0);
    e[i] = 1.0;
    if (!solve_linear(hessian, e, cov[i])) spd = false;
  }
  if (spd) {
    for (std::size_t i = 0; i < opt.x.size() && spd; ++i)
      if (!(cov[i][i] > 0.0) || !std::isfinite(cov[i][i])) spd = false;
  }
  if (spd) {
    fit.stderrs.resize(opt.x.size());
    for (std::size_t i = 0; i < opt.x.size(); ++i)
      fit.stderrs[i] = std::abs(space.natural_deriv(i, opt.x[i])) * std::sqrt(cov[i][i]);
  } else {
    fit.warnings.push_back("observed information is singular; standard errors unavailable");
  }
  return fit;
}

MleFit maximize_ic(std::span<const ObservedRecord> records, const ParamSpace& space,
                   std::vector<std::string> warnings) {
  ObjectiveFn objective = [&](const std::vector<double>& x) {
    // Overflowing trial parameters can make the probability integrals
    // numerically unusable; reject such points instead of aborting.
    try {
      double ll = ic_loglik(space.build(x), records);
      return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  return maximize_objective(objective, space, std::move(warnings));
}

struct Exposure {
  double onset_events = 0.0;     // observed diagnoses
  double free_time = 0.0;        // time at risk in state 0 (diagnosis-time convention)
  double free_deaths = 0.0;      // deaths without diagnosis
  double ill_time = 0.0;         // time at risk in state 1
  double ill_deaths = 0.0;       // deaths after diagnosis
};

Exposure total_exposure(std::span<const ObservedRecord> records) {
  Exposure e;
  for (const auto& r : records) {
    if (r.first_positive) {
      e.onset_events += 1.0;
      e.free_time += *r.first_positive;
      e.ill_time += r.survival_time - *r.first_positive;
      e.ill_deaths += r.death_indicator;
    } else {
      e.free_time += r.survival_time;
      e.free_deaths += r.death_indicator;
    }
  }
  return e;
}

void require_identifiable(std::span<const ObservedRecord> records, const char* where) {
  if (records.empty()) throw FitError(std::string(where) + ": no data");
  bool any_illness = false;
  bool any_death = false;
  for (const auto& r : records) {
    any_illness = any_illness || r.first_positive.has_value();
    any_death = any_death || r.death_indicator == 1;
  }
  if (!any_illness)
    throw FitError(std::string(where) + ": no observed illness; onset parameters unidentified");
  if (!any_death)
    throw FitError(std::string(where) + ": no deaths; death parameters unidentified");
}

// Time spent in [lo, hi) out of [0, until).
double overlap(double until, double lo, double hi) {
  return std::max(0.0, std::min(until, hi) - lo);
}

// ---------------------------------------------------------------------------
// Piecewise-constant segment bookkeeping, shared by the piecewise fits.
// Risk time and events are attributed under the diagnosis-time convention
// (illness at first_positive); the fits only use these as degeneracy guards
// and starting values, so the convention does not bias the estimates.

enum class PwcTransition { Onset, FreeDeath, IllDeath };

std::pair<std::vector<double>, std::vector<double>> pwc_segment_stats(
    std::span<const ObservedRecord> records, const std::vector<double>& cuts,
    PwcTransition tr) {
  std::vector<double> lo{0.0};
  lo.insert(lo.end(), cuts.begin(), cuts.end());
  std::vector<double> time(lo.size(), 0.0), events(lo.size(), 0.0);
  auto hi = [&lo](std::size_t s) {
    return s + 1 < lo.size() ? lo[s + 1] : std::numeric_limits<double>::infinity();
  };
  for (const auto& r : records) {
    double onset = r.first_positive.value_or(r.survival_time);
    for (std::size_t s = 0; s < lo.size(); ++s) {
      if (tr == PwcTransition::IllDeath) {
        if (r.first_positive)
          time[s] += overlap(r.survival_time, std::max(lo[s], *r.first_positive), hi(s));
      } else {
        time[s] += overlap(onset, lo[s], hi(s));
      }
    }
    double event_time = -1.0;
    if (tr == PwcTransition::Onset && r.first_positive) event_time = *r.first_positive;
    if (tr == PwcTransition::FreeDeath && !r.first_positive && r.death_indicator)
      event_time = r.survival_time;
    if (tr == PwcTransition::IllDeath && r.first_positive && r.death_indicator)
      event_time = r.survival_time;
    if (event_time >= 0.0) {
      std::size_t s = static_cast<std::size_t>(
          std::upper_bound(cuts.begin(), cuts.end(), event_time) - cuts.begin());
      events[s] += 1.0;
    }
  }
  return {time, events};
}

std::vector<double> prune_empty_segments(std::span<const ObservedRecord> records,
                                         std::vector<double> cuts, PwcTransition tr,
                                         std::vector<std::string>& warnings) {
  const char* label = tr == PwcTransition::Onset       ? "01"
                      : tr == PwcTransition::FreeDeath ? "02"
                                                       : "12";
  for (;;) {
    auto [time, events] = pwc_segment_stats(records, cuts, tr);
    std::size_t empty = time.size();
    for (std::size_t s = 0; s < time.size(); ++s)
      if (time[s] <= 0.0) {
        empty = s;
        break;
      }
    if (empty == time.size() || cuts.empty()) return cuts;
    std::size_t drop = empty == 0 ? 0 : empty - 1;
    std::ostringstream os;
    os << "transition " << label << ": segment starting at "
       << (empty == 0 ? 0.0 : cuts[empty - 1])
       << " has no risk time; merged into its neighbor";
    warnings.push_back(os.str());
    cuts.erase(cuts.begin() + static_cast<std::ptrdiff_t>(drop));
  }
}

std::vector<double> pwc_start_rates(std::span<const ObservedRecord> records,
                                    const std::vector<double>& cuts, PwcTransition tr) {
  auto [time, events] = pwc_segment_stats(records, cuts, tr);
  std::vector<double> rates(time.size());
  for (std::size_t s = 0; s < rates.size(); ++s)
    rates[s] = std::max(events[s], 0.5) / std::max(time[s], 1e-8);
  return rates;
}

std::string pwc_segment_label(const char* tr, const std::vector<double>& cuts, std::size_t s) {
  std::ostringstream os;
  os << "rate" << tr << "[" << (s == 0 ? 0.0 : cuts[s - 1]) << "..";
  if (s < cuts.size())
    os << cuts[s];
  else
    os << "inf";
  os << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// Panel likelihood for fit_pwc_panel. Every term is a closed form in the
// piecewise-constant cumulative hazards, so no quadrature is involved.

double pwc_cumhaz(const PiecewiseConstantHazard& h, double a, double b) {
  double total = 0.0;
  for (std::size_t s = 0; s < h.rates.size(); ++s) {
    double lo = s == 0 ? 0.0 : h.cutpoints[s - 1];
    double hi = s < h.cutpoints.size() ? h.cutpoints[s]
                                       : std::numeric_limits<double>::infinity();
    double w = std::min(b, hi) - std::max(a, lo);
    if (w > 0.0) total += h.rates[s] * w;
  }
  return total;
}

// Probability of moving 0 -> 1 somewhere in (a, b] and being alive at b,
// when the not-yet-diagnosed ill subject keeps the state-0 death rate h02.
// Because the death rate is the same before and after the (latent) onset,
// the onset-time integral telescopes: the death survival factors combine
// into exp(-H02(a,b)) regardless of where the onset lands.
double onset_alive_mass(const PiecewiseConstantHazard& h01,
                        const PiecewiseConstantHazard& h02, double a, double b) {
  if (!(b > a)) return 0.0;
  return std::exp(-pwc_cumhaz(h02, a, b)) * (-std::expm1(-pwc_cumhaz(h01, a, b)));
}

// Log-likelihood of the records under the panel-observation scheme: state 0
// confirmed at every negative visit, onset latent within
// (last_negative, first_positive], the death rate switching to
// exp(beta) * h02 only at the diagnosing visit, and a death scored as "in
// the dead state at survival_time given the state at the last attended
// visit before it" rather than as an exact event time.
double panel_loglik(const PiecewiseConstantHazard& h01, const PiecewiseConstantHazard& h02,
                    double beta, std::span<const ObservedRecord> records) {
  const double hr = std::exp(std::clamp(beta, -600.0, 600.0));
  double ll = 0.0;
  for (const auto& r : records) {
    const double T = r.survival_time;
    double contrib;
    if (!r.first_positive) {
      if (r.death_indicator) {
        // Negative at every visit, dead at T: no onset or death through the
        // last visit v before T, then "dead at T" from state 0 -- either a
        // direct death or an undiagnosed onset followed by death.
        double v = 0.0;
        for (double vt : r.visit_times)
          if (vt < T && vt > v) v = vt;
        double head = std::exp(-pwc_cumhaz(h01, 0.0, v) - pwc_cumhaz(h02, 0.0, v));
        double c01 = pwc_cumhaz(h01, v, T), c02 = pwc_cumhaz(h02, v, T);
        contrib = head * (-std::expm1(-c01 - c02) - onset_alive_mass(h01, h02, v, T));
      } else {
        // Negative at every visit, alive at T: clean through the last
        // negative visit, then either still disease-free or an undetected
        // onset, alive either way.
        double L = r.last_negative.value_or(0.0);
        double head = std::exp(-pwc_cumhaz(h01, 0.0, L) - pwc_cumhaz(h02, 0.0, L));
        double c01 = pwc_cumhaz(h01, L, T), c02 = pwc_cumhaz(h02, L, T);
        contrib = head * (std::exp(-c01 - c02) + onset_alive_mass(h01, h02, L, T));
      }
    } else {
      const double R = *r.first_positive;
      const double L = r.last_negative.value_or(0.0);
      double head = std::exp(-pwc_cumhaz(h01, 0.0, L) - pwc_cumhaz(h02, 0.0, L)) *
                    onset_alive_mass(h01, h02, L, R);
      if (r.death_indicator) {
        // Diagnosed at R, dead at T: survive on the raised rate to the last
        // attended visit v before death, then "dead at T given alive at v".
        // If no visit separates R from T the death interval is (R, T].
        double v = R;
        for (double vt : r.visit_times)
          if (vt < T && vt > v) v = vt;
        double death = v < T ? -std::expm1(-hr * pwc_cumhaz(h02, v, T)) : 1.0;
        contrib = head * std::exp(-hr * pwc_cumhaz(h02, R, v)) * death;
      } else {
        contrib = head * std::exp(-hr * pwc_cumhaz(h02, R, T));
      }
    }
    if (!(contrib > 0.0) || !std::isfinite(contrib))
      return -std::numeric_limits<double>::infinity();
    ll += std::log(contrib);
  }
  return ll;
}

}  // namespace

StepCumulativeHazard CoxTdFit::cumhaz12() const {
  StepCumulativeHazard h = baseline02;
  double hr = std::exp(beta);
  for (double& inc : h.increments) inc *= hr;
  return h;
}

CoxTdFit fit_cox_td(std::span<const ObservedRecord> records) {
  require_valid(records, "fit_cox_td");
  auto events = death_event_table(records);
  if (events.empty()) throw FitError("fit_cox_td: no deaths in the data");

  bool informative = false;
  for (const auto& ev : events)
    if (ev.n_pos > 0.0 && ev.n_pos < ev.n_total) informative = true;
  if (!informative) throw FitError("fit_cox_td: marker constant in every risk set");

  double beta = 0.0;
  double info = 0.0;
  int iter = 0;
  const double score_tol = 1e-9 * std::max<double>(1.0, events.size());
  for (; iter < 100; ++iter) {
    double hr = std::exp(beta);
    double score = 0.0;
    info = 0.0;
    for (const auto& ev : events) {
      double n_neg = ev.n_total - ev.n_pos;
      double denom = n_neg + ev.n_pos * hr;
      score += ev.marker_sum - ev.deaths * ev.n_pos * hr / denom;
      info += ev.deaths * n_neg * ev.n_pos * hr / (denom * denom);
    }
    if (std::abs(score) < score_tol) break;
    if (info <= 0.0) throw FitError("fit_cox_td: information vanished during Newton iteration");
    double step = score / info;
    step = std::clamp(step, -1.0, 1.0);
    beta += step;
    if (std::abs(beta) > 20.0)
      throw FitError("fit_cox_td: partial likelihood is monotone in beta (no finite optimum)");
    if (iter == 99) {
      std::ostringstream os;
      os << "fit_cox_td: Newton failed to converge in 100 steps; |score| = " << std::abs(score);
      throw FitError(os.str());
    }
  }

  CoxTdFit fit;
  fit.beta = beta;
  fit.beta_se = info > 0.0 ? 1.0 / std::sqrt(info) : 0.0;
  fit.iterations = iter;

  double hr = std::exp(beta);
  fit.loglik = 0.0;
  fit.baseline02.jump_times.reserve(events.size());
  fit.baseline02.increments.reserve(events.size());
  for (const auto& ev : events) {
    double denom = (ev.n_total - ev.n_pos) + ev.n_pos * hr;
    fit.loglik += beta * ev.marker_sum - ev.deaths * std::log(denom);
    fit.baseline02.jump_times.push_back(ev.time);
    fit.baseline02.increments.push_back(ev.deaths / denom);
  }

  // Nelson-Aalen for observed illness: events at first_positive times, risk
  // set = alive and not yet marker-positive.
  std::vector<double> onset_times;
  for (const auto& r : records)
    if (r.first_positive) onset_times.push_back(*r.first_positive);
  std::sort(onset_times.begin(), onset_times.end());

  std::vector<double> survival_sorted;
  survival_sorted.reserve(records.size());
  for (const auto& r : records) survival_sorted.push_back(r.survival_time);
  std::sort(survival_sorted.begin(), survival_sorted.end());

  for (std::size_t i = 0; i < onset_times.size();) {
    double u = onset_times[i];
    std::size_t j = i;
    while (j < onset_times.size() && onset_times[j] == u) ++j;
    double alive = static_cast<double>(
        survival_sorted.end() -
        std::lower_bound(survival_sorted.begin(), survival_sorted.end(), u));
    // i = diagnoses strictly before u among subjects whose survival >= u: every
    // earlier-diagnosed subject still alive is no longer disease-free.
    double diagnosed_alive = 0.0;
    for (const auto& r : records)
      if (r.first_positive && *r.first_positive < u && r.survival_time >= u)
        diagnosed_alive += 1.0;
    double at_risk = alive - diagnosed_alive;
    if (at_risk > 0.0) {
      fit.cumhaz01.jump_times.push_back(u);
      fit.cumhaz01.increments.push_back(static_cast<double>(j - i) / at_risk);
    }
    i = j;
  }
  return fit;
}

double ic_loglik(const IllnessDeathModel& model, std::span<const ObservedRecord> records,
                 std::vector<std::string>* diagnostics) {
  ProbBackend prob(model);
  double total = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.last_negative) {
      std::ostringstream os;
      os << "record " << i << " has no last negative visit";
      throw FitError(os.str());
    }
    const double L = *r.last_negative;
    const double T = r.survival_time;
    const bool died = r.death_indicator == 1;

    double contribution;
    if (r.first_positive) {
      const double R = *r.first_positive;
      contribution = prob.P00(0.0, L) * prob.P01(L, R) * prob.P11(R, T);
      if (died) contribution *= hazard_at(model.h12, T);
    } else {
      double stay = prob.P00(L, T);
      double moved = prob.P01(L, T);
      double bracket = died ? stay * hazard_at(model.h02, T) + moved * hazard_at(model.h12, T)
                            : stay + moved;
      contribution = prob.P00(0.0, L) * bracket;
    }

    if (!(contribution > 0.0) || !std::isfinite(contribution)) {
      if (diagnostics) {
        std::ostringstream os;
        os << "record " << i << ": zero-probability contribution (pattern "
           << (r.first_positive ? (died ? "d" : "c") : (died ? "b" : "a")) << ", L=" << L
           << (r.first_positive ? ", R=" + std::to_string(*r.first_positive) : std::string())
           << ", T=" << T << ")";
        diagnostics->push_back(os.str());
      }
      return -std::numeric_limits<double>::infinity();
    }
    total += std::log(contribution);
  }
  return total;
}

MleFit fit_weibull_ic(std::span<const ObservedRecord> records,
                      std::optional<std::vector<double>> init) {
  require_valid(records, "fit_weibull_ic");
  require_identifiable(records, "fit_weibull_ic");

  std::vector<double> start_natural;
  if (init) {
    if (init->size() != 6)
      throw FitError("fit_weibull_ic: init needs 6 values (alpha, shape per transition)");
    for (double v : *init)
      if (!(v > 0.0)) throw FitError("fit_weibull_ic: init values must be positive");
    start_natural = *init;
  } else {
    Exposure e = total_exposure(records);
    auto rate = [](double events, double time) {
      return std::max(events, 0.5) / std::max(time, 1e-8);
    };
    start_natural = {rate(e.onset_events, e.free_time), 1.0,
                     rate(e.free_deaths, e.free_time), 1.0,
                     rate(e.ill_deaths, e.ill_time),   1.0};
  }

  ParamSpace space;
  space.names = {"alpha01", "shape01", "alpha02", "shape02", "alpha12", "shape12"};
  space.start.resize(6);
  for (std::size_t i = 0; i < 6; ++i) space.start[i] = std::log(start_natural[i]);
  space.build = [](const std::vector<double>& x) {
    IllnessDeathModel m;
    m.h01 = WeibullHazard{positive_from_log(x[0]), positive_from_log(x[1])};
    m.h02 = WeibullHazard{positive_from_log(x[2]), positive_from_log(x[3])};
    m.h12 = WeibullHazard{positive_from_log(x[4]), positive_from_log(x[5])};
    return m;
  };
  space.natural = [](std::size_t, double x) { return positive_from_log(x); };
  space.natural_deriv = [](std::size_t, double x) { return std::exp(x); };

  return maximize_ic(records, space, {});
}

MleFit fit_pwc_ic(std::span<const ObservedRecord> records, const PwcSpec& spec) {
  require_valid(records, "fit_pwc_ic");
  require_identifiable(records, "fit_pwc_ic");

  std::vector<std::string> warnings;
  std::vector<double> cuts01 =
      prune_empty_segments(records, spec.cutpoints01, PwcTransition::Onset, warnings);
  std::vector<double> cuts02 =
      prune_empty_segments(records, spec.cutpoints02, PwcTransition::FreeDeath, warnings);
  std::vector<double> cuts12 =
      spec.proportional
          ? cuts02
          : prune_empty_segments(records, spec.cutpoints12, PwcTransition::IllDeath, warnings);

  std::vector<double> r01 = pwc_start_rates(records, cuts01, PwcTransition::Onset);
  std::vector<double> r02 = pwc_start_rates(records, cuts02, PwcTransition::FreeDeath);

  ParamSpace space;
  const std::size_t n01 = r01.size(), n02 = r02.size();
  for (std::size_t s = 0; s < n01; ++s) {
    space.names.push_back(pwc_segment_label("01", cuts01, s));
    space.start.push_back(std::log(r01[s]));
  }
  for (std::size_t s = 0; s < n02; ++s) {
    space.names.push_back(pwc_segment_label("02", cuts02, s));
    space.start.push_back(std::log(r02[s]));
  }

  if (spec.proportional) {
    Exposure e = total_exposure(records);
    double crude_hr = (std::max(e.ill_deaths, 0.5) / std::max(e.ill_time, 1e-8)) /
                      (std::max(e.free_deaths, 0.5) / std::max(e.free_time, 1e-8));
    space.names.push_back("beta");
    space.start.push_back(std::clamp(std::log(crude_hr), -3.0, 3.0));

    space.build = [cuts01, cuts02, n01, n02](const std::vector<double>& x) {
      IllnessDeathModel m;
      std::vector<double> v01(n01), v02(n02), v12(n02);
      for (std::size_t s = 0; s < n01; ++s) v01[s] = positive_from_log(x[s]);
      double hr = std::exp(std::clamp(x[n01 + n02], -600.0, 600.0));
      for (std::size_t s = 0; s < n02; ++s) {
        v02[s] = positive_from_log(x[n01 + s]);
        v12[s] = std::max(v02[s] * hr, 1e-290);
      }
      m.h01 = PiecewiseConstantHazard{cuts01, std::move(v01)};
      m.h02 = PiecewiseConstantHazard{cuts02, std::move(v02)};
      m.h12 = PiecewiseConstantHazard{cuts02, std::move(v12)};
      return m;
    };
    const std::size_t beta_index = n01 + n02;
    space.natural = [beta_index](std::size_t i, double x) {
      return i == beta_index ? x : positive_from_log(x);
    };
    space.natural_deriv = [beta_index](std::size_t i, double x) {
      return i == beta_index ? 1.0 : std::exp(x);
    };
  } else {
    std::vector<double> r12 = pwc_start_rates(records, cuts12, PwcTransition::IllDeath);
    const std::size_t n12 = r12.size();
    for (std::size_t s = 0; s < n12; ++s) {
      space.names.push_back(pwc_segment_label("12", cuts12, s));
      space.start.push_back(std::log(r12[s]));
    }
    space.build = [cuts01, cuts02, cuts12, n01, n02, n12](const std::vector<double>& x) {
      IllnessDeathModel m;
      std::vector<double> v01(n01), v02(n02), v12(n12);
      for (std::size_t s = 0; s < n01; ++s) v01[s] = positive_from_log(x[s]);
      for (std::size_t s = 0; s < n02; ++s) v02[s] = positive_from_log(x[n01 + s]);
      for (std::size_t s = 0; s < n12; ++s) v12[s] = positive_from_log(x[n01 + n02 + s]);
      m.h01 = PiecewiseConstantHazard{cuts01, std::move(v01)};
      m.h02 = PiecewiseConstantHazard{cuts02, std::move(v02)};
      m.h12 = PiecewiseConstantHazard{cuts12, std::move(v12)};
      return m;
    };
    space.natural = [](std::size_t, double x) { return positive_from_log(x); };
    space.natural_deriv = [](std::size_t, double x) { return std::exp(x); };
  }

  return maximize_ic(records, space, std::move(warnings));
}

MleFit fit_pwc_panel(std::span<const ObservedRecord> records,
                     const std::vector<double>& cutpoints) {
  require_valid(records, "fit_pwc_panel");
  require_identifiable(records, "fit_pwc_panel");

  std::vector<std::string> warnings;
  std::vector<double> cuts01 =
      prune_empty_segments(records, cutpoints, PwcTransition::Onset, warnings);
  std::vector<double> cuts02 =
      prune_empty_segments(records, cutpoints, PwcTransition::FreeDeath, warnings);

  std::vector<double> r01 = pwc_start_rates(records, cuts01, PwcTransition::Onset);
  std::vector<double> r02 = pwc_start_rates(records, cuts02, PwcTransition::FreeDeath);

  ParamSpace space;
  const std::size_t n01 = r01.size(), n02 = r02.size();
  for (std::size_t s = 0; s < n01; ++s) {
    space.names.push_back(pwc_segment_label("01", cuts01, s));
    space.start.push_back(std::log(r01[s]));
  }
  for (std::size_t s = 0; s < n02; ++s) {
    space.names.push_back(pwc_segment_label("02", cuts02, s));
    space.start.push_back(std::log(r02[s]));
  }
  Exposure e = total_exposure(records);
  double crude_hr = (std::max(e.ill_deaths, 0.5) / std::max(e.ill_time, 1e-8)) /
                    (std::max(e.free_deaths, 0.5) / std::max(e.free_time, 1e-8));
  space.names.push_back("beta");
  space.start.push_back(std::clamp(std::log(crude_hr), -3.0, 3.0));

  space.build = [cuts01, cuts02, n01, n02](const std::vector<double>& x) {
    IllnessDeathModel m;
    std::vector<double> v01(n01), v02(n02), v12(n02);
    for (std::size_t s = 0; s < n01; ++s) v01[s] = positive_from_log(x[s]);
    double hr = std::exp(std::clamp(x[n01 + n02], -600.0, 600.0));
    for (std::size_t s = 0; s < n02; ++s) {
      v02[s] = positive_from_log(x[n01 + s]);
      v12[s] = std::max(v02[s] * hr, 1e-290);
    }
    m.h01 = PiecewiseConstantHazard{cuts01, std::move(v01)};
    m.h02 = PiecewiseConstantHazard{cuts02, std::move(v02)};
    m.h12 = PiecewiseConstantHazard{cuts02, std::move(v12)};
    return m;
  };
  const std::size_t beta_index = n01 + n02;
  space.natural = [beta_index](std::size_t i, double x) {
    return i == beta_index ? x : positive_from_log(x);
  };
  space.natural_deriv = [beta_index](std::size_t i, double x) {
    return i == beta_index ? 1.0 : std::exp(x);
  };

  ObjectiveFn objective = [&records, cuts01, cuts02, n01, n02](const std::vector<double>& x) {
    try {
      PiecewiseConstantHazard h01{cuts01, std::vector<double>(n01)};
      PiecewiseConstantHazard h02{cuts02, std::vector<double>(n02)};
      for (std::size_t s = 0; s < n01; ++s) h01.rates[s] = positive_from_log(x[s]);
      for (std::size_t s = 0; s < n02; ++s) h02.rates[s] = positive_from_log(x[n01 + s]);
      double ll = panel_loglik(h01, h02, x[n01 + n02], records);
      return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  return maximize_objective(objective, space, std::move(warnings));
}

TransitionNelsonAalen nelson_aalen_by_transition(std::span<const ObservedRecord> records) {
  require_valid(records, "nelson_aalen_by_transition");

  // Event times per transition under the diagnosis-time convention.
  struct Spell {
    double enter;  // time the subject enters the origin state
    double leave;  // time they leave it (event or censoring)
  };
  auto estimate = [](std::vector<std::pair<double, double>> events,  // (time, count)
                     std::vector<Spell> spells) {
    StepCumulativeHazard h;
    std::sort(events.begin(), events.end());
    for (std::size_t i = 0; i < events.size();) {
      double u = events[i].first;
      double count = 0.0;
      std::size_t j = i;
      for (; j < events.size() && events[j].first == u; ++j) count += events[j].second;
      double at_risk = 0.0;
      for (const auto& sp : spells)
        if (sp.enter < u && u <= sp.leave) at_risk += 1.0;
      if (at_risk > 0.0) {
        h.jump_times.push_back(u);
        h.increments.push_back(count / at_risk);
      }
      i = j;
    }
    return h;
  };

  std::vector<std::pair<double, double>> ev01, ev02, ev12;
  std::vector<Spell> free_spells, ill_spells;
  for (const auto& r : records) {
    double onset = r.first_positive.value_or(r.survival_time);
    free_spells.push_back({-1.0, onset});  // at risk from time 0 (enter < u for all u > 0)
    if (r.first_positive) {
      ev01.emplace_back(*r.first_positive, 1.0);
      ill_spells.push_back({*r.first_positive, r.survival_time});
      if (r.death_indicator) ev12.emplace_back(r.survival_time, 1.0);
    } else if (r.death_indicator) {
      ev02.emplace_back(r.survival_time, 1.0);
    }
  }

  TransitionNelsonAalen out;
  out.h01 = estimate(ev01, free_spells);
  out.h02 = estimate(ev02, free_spells);
  out.h12 = estimate(ev12, ill_spells);
  return out;
}

double gradient_check_weibull_ic(std::span<const ObservedRecord> records,
                                 const std::vector<double>& params) {
  if (params.size() != 6)
    throw std::invalid_argument("gradient_check_weibull_ic needs 6 natural parameters");
  std::vector<double> x(6);
  for (std::size_t i = 0; i < 6; ++i) {
    if (!(params[i] > 0.0))
      throw std::invalid_argument("gradient_check_weibull_ic needs positive parameters");
    x[i] = std::log(params[i]);
  }
  ObjectiveFn objective = [&records](const std::vector<double>& p) {
    IllnessDeathModel m;
    m.h01 = WeibullHazard{std::exp(p[0]), std::exp(p[1])};
    m.h02 = WeibullHazard{std::exp(p[2]), std::exp(p[3])};
    m.h12 = WeibullHazard{std::exp(p[4]), std::exp(p[5])};
    double ll = ic_loglik(m, records);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };
  return gradient_check(objective, x);
}

}  // namespace idmauc
