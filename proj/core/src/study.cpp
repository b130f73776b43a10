#include "idmauc/study.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "idmauc/fit.hpp"

namespace idmauc {

std::string estimator_label(Estimator e) {
  switch (e) {
    case Estimator::CoxProb: return "cox-prob";
    case Estimator::CoxRiskset: return "cox-riskset";
    case Estimator::Pwc: return "pwc";
    case Estimator::Weibull: return "weibull";
  }
  throw std::invalid_argument("unknown estimator");
}

Estimator estimator_from_label(const std::string& label) {
  if (label == "cox-prob") return Estimator::CoxProb;
  if (label == "cox-riskset") return Estimator::CoxRiskset;
  if (label == "pwc") return Estimator::Pwc;
  if (label == "weibull") return Estimator::Weibull;
  throw std::invalid_argument("unknown estimator '" + label +
                              "' (expected cox-prob, cox-riskset, pwc, weibull)");
}

std::string AucTarget::label() const {
  std::ostringstream os;
  if (definition == AucDefinition::IncidentDynamic) {
    os << "I/D t=" << time;
  } else {
    os << "C/D (" << time << "," << time + window.value_or(0.0) << ")";
  }
  return os.str();
}

Performance performance(std::span<const double> estimates, double truth) {
  if (estimates.size() < 2) throw std::invalid_argument("insufficient replications");
  const double n = static_cast<double>(estimates.size());
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= n;

  double ss_mean = 0.0, ss_truth = 0.0;
  for (double e : estimates) {
    ss_mean += (e - mean) * (e - mean);
    ss_truth += (e - truth) * (e - truth);
  }
  Performance p;
  p.bias = mean - truth;
  p.emp_se = std::sqrt(ss_mean / (n - 1.0));
  p.rmse = std::sqrt(ss_truth / n);
  return p;
}

IllnessDeathModel truth_model(const SharedShapeWeibull& w) {
  IllnessDeathModel m;
  m.h01 = WeibullHazard{w.alpha01, w.shape};
  m.h02 = WeibullHazard{w.alpha02, w.shape};
  m.h12 = WeibullHazard{w.alpha12, w.shape};
  return m;
}

double oracle_value(const IllnessDeathModel& truth, const AucTarget& target) {
  if (target.definition == AucDefinition::IncidentDynamic) return auc_id(truth, target.time);
  if (!target.window) throw std::invalid_argument("cumulative/dynamic target needs a window");
  return auc_cd(truth, target.time, target.time + *target.window);
}

namespace {

bool target_applies(Estimator e, const AucTarget& t) {
  // The risk-set estimator is defined for incident/dynamic AUC only.
  return !(e == Estimator::CoxRiskset && t.definition == AucDefinition::CumulativeDynamic);
}

// Per-replication estimates laid out [target][replication]; NaN = invalid.
struct EstimatorSlots {
  std::vector<std::vector<double>> values;
};

template <typename Work>
void parallel_replications(std::size_t n_replications, int threads, Work&& work) {
  unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_replications));
  if (n_threads <= 1) {
    for (std::size_t rep = 0; rep < n_replications; ++rep) work(rep);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned i = 0; i < n_threads; ++i) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t rep = next.fetch_add(1);
        if (rep >= n_replications) return;
        work(rep);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<StudyResult> run_scenario(const std::string& scenario_name,
                                      const ScenarioConfig& scenario,
                                      std::span<const Estimator> estimators,
                                      std::span<const AucTarget> targets,
                                      const StudyOptions& options) {
  if (options.n_replications == 0)
    throw std::invalid_argument("run_scenario needs n_replications > 0");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<EstimatorSlots> slots(estimators.size());
  for (auto& s : slots)
    s.values.assign(targets.size(),
                    std::vector<double>(options.n_replications, nan));

  auto evaluate_rep = [&](std::size_t rep) {
    ScenarioConfig cfg = scenario;
    cfg.seed = options.base_seed + rep;
    auto subjects = generate_dataset(cfg);
    std::vector<ObservedRecord> records;
    records.reserve(subjects.size());
    for (auto& s : subjects) records.push_back(std::move(s.record));

    // The two Cox estimators share one partial-likelihood fit per dataset.
    std::optional<CoxTdFit> cox;
    bool cox_failed = false;
    auto cox_fit = [&]() -> const CoxTdFit* {
      if (!cox && !cox_failed) {
        try {
          cox = fit_cox_td(records);
        } catch (const FitError&) {
          cox_failed = true;
        }
      }
      return cox ? &*cox : nullptr;
    };

    for (std::size_t e = 0; e < estimators.size(); ++e) {
      Estimator which = estimators[e];
      std::vector<double> values(targets.size(), nan);
      bool valid = true;
      try {
        const IllnessDeathModel* model = nullptr;
        MleFit mle;
        const CoxTdFit* cox_ptr = nullptr;
        if (which == Estimator::Weibull) {
          mle = fit_weibull_ic(records);
          if (!mle.converged) valid = false;
          model = &mle.model;
        } else if (which == Estimator::Pwc) {
          mle = fit_pwc_panel(records, options.pwc_cutpoints);
          if (!mle.converged) valid = false;
          model = &mle.model;
        } else {
          cox_ptr = cox_fit();
          if (cox_ptr == nullptr) valid = false;
        }

        if (valid) {
          for (std::size_t ti = 0; ti < targets.size(); ++ti) {
            const AucTarget& target = targets[ti];
            if (!target_applies(which, target)) continue;
            double v;
            if (which == Estimator::CoxProb) {
              v = target.definition == AucDefinition::IncidentDynamic
                      ? auc_id_cox(*cox_ptr, target.time)
                      : auc_cd_cox(*cox_ptr, target.time, target.time + *target.window);
            } else if (which == Estimator::CoxRiskset) {
              v = auc_id_riskset(*cox_ptr, records, target.time);
            } else {
              v = target.definition == AucDefinition::IncidentDynamic
                      ? auc_id(*model, target.time)
                      : auc_cd(*model, target.time, target.time + *target.window);
            }
            if (!std::isfinite(v)) {
              valid = false;
              break;
            }
            values[ti] = v;
          }
        }
      } catch (const FitError&) {
        valid = false;
      } catch (const std::domain_error&) {
        valid = false;
      }
      if (valid)
        for (std::size_t ti = 0; ti < targets.size(); ++ti)
          slots[e].values[ti][rep] = values[ti];
    }
  };

  parallel_replications(options.n_replications, options.threads, evaluate_rep);

  IllnessDeathModel truth = truth_model(scenario.weibull);
  std::vector<StudyResult> results;
  results.reserve(estimators.size() * targets.size());
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      if (!target_applies(estimators[e], targets[ti])) continue;
      StudyResult r;
      r.scenario = scenario_name;
      r.estimator = estimator_label(estimators[e]);
      r.target = targets[ti];
      r.truth = oracle_value(truth, targets[ti]);
      r.n_replications = options.n_replications;
      for (double v : slots[e].values[ti])
        if (std::isfinite(v)) r.estimates.push_back(v);
      r.n_valid = r.estimates.size();
      if (r.n_valid >= 2) r.summary = performance(r.estimates, r.truth);
      results.push_back(std::move(r));
    }
  }
  return results;
}

HrStudyResult run_hr_study(const std::string& scenario_name, const ScenarioConfig& scenario,
                           const StudyOptions& options) {
  if (options.n_replications == 0)
    throw std::invalid_argument("run_hr_study needs n_replications > 0");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> cox_hr(options.n_replications, nan);
  std::vector<double> pwc_hr(options.n_replications, nan);

  auto evaluate_rep = [&](std::size_t rep) {
    ScenarioConfig cfg = scenario;
    cfg.seed = options.base_seed + rep;
    auto subjects = generate_dataset(cfg);
    std::vector<ObservedRecord> records;
    records.reserve(subjects.size());
    for (auto& s : subjects) records.push_back(std::move(s.record));

    try {
      cox_hr[rep] = std::exp(fit_cox_td(records).beta);
    } catch (const FitError&) {
    }
    try {
      MleFit fit = fit_pwc_panel(records, options.pwc_cutpoints);
      if (fit.converged) pwc_hr[rep] = std::exp(fit.params.back());
    } catch (const FitError&) {
    }
  };

  parallel_replications(options.n_replications, options.threads, evaluate_rep);

  HrStudyResult out;
  out.scenario = scenario_name;
  out.n_replications = options.n_replications;
  for (double v : cox_hr)
    if (std::isfinite(v)) {
      out.cox_mean_hr += v;
      ++out.cox_valid;
    }
  for (double v : pwc_hr)
    if (std::isfinite(v)) {
      out.pwc_mean_hr += v;
      ++out.pwc_valid;
    }
  if (out.cox_valid > 0) out.cox_mean_hr /= static_cast<double>(out.cox_valid);
  if (out.pwc_valid > 0) out.pwc_mean_hr /= static_cast<double>(out.pwc_valid);
  return out;
}

ReportTable study_report(std::span<const StudyResult> results) {
  ReportTable table;
  table.header = {"scenario", "estimator",  "definition", "time",   "window",
                  "truth",    "bias",       "emp_se",     "rmse",   "n_valid",
                  "n_replications"};
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
  };
  for (const auto& r : results) {
    std::vector<std::string> row;
    row.push_back(r.scenario);
    row.push_back(r.estimator);
    row.push_back(r.target.definition == AucDefinition::IncidentDynamic ? "id" : "cd");
    row.push_back(fmt(r.target.time));
    row.push_back(r.target.window ? fmt(*r.target.window) : "");
    row.push_back(fmt(r.truth));
    if (r.summary) {
      row.push_back(fmt(r.summary->bias));
      row.push_back(fmt(r.summary->emp_se));
      row.push_back(fmt(r.summary->rmse));
    } else {
      row.insert(row.end(), {"", "", ""});
    }
    row.push_back(std::to_string(r.n_valid));
    row.push_back(std::to_string(r.n_replications));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace idmauc
