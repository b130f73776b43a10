// Microbenchmarks for the numerical hot paths: transition probabilities,
// the interval-censored likelihoods, AUC evaluation, simulation, and the
// estimators themselves on a study-sized dataset.

#include <benchmark/benchmark.h>

#include <vector>

#include "idmauc/auc.hpp"
#include "idmauc/fit.hpp"
#include "idmauc/simulate.hpp"
#include "idmauc/transprob.hpp"

namespace {

using namespace idmauc;

IllnessDeathModel weibull_truth() {
  IllnessDeathModel m;
  m.h01 = WeibullHazard{0.05, 0.5};
  m.h02 = WeibullHazard{0.05, 0.5};
  m.h12 = WeibullHazard{0.56, 0.5};
  return m;
}

IllnessDeathModel study_pwc_model() {
  IllnessDeathModel m;
  m.h01 = PiecewiseConstantHazard{{6.0, 30.0, 60.0, 90.0},
                                  {0.012, 0.008, 0.006, 0.005, 0.004}};
  m.h02 = PiecewiseConstantHazard{{6.0, 30.0, 60.0, 90.0},
                                  {0.010, 0.007, 0.0055, 0.005, 0.0045}};
  m.h12 = PiecewiseConstantHazard{{6.0, 30.0, 60.0, 90.0},
                                  {0.09, 0.07, 0.05, 0.045, 0.04}};
  return m;
}

ScenarioConfig dataset_config(std::size_t n, std::uint64_t seed) {
  ScenarioConfig config;
  config.n_subjects = n;
  config.weibull = {0.5, 0.05, 0.05, 0.56};
  config.censoring = UniformCensoring{60.0, 120.0};
  config.visit_interval = 3.0;
  config.followup_length = 120.0;
  config.seed = seed;
  return config;
}

std::vector<ObservedRecord> records_of(const ScenarioConfig& config) {
  std::vector<ObservedRecord> records;
  for (auto& subject : generate_dataset(config)) records.push_back(std::move(subject.record));
  return records;
}

void bm_transition_matrix_weibull(benchmark::State& state) {
  const IllnessDeathModel model = weibull_truth();
  for (auto _ : state) benchmark::DoNotOptimize(transition_matrix(model, 0.0, 60.0));
}
BENCHMARK(bm_transition_matrix_weibull);

void bm_transition_matrix_pwc(benchmark::State& state) {
  const IllnessDeathModel model = study_pwc_model();
  for (auto _ : state) benchmark::DoNotOptimize(pwc_transition_matrix(model, 0.0, 60.0));
}
BENCHMARK(bm_transition_matrix_pwc);

void bm_aalen_johansen(benchmark::State& state) {
  const auto records = records_of(dataset_config(500, 11));
  const CoxTdFit fit = fit_cox_td(records);
  const StepCumulativeHazard h01 = fit.cumhaz01;
  const StepCumulativeHazard h02 = fit.baseline02;
  const StepCumulativeHazard h12 = fit.cumhaz12();
  for (auto _ : state) benchmark::DoNotOptimize(aalen_johansen(h01, h02, h12, 0.0, 60.0));
}
BENCHMARK(bm_aalen_johansen);

void bm_ic_loglik(benchmark::State& state) {
  const auto records = records_of(dataset_config(100, 21));
  const IllnessDeathModel model = weibull_truth();
  for (auto _ : state) benchmark::DoNotOptimize(ic_loglik(model, records));
}
BENCHMARK(bm_ic_loglik);

void bm_auc_id_truth(benchmark::State& state) {
  const IllnessDeathModel model = weibull_truth();
  for (auto _ : state) benchmark::DoNotOptimize(auc_id(model, 36.0));
}
BENCHMARK(bm_auc_id_truth);

void bm_generate_dataset(benchmark::State& state) {
  const ScenarioConfig config = dataset_config(1000, 31);
  for (auto _ : state) benchmark::DoNotOptimize(generate_dataset(config));
}
BENCHMARK(bm_generate_dataset);

void bm_fit_cox(benchmark::State& state) {
  const auto records = records_of(dataset_config(1000, 41));
  for (auto _ : state) benchmark::DoNotOptimize(fit_cox_td(records));
}
BENCHMARK(bm_fit_cox);

void bm_fit_weibull_ic(benchmark::State& state) {
  const auto records = records_of(dataset_config(400, 51));
  for (auto _ : state) benchmark::DoNotOptimize(fit_weibull_ic(records));
}
BENCHMARK(bm_fit_weibull_ic);

void bm_fit_pwc_panel(benchmark::State& state) {
  const auto records = records_of(dataset_config(400, 61));
  const std::vector<double> cutpoints{30.0};
  for (auto _ : state) benchmark::DoNotOptimize(fit_pwc_panel(records, cutpoints));
}
BENCHMARK(bm_fit_pwc_panel);

}  // namespace

BENCHMARK_MAIN();
