#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "idmauc/study.hpp"
#include "test_helpers.hpp"

using namespace idmauc;
using namespace idmauc::testing;

TEST_CASE("performance summaries match hand-computed bias, SE, and RMSE") {
  SUBCASE("symmetric spread around the truth") {
    std::vector<double> est{0.70, 0.72, 0.74};
    Performance p = performance(est, 0.72);
    CHECK(p.bias == doctest::Approx(0.0));
    CHECK(p.emp_se == doctest::Approx(0.02).epsilon(1e-12));
    // RMSE uses the n-denominator: sqrt((4e-4 + 0 + 4e-4)/3).
    CHECK(p.rmse == doctest::Approx(std::sqrt(8e-4 / 3.0)).epsilon(1e-12));
  }
  SUBCASE("identical estimates at the truth") {
    std::vector<double> est{0.6, 0.6, 0.6, 0.6};
    Performance p = performance(est, 0.6);
    CHECK(p.bias == 0.0);
    CHECK(p.emp_se == 0.0);
    CHECK(p.rmse == 0.0);
  }
  SUBCASE("a constant offset is pure bias") {
    std::vector<double> est{0.65, 0.65};
    Performance p = performance(est, 0.72);
    CHECK(p.bias == doctest::Approx(-0.07).epsilon(1e-12));
    CHECK(p.emp_se == 0.0);
    CHECK(p.rmse == doctest::Approx(0.07).epsilon(1e-12));
  }
  SUBCASE("the decomposition rmse^2 = bias^2 + se^2 (n-1)/n holds") {
    std::vector<double> est{0.61, 0.55, 0.72, 0.66, 0.59, 0.70, 0.63};
    Performance p = performance(est, 0.64);
    double n = static_cast<double>(est.size());
    CHECK(p.rmse * p.rmse ==
          doctest::Approx(p.bias * p.bias + p.emp_se * p.emp_se * (n - 1.0) / n)
              .epsilon(1e-12));
  }
  SUBCASE("fewer than two estimates cannot be summarized") {
    std::vector<double> one{0.6};
    CHECK_THROWS_WITH_AS(performance(one, 0.6), "insufficient replications",
                         std::invalid_argument);
  }
}

TEST_CASE("estimator labels round-trip") {
  for (Estimator e : {Estimator::CoxProb, Estimator::CoxRiskset, Estimator::Pwc,
                      Estimator::Weibull}) {
    CHECK(estimator_from_label(estimator_label(e)) == e);
  }
  CHECK(estimator_label(Estimator::CoxProb) == "cox-prob");
  CHECK(estimator_label(Estimator::Pwc) == "pwc");
  CHECK_THROWS_AS(estimator_from_label("nonsense"), std::invalid_argument);
}

TEST_CASE("target labels spell out the definition and window") {
  AucTarget id{AucDefinition::IncidentDynamic, 12.0, std::nullopt};
  CHECK(id.label() == "I/D t=12");
  AucTarget cd{AucDefinition::CumulativeDynamic, 12.0, 60.0};
  CHECK(cd.label() == "C/D (12,72)");
}

TEST_CASE("oracle values evaluate the truth model at the target") {
  IllnessDeathModel truth = truth_model(benchmark_weibull());
  AucTarget id{AucDefinition::IncidentDynamic, 36.0, std::nullopt};
  CHECK(oracle_value(truth, id) == doctest::Approx(auc_id(truth, 36.0)).epsilon(1e-12));
  AucTarget cd{AucDefinition::CumulativeDynamic, 12.0, 60.0};
  CHECK(oracle_value(truth, cd) == doctest::Approx(auc_cd(truth, 12.0, 72.0)).epsilon(1e-12));

  AucTarget bad{AucDefinition::CumulativeDynamic, 12.0, std::nullopt};
  CHECK_THROWS_AS(oracle_value(truth, bad), std::invalid_argument);
}

TEST_CASE("scenario runs are deterministic and thread-count invariant") {
  const ScenarioConfig scenario = scenario_by_name("R");
  const std::vector<Estimator> estimators{Estimator::CoxProb, Estimator::CoxRiskset};
  const std::vector<AucTarget> targets{
      AucTarget{AucDefinition::IncidentDynamic, 12.0, std::nullopt},
      AucTarget{AucDefinition::CumulativeDynamic, 12.0, 60.0}};

  StudyOptions options;
  options.n_replications = 3;
  options.base_seed = 11;
  options.threads = 1;
  auto first = run_scenario("R", scenario, estimators, targets, options);
  auto second = run_scenario("R", scenario, estimators, targets, options);
  options.threads = 2;
  auto threaded = run_scenario("R", scenario, estimators, targets, options);

  // The risk-set estimator only supports the incident/dynamic target, so the
  // result set holds 2 + 1 rows.
  REQUIRE(first.size() == 3);
  for (const auto& row : first) {
    if (row.estimator == "cox-riskset")
      CHECK(row.target.definition == AucDefinition::IncidentDynamic);
  }

  REQUIRE(second.size() == first.size());
  REQUIRE(threaded.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].scenario == "R");
    CHECK(first[i].n_replications == 3);
    CHECK(first[i].n_valid <= first[i].n_replications);
    CHECK(first[i].estimates.size() == first[i].n_valid);
    CHECK(second[i].estimates == first[i].estimates);  // bit-identical rerun
    CHECK(threaded[i].estimates == first[i].estimates);
    CHECK(second[i].truth == first[i].truth);
    if (first[i].n_valid >= 2) {
      REQUIRE(first[i].summary.has_value());
      CHECK(std::isfinite(first[i].summary->rmse));
    } else {
      CHECK(!first[i].summary.has_value());
    }
  }
}

TEST_CASE("an estimator that fails every replication yields zero valid runs") {
  // Follow-up ends after half a month with near-zero death rates: no deaths
  // ever, so the Cox fit throws in every replication.
  ScenarioConfig scenario;
  scenario.n_subjects = 30;
  scenario.weibull = SharedShapeWeibull{1.0, 1.0, 1e-9, 1e-9};
  scenario.censoring = AdministrativeCensoring{0.5};
  scenario.visit_interval = 0.25;
  scenario.followup_length = 0.5;

  const std::vector<Estimator> estimators{Estimator::CoxProb};
  const std::vector<AucTarget> targets{
      AucTarget{AucDefinition::IncidentDynamic, 0.3, std::nullopt}};
  StudyOptions options;
  options.n_replications = 2;
  options.base_seed = 5;
  options.threads = 1;

  auto results = run_scenario("tiny", scenario, estimators, targets, options);
  REQUIRE(results.size() == 1);
  CHECK(results[0].n_valid == 0);
  CHECK(results[0].estimates.empty());
  CHECK(!results[0].summary.has_value());

  // The report still renders a row for the failed cell.
  ReportTable table = study_report(results);
  REQUIRE(table.rows.size() == 1);
}

TEST_CASE("study reports carry one labeled row per result") {
  const ScenarioConfig scenario = scenario_by_name("R");
  const std::vector<Estimator> estimators{Estimator::CoxProb};
  const std::vector<AucTarget> targets{
      AucTarget{AucDefinition::IncidentDynamic, 12.0, std::nullopt},
      AucTarget{AucDefinition::CumulativeDynamic, 12.0, 60.0}};
  StudyOptions options;
  options.n_replications = 2;
  options.base_seed = 21;
  options.threads = 1;
  auto results = run_scenario("R", scenario, estimators, targets, options);

  ReportTable table = study_report(results);
  CHECK(table.header ==
        std::vector<std::string>{"scenario", "estimator", "definition", "time", "window",
                                 "truth", "bias", "emp_se", "rmse", "n_valid",
                                 "n_replications"});
  REQUIRE(table.rows.size() == results.size());
  for (const auto& row : table.rows) {
    REQUIRE(row.size() == table.header.size());
    CHECK(row[0] == "R");
    CHECK(row[1] == "cox-prob");
  }
}

TEST_CASE("scenario runs validate their inputs") {
  const ScenarioConfig scenario = scenario_by_name("R");
  const std::vector<Estimator> estimators{Estimator::CoxProb};
  const std::vector<AucTarget> targets{
      AucTarget{AucDefinition::IncidentDynamic, 12.0, std::nullopt}};
  StudyOptions options;
  options.n_replications = 0;
  CHECK_THROWS_AS(run_scenario("R", scenario, estimators, targets, options),
                  std::invalid_argument);

  options.n_replications = 2;
  const std::vector<AucTarget> bad{
      AucTarget{AucDefinition::CumulativeDynamic, 12.0, std::nullopt}};
  CHECK_THROWS_AS(run_scenario("R", scenario, estimators, bad, options),
                  std::invalid_argument);
}
