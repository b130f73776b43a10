#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "idmauc/fit.hpp"
#include "idmauc/optim.hpp"
#include "idmauc/simulate.hpp"
#include "test_helpers.hpp"

using namespace idmauc;
using namespace idmauc::testing;

namespace {

// Three subjects whose partial likelihood is solvable by hand:
//   A turns positive at 1 and dies at 4,
//   B stays negative and dies at 8,
//   C turns positive at 6 and is censored at 10.
// Risk sets: at t=4 three subjects (one positive, the dying one); at t=8 two
// subjects (one positive, the dying one negative). With x = exp(beta) the
// partial likelihood is [x/(x+2)] * [1/(1+x)], maximized at x = sqrt(2).
std::vector<ObservedRecord> cox_hand_dataset() {
  return {make_record({0.0, 1.0}, {0, 1}, 4.0, 1),
          make_record({0.0}, {0}, 8.0, 1),
          make_record({0.0, 6.0}, {0, 1}, 10.0, 0)};
}

bool any_mentions(const std::vector<std::string>& lines, const std::string& needle) {
  return std::any_of(lines.begin(), lines.end(), [&](const std::string& s) {
    return s.find(needle) != std::string::npos;
  });
}

ScenarioConfig constant_rate_config(std::uint64_t seed, std::size_t n) {
  ScenarioConfig c;
  c.n_subjects = n;
  c.weibull = SharedShapeWeibull{1.0, 0.04, 0.06, 0.3};  // shape 1: constant rates
  c.censoring = AdministrativeCensoring{60.0};
  c.visit_interval = 3.0;
  c.followup_length = 60.0;
  c.seed = seed;
  return c;
}

// Records generated from the panel-observation model itself: the latent
// onset leaves the death rate at l02 until the next attended visit, where
// detection raises it to l02 * hr. Administrative censoring at `end`.
std::vector<ObservedRecord> draw_panel_records(std::size_t n, double l01, double l02, double hr,
                                               double tau, double end, std::uint64_t seed) {
  std::vector<ObservedRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 rng = subject_stream(seed, i);
    const double onset = -std::log(rng.uniform01()) / l01;
    const double detect = std::ceil(onset / tau) * tau;  // first visit at or after onset
    const double e = -std::log(rng.uniform01());
    const double death =
        e <= l02 * detect ? e / l02 : detect + (e - l02 * detect) / (l02 * hr);
    const double survival = std::min(death, end);
    const int died = death < end ? 1 : 0;

    std::vector<double> visits{0.0};
    std::vector<int> marker{0};
    for (double v = tau; v <= survival; v += tau) {
      visits.push_back(v);
      marker.push_back(v >= detect ? 1 : 0);
    }
    out.push_back(make_record(std::move(visits), std::move(marker), survival, died));
  }
  return out;
}

// Exact Weibull log-likelihood when onsets are known exactly: the oracle the
// tight-bracket interval fit must converge to.
double exact_weibull_loglik(const std::vector<double>& log_params,
                            std::span<const ObservedRecord> records) {
  auto cum = [](double a, double k, double t) { return a * std::pow(t, k); };
  auto haz = [](double a, double k, double t) { return a * k * std::pow(t, k - 1.0); };
  const double a01 = std::exp(log_params[0]), k01 = std::exp(log_params[1]);
  const double a02 = std::exp(log_params[2]), k02 = std::exp(log_params[3]);
  const double a12 = std::exp(log_params[4]), k12 = std::exp(log_params[5]);
  double ll = 0.0;
  for (const auto& r : records) {
    const double t = r.survival_time;
    if (r.first_positive) {
      const double u = *r.first_positive;
      ll += std::log(haz(a01, k01, u)) - cum(a01, k01, u) - cum(a02, k02, u);
      ll += -(cum(a12, k12, t) - cum(a12, k12, u));
      if (r.death_indicator) ll += std::log(haz(a12, k12, t));
    } else {
      ll += -cum(a01, k01, t) - cum(a02, k02, t);
      if (r.death_indicator) ll += std::log(haz(a02, k02, t));
    }
  }
  return ll;
}

}  // namespace

TEST_CASE("the Cox fit solves the hand-checkable partial likelihood") {
  auto records = cox_hand_dataset();
  CoxTdFit fit = fit_cox_td(records);

  const double x = std::sqrt(2.0);
  CHECK(fit.beta == doctest::Approx(std::log(x)).epsilon(1e-8));
  CHECK(fit.loglik == doctest::Approx(std::log(x / (x + 2.0)) + std::log(1.0 / (1.0 + x)))
                          .epsilon(1e-10));

  // Observed information at the optimum: 2*sqrt(2)/(2+sqrt(2))^2 from the
  // first death plus sqrt(2)/(1+sqrt(2))^2 from the second.
  const double info = 2.0 * x / ((2.0 + x) * (2.0 + x)) + x / ((1.0 + x) * (1.0 + x));
  CHECK(fit.beta_se == doctest::Approx(1.0 / std::sqrt(info)).epsilon(1e-6));

  // Breslow baseline increments 1/(2+sqrt(2)) at t=4 and 1/(1+sqrt(2)) at t=8.
  REQUIRE(fit.baseline02.jump_times == std::vector<double>{4.0, 8.0});
  CHECK(fit.baseline02.increments[0] == doctest::Approx(1.0 / (2.0 + x)).epsilon(1e-8));
  CHECK(fit.baseline02.increments[1] == doctest::Approx(1.0 / (1.0 + x)).epsilon(1e-8));

  // Observed-illness increments 1/3 at the first diagnosis, 1/2 at the second.
  REQUIRE(fit.cumhaz01.jump_times == std::vector<double>{1.0, 6.0});
  CHECK(fit.cumhaz01.increments[0] == doctest::Approx(1.0 / 3.0));
  CHECK(fit.cumhaz01.increments[1] == doctest::Approx(0.5));

  // The illness-death baseline is the death baseline scaled by exp(beta).
  StepCumulativeHazard h12 = fit.cumhaz12();
  CHECK(h12.increments[0] == doctest::Approx(fit.baseline02.increments[0] * x).epsilon(1e-10));
}

TEST_CASE("the Cox fit rejects degenerate datasets") {
  SUBCASE("no deaths") {
    std::vector<ObservedRecord> records{make_record({0.0, 1.0}, {0, 1}, 4.0, 0),
                                        make_record({0.0}, {0}, 8.0, 0)};
    CHECK_THROWS_WITH_AS(fit_cox_td(records), "fit_cox_td: no deaths in the data", FitError);
  }
  SUBCASE("marker constant in every risk set") {
    std::vector<ObservedRecord> records{make_record({0.0}, {0}, 4.0, 1),
                                        make_record({0.0}, {0}, 8.0, 0)};
    CHECK_THROWS_WITH_AS(fit_cox_td(records), "fit_cox_td: marker constant in every risk set",
                         FitError);
  }
  SUBCASE("monotone partial likelihood") {
    // Every death carries a positive marker while a negative subject stays
    // at risk, so the score never changes sign.
    std::vector<ObservedRecord> records{make_record({0.0, 1.0}, {0, 1}, 5.0, 1),
                                        make_record({0.0}, {0}, 10.0, 0)};
    CHECK_THROWS_AS(fit_cox_td(records), FitError);
  }
}

TEST_CASE("interval-censored log-likelihood matches hand-computed contributions") {
  const IllnessDeathModel m = constant_model(0.2, 0.3, 1.0);
  const double p00_1 = std::exp(-0.5);
  const double p01_1 = 0.2 * (std::exp(-0.5) - std::exp(-1.0)) / (1.0 - 0.5);

  SUBCASE("a visit at the censoring time leaves only state-0 survival") {
    std::vector<ObservedRecord> r{make_record({0.0, 2.0}, {0, 0}, 2.0, 0)};
    CHECK(ic_loglik(m, r) == doctest::Approx(-0.5 * 2.0).epsilon(1e-12));
  }
  SUBCASE("censored with a possible undetected onset") {
    std::vector<ObservedRecord> r{make_record({0.0}, {0}, 1.0, 0)};
    CHECK(ic_loglik(m, r) == doctest::Approx(std::log(p00_1 + p01_1)).epsilon(1e-9));
  }
  SUBCASE("a marker-negative death mixes both exit routes") {
    std::vector<ObservedRecord> r{make_record({0.0}, {0}, 1.0, 1)};
    CHECK(ic_loglik(m, r) == doctest::Approx(std::log(p00_1 * 0.3 + p01_1 * 1.0)).epsilon(1e-9));
  }
  SUBCASE("a diagnosed death factorizes through the diagnosis interval") {
    std::vector<ObservedRecord> r{make_record({0.0, 0.5}, {0, 1}, 1.0, 1)};
    const double p01_half = 0.2 * (std::exp(-0.25) - std::exp(-0.5)) / 0.5;
    const double expected = p01_half * std::exp(-0.5) * 1.0;  // P01(0,.5) P11(.5,1) h12(1)
    CHECK(ic_loglik(m, r) == doctest::Approx(std::log(expected)).epsilon(1e-9));
  }
}

TEST_CASE("zero-probability records surface diagnostics instead of NaNs") {
  const IllnessDeathModel no_onset = constant_model(0.0, 0.3, 1.0);
  std::vector<ObservedRecord> r{make_record({0.0, 2.0}, {0, 1}, 4.0, 1)};
  std::vector<std::string> diagnostics;
  double ll = ic_loglik(no_onset, r, &diagnostics);
  CHECK(ll == -std::numeric_limits<double>::infinity());
  REQUIRE(!diagnostics.empty());
  CHECK(diagnostics.front().find("record 0") != std::string::npos);
  CHECK(diagnostics.front().find("zero-probability") != std::string::npos);
}

TEST_CASE("ic_loglik requires a censoring interval and is order-invariant") {
  const IllnessDeathModel m = constant_model(0.2, 0.3, 1.0);

  ObservedRecord no_interval = make_record({0.0}, {1}, 4.0, 1);  // positive at first visit
  std::vector<ObservedRecord> bad{no_interval};
  CHECK_THROWS_AS(ic_loglik(m, bad), FitError);

  std::vector<ObservedRecord> records{make_record({0.0, 3.0}, {0, 1}, 7.0, 1),
                                      make_record({0.0, 2.0}, {0, 0}, 9.0, 0),
                                      make_record({0.0}, {0}, 1.5, 1)};
  std::vector<ObservedRecord> shuffled{records[2], records[0], records[1]};
  CHECK(ic_loglik(m, records) == doctest::Approx(ic_loglik(m, shuffled)).epsilon(1e-12));

  // Only the interval endpoints, follow-up, and death status matter:
  // redundant negative visits inside the interval change nothing.
  std::vector<ObservedRecord> sparse{make_record({0.0, 6.0}, {0, 1}, 10.0, 1)};
  std::vector<ObservedRecord> dense{make_record({0.0, 2.0, 4.0, 6.0}, {0, 0, 0, 1}, 10.0, 1)};
  CHECK(ic_loglik(m, sparse) == ic_loglik(m, dense));
}

TEST_CASE("the interval-censored likelihood gradient vanishes only at an optimum") {
  ScenarioConfig c;
  c.n_subjects = 100;
  c.weibull = benchmark_weibull();
  c.censoring = UniformCensoring{60.0, 120.0};
  c.visit_interval = 3.0;
  c.followup_length = 120.0;
  c.seed = 77;
  auto data = generate_dataset(c);
  std::vector<ObservedRecord> records;
  for (const auto& s : data) records.push_back(s.record);

  // Differencing noise of the log-likelihood surface at the true parameters.
  CHECK(gradient_check_weibull_ic(records, {0.05, 0.5, 0.05, 0.5, 0.56, 0.5}) < 1e-4);

  CHECK_THROWS_AS(gradient_check_weibull_ic(records, {0.05, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(gradient_check_weibull_ic(records, {0.05, 0.5, -1.0, 0.5, 0.56, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("identifiability guards reject unusable datasets") {
  std::vector<ObservedRecord> empty;
  CHECK_THROWS_AS(fit_weibull_ic(empty), FitError);

  std::vector<ObservedRecord> no_illness{make_record({0.0}, {0}, 5.0, 1),
                                         make_record({0.0}, {0}, 7.0, 0)};
  CHECK_THROWS_WITH_AS(fit_weibull_ic(no_illness),
                       "fit_weibull_ic: no observed illness; onset parameters unidentified",
                       FitError);

  std::vector<ObservedRecord> no_deaths{make_record({0.0, 2.0}, {0, 1}, 5.0, 0),
                                        make_record({0.0}, {0}, 7.0, 0)};
  CHECK_THROWS_WITH_AS(fit_weibull_ic(no_deaths),
                       "fit_weibull_ic: no deaths; death parameters unidentified", FitError);

  CHECK_THROWS_AS(fit_pwc_panel(empty, {6.0}), FitError);
  CHECK_THROWS_AS(fit_pwc_panel(no_illness, {6.0}), FitError);

  std::vector<ObservedRecord> ok{make_record({0.0, 2.0}, {0, 1}, 5.0, 1),
                                 make_record({0.0}, {0}, 7.0, 0)};
  CHECK_THROWS_AS(fit_weibull_ic(ok, std::vector<double>{1.0, 2.0}), FitError);
  CHECK_THROWS_AS(fit_weibull_ic(ok, std::vector<double>{1, 1, 1, 1, 1, -1}), FitError);
}

TEST_CASE("the Weibull interval fit recovers the generating parameters") {
  ScenarioConfig c;
  c.n_subjects = 2000;
  c.weibull = benchmark_weibull();
  c.censoring = UniformCensoring{60.0, 120.0};
  c.visit_interval = 3.0;
  c.followup_length = 120.0;
  c.seed = 4242;
  auto data = generate_dataset(c);
  std::vector<ObservedRecord> records;
  for (const auto& s : data) records.push_back(s.record);

  MleFit fit = fit_weibull_ic(records);
  REQUIRE(fit.converged);
  REQUIRE(fit.params.size() == 6);
  REQUIRE(fit.stderrs.size() == 6);
  CHECK(fit.param_names == std::vector<std::string>{"alpha01", "shape01", "alpha02", "shape02",
                                                    "alpha12", "shape12"});

  const double truth[6] = {0.05, 0.5, 0.05, 0.5, 0.56, 0.5};
  for (std::size_t i = 0; i < 6; ++i) {
    INFO("parameter ", fit.param_names[i], ": ", fit.params[i], " +- ", fit.stderrs[i]);
    CHECK(std::abs(fit.params[i] - truth[i]) < 3.0 * fit.stderrs[i]);
  }

  // The reported maximum matches a fresh evaluation of the likelihood at the
  // fitted model, and it dominates the truth (it is a maximum).
  CHECK(ic_loglik(fit.model, records) == doctest::Approx(fit.loglik).epsilon(1e-9));
  CHECK(fit.loglik >= ic_loglik(benchmark_truth(), records));
}

TEST_CASE("with tight diagnosis brackets the interval fit matches the exact-data MLE") {
  // Bracketing every onset within 1e-6 months makes interval censoring
  // immaterial; the fit must then land on the classical exact-observation
  // Weibull MLE, computed here by direct optimization of the closed form.
  const SharedShapeWeibull w = benchmark_weibull();
  std::vector<ObservedRecord> records;
  for (std::size_t i = 0; i < 800; ++i) {
    SplitMix64 rng = subject_stream(909, i);
    SubjectPath path = draw_true_path(w, rng);
    const double survival = std::min(path.death_time, 120.0);
    const int died = path.death_time <= 120.0 ? 1 : 0;
    if (path.illness_time && *path.illness_time <= survival) {
      const double t1 = *path.illness_time;
      const double lo = std::max(t1 - 1e-6, t1 / 2.0);
      records.push_back(make_record({0.0, lo, t1}, {0, 0, 1}, survival, died));
    } else {
      const double last = std::max(survival - 1e-6, survival / 2.0);
      records.push_back(make_record({0.0, last}, {0, 0}, survival, died));
    }
  }

  ObjectiveFn neg_exact = [&records](const std::vector<double>& x) {
    double ll = exact_weibull_loglik(x, records);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };
  OptimResult oracle = minimize_bfgs(
      neg_exact, {std::log(0.1), 0.0, std::log(0.1), 0.0, std::log(0.5), 0.0});
  REQUIRE(oracle.converged);

  MleFit fit = fit_weibull_ic(records);
  REQUIRE(fit.converged);
  for (std::size_t i = 0; i < 6; ++i) {
    INFO("parameter ", fit.param_names[i]);
    CHECK(fit.params[i] == doctest::Approx(std::exp(oracle.x[i])).epsilon(2e-3));
  }
}

TEST_CASE("the single-segment piecewise fit recovers constant rates") {
  auto data = generate_dataset(constant_rate_config(31, 2000));
  std::vector<ObservedRecord> records;
  for (const auto& s : data) records.push_back(s.record);

  PwcSpec spec;  // no cutpoints: one rate per transition
  MleFit fit = fit_pwc_ic(records, spec);
  REQUIRE(fit.converged);
  REQUIRE(fit.params.size() == 3);
  REQUIRE(fit.stderrs.size() == 3);
  CHECK(fit.param_names ==
        std::vector<std::string>{"rate01[0..inf)", "rate02[0..inf)", "rate12[0..inf)"});

  const double truth[3] = {0.04, 0.06, 0.3};
  for (std::size_t i = 0; i < 3; ++i) {
    INFO("parameter ", fit.param_names[i], ": ", fit.params[i], " +- ", fit.stderrs[i]);
    CHECK(std::abs(fit.params[i] - truth[i]) < 3.0 * fit.stderrs[i]);
  }
}

TEST_CASE("the proportional piecewise fit ties the post-onset hazard to the baseline") {
  auto data = generate_dataset(constant_rate_config(32, 1500));
  std::vector<ObservedRecord> records;
  for (const auto& s : data) records.push_back(s.record);

  PwcSpec spec;
  spec.cutpoints01 = {12.0};
  spec.cutpoints02 = {12.0};
  spec.proportional = true;
  MleFit fit = fit_pwc_ic(records, spec);
  REQUIRE(fit.converged);
  REQUIRE(fit.params.size() == 5);  // two onset rates, two death rates, beta
  CHECK(fit.param_names.back() == "beta");

  const auto& h02 = std::get<PiecewiseConstantHazard>(fit.model.h02);
  const auto& h12 = std::get<PiecewiseConstantHazard>(fit.model.h12);
  REQUIRE(h02.rates.size() == h12.rates.size());
  const double hr = std::exp(fit.params.back());
  for (std::size_t s = 0; s < h02.rates.size(); ++s)
    CHECK(h12.rates[s] == doctest::Approx(h02.rates[s] * hr).epsilon(1e-12));

  CHECK(ic_loglik(fit.model, records) == doctest::Approx(fit.loglik).epsilon(1e-9));
}

TEST_CASE("piecewise segments with no risk time are merged with a warning") {
  auto data = generate_dataset(constant_rate_config(33, 400));
  std::vector<ObservedRecord> records;
  for (const auto& s : data) records.push_back(s.record);

  PwcSpec spec;
  spec.cutpoints01 = {6.0, 200.0};  // follow-up ends at 60: [200, inf) is empty
  spec.cutpoints02 = {6.0};
  spec.proportional = true;
  MleFit fit = fit_pwc_ic(records, spec);
  CHECK(any_mentions(fit.warnings, "transition 01"));
  CHECK(any_mentions(fit.warnings, "merged into its neighbor"));
  // The pruned grid keeps two onset segments: [0,6) and [6,inf).
  CHECK(fit.param_names[0] == "rate01[0..6)");
  CHECK(fit.param_names[1] == "rate01[6..inf)");
}

TEST_CASE("the panel fit recovers parameters from panel-generated data") {
  const double l01 = 0.05, l02 = 0.04, hr = 3.0;
  auto records = draw_panel_records(3000, l01, l02, hr, 2.0, 40.0, 515);

  MleFit fit = fit_pwc_panel(records, {});
  REQUIRE(fit.converged);
  REQUIRE(fit.params.size() == 3);
  CHECK(fit.param_names ==
        std::vector<std::string>{"rate01[0..inf)", "rate02[0..inf)", "beta"});
  REQUIRE(fit.stderrs.size() == 3);

  INFO("rate01 ", fit.params[0], " rate02 ", fit.params[1], " beta ", fit.params[2]);
  CHECK(std::abs(fit.params[0] - l01) < 4.0 * fit.stderrs[0]);
  CHECK(std::abs(fit.params[1] - l02) < 4.0 * fit.stderrs[1]);
  CHECK(std::abs(fit.params[2] - std::log(hr)) < 4.0 * fit.stderrs[2]);

  // The constrained structure carries through to the returned model.
  const auto& h02 = std::get<PiecewiseConstantHazard>(fit.model.h02);
  const auto& h12 = std::get<PiecewiseConstantHazard>(fit.model.h12);
  CHECK(h12.rates[0] ==
        doctest::Approx(h02.rates[0] * std::exp(fit.params[2])).epsilon(1e-12));
}

TEST_CASE("transition-specific Nelson-Aalen estimates on a hand dataset") {
  auto records = cox_hand_dataset();
  TransitionNelsonAalen na = nelson_aalen_by_transition(records);

  // Diagnoses at 1 (three disease-free at risk) and 6 (two at risk).
  REQUIRE(na.h01.jump_times == std::vector<double>{1.0, 6.0});
  CHECK(na.h01.increments[0] == doctest::Approx(1.0 / 3.0));
  CHECK(na.h01.increments[1] == doctest::Approx(0.5));

  // One marker-negative death at 8; only that subject is still disease-free.
  REQUIRE(na.h02.jump_times == std::vector<double>{8.0});
  CHECK(na.h02.increments[0] == doctest::Approx(1.0));

  // One post-diagnosis death at 4; one diagnosed subject at risk there.
  REQUIRE(na.h12.jump_times == std::vector<double>{4.0});
  CHECK(na.h12.increments[0] == doctest::Approx(1.0));
}
