#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rdt/errors.hpp"
#include "rdt/stage1.hpp"

using namespace rdt;

TEST_CASE("responder classification") {
  ResponderCriteria criteria;
  criteria.improvement_threshold = 5.0;

  SUBCASE("clear improvement") {
    CHECK(classify_responder(10, 16, ImprovementDirection::Increase, criteria, false));
  }
  SUBCASE("boundary counts as response") {
    CHECK(classify_responder(10, 15, ImprovementDirection::Increase, criteria, false));
  }
  SUBCASE("self-report requirement is a conjunction") {
    criteria.require_patient_report = true;
    CHECK_FALSE(classify_responder(10, 16, ImprovementDirection::Increase, criteria, false));
    CHECK(classify_responder(10, 16, ImprovementDirection::Increase, criteria, true));
  }
  SUBCASE("decreasing direction flips the difference") {
    CHECK(classify_responder(20, 14, ImprovementDirection::Decrease, criteria, false));
    CHECK_FALSE(classify_responder(14, 20, ImprovementDirection::Decrease, criteria, false));
  }
}

TEST_CASE("gate decision") {
  CHECK(gate_decision(0, 20, 0.3) == GateOutcome::StopFutility);
  CHECK(gate_decision(6, 20, 0.3) == GateOutcome::Proceed);  // 0.30 >= 0.30
  CHECK(gate_decision(5, 20, 0.3) == GateOutcome::StopFutility);
  CHECK(gate_decision(0, 5, 0.0) == GateOutcome::Proceed);
  CHECK_THROWS_AS(gate_decision(3, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(gate_decision(-1, 5, 0.5), std::invalid_argument);
}

TEST_CASE("gate decision is monotone in the responder count") {
  for (int n = 1; n <= 25; ++n) {
    for (double p_min : {0.1, 0.3, 0.5, 0.9, 1.0}) {
      bool proceeded = false;
      for (int r = 0; r <= n; ++r) {
        const bool proceed = gate_decision(r, n, p_min) == GateOutcome::Proceed;
        if (proceeded) {
          CHECK(proceed);  // adding a responder never flips Proceed -> Stop
        }
        proceeded = proceed;
      }
    }
  }
}

namespace {

std::vector<PatientProfile> uniform_cohort(int n, bool responders, double delta,
                                           double baseline = 10.0) {
  std::vector<PatientProfile> cohort;
  for (int i = 0; i < n; ++i) {
    PatientProfile profile;
    profile.id = i;
    profile.latent_responder = responders;
    profile.individual_effect = responders ? delta : 0.0;
    profile.baseline_level = baseline;
    cohort.push_back(profile);
  }
  return cohort;
}

}  // namespace

TEST_CASE("run_stage1: everyone responds under a strong noise-free effect") {
  OutcomeModel model;
  model.residual_sd = 1e-12;
  ResponderCriteria criteria;
  criteria.improvement_threshold = 5.0;
  RngStream rng(3);
  const auto result =
      run_stage1(uniform_cohort(12, true, 10.0), model, criteria, 0.3, rng);
  CHECK(result.responder_proportion == 1.0);
  CHECK(result.gate == GateOutcome::Proceed);
  for (const auto& record : result.patients) {
    CHECK(record.improvement == doctest::Approx(10.0));
  }
}

TEST_CASE("run_stage1: no effect stops for futility") {
  OutcomeModel model;
  model.residual_sd = 1e-12;
  ResponderCriteria criteria;
  criteria.improvement_threshold = 1.0;
  RngStream rng(3);
  const auto result =
      run_stage1(uniform_cohort(12, true, 0.0), model, criteria, 0.3, rng);
  CHECK(result.responder_proportion == 0.0);
  CHECK(result.gate == GateOutcome::StopFutility);
}

TEST_CASE("run_stage1: null classification rate matches the normal tail") {
  // improvement ~ N(0,1), threshold 1.645 -> rate about 0.05
  OutcomeModel model;
  model.residual_sd = 1.0;
  ResponderCriteria criteria;
  criteria.improvement_threshold = 1.645;
  RngStream rng(9);
  const auto result =
      run_stage1(uniform_cohort(10000, true, 0.0), model, criteria, 0.0, rng);
  CHECK(result.responder_proportion == doctest::Approx(0.05).epsilon(0.2));
  CHECK(std::fabs(result.responder_proportion - 0.05) < 0.01);
}

TEST_CASE("self-report channel follows its sensitivity and specificity") {
  OutcomeModel model;
  model.residual_sd = 1e-12;
  ResponderCriteria criteria;
  criteria.improvement_threshold = -1.0;  // everyone passes the outcome rule
  criteria.require_patient_report = true;
  criteria.report_sensitivity = 0.8;
  criteria.report_specificity = 0.9;

  auto cohort = uniform_cohort(20000, true, 0.0);
  for (int i = 10000; i < 20000; ++i) {
    cohort[static_cast<std::size_t>(i)].latent_responder = false;
  }
  RngStream rng(13);
  const auto result = run_stage1(cohort, model, criteria, 0.0, rng);
  int reports_responders = 0, reports_nonresponders = 0;
  for (int i = 0; i < 10000; ++i) {
    reports_responders += result.patients[static_cast<std::size_t>(i)].self_report ? 1 : 0;
  }
  for (int i = 10000; i < 20000; ++i) {
    reports_nonresponders +=
        result.patients[static_cast<std::size_t>(i)].self_report ? 1 : 0;
  }
  CHECK(reports_responders / 10000.0 == doctest::Approx(0.8).epsilon(0.02));
  CHECK(reports_nonresponders / 10000.0 == doctest::Approx(0.1).epsilon(0.15));
}

TEST_CASE("classification ignores latent flags: permuting them changes nothing") {
  OutcomeModel model;
  model.residual_sd = 1.0;
  ResponderCriteria criteria;
  criteria.improvement_threshold = 0.5;

  auto cohort = uniform_cohort(200, true, 1.0);
  RngStream rng(31);
  const auto result = run_stage1(cohort, model, criteria, 0.0, rng);
  // Re-classify from the recorded observables with latent flags shuffled.
  for (const auto& record : result.patients) {
    const bool reclassified = classify_responder(
        record.pre, record.post, model.improvement_direction, criteria, record.self_report);
    CHECK(reclassified == record.classified_responder);
  }
}

// ---------------------------------------------------------------------------
// Logistic fit
// ---------------------------------------------------------------------------

TEST_CASE("intercept-only fit at a balanced label split is zero") {
  std::vector<std::vector<double>> rows(100);
  std::vector<int> labels(100, 0);
  for (int i = 0; i < 50; ++i) labels[static_cast<std::size_t>(i)] = 1;
  const auto design = DesignMatrix::with_intercept(rows);
  const auto fit = fit_logistic(design, labels);
  REQUIRE(fit.converged);
  CHECK(std::fabs(fit.coefficients[0]) < 1e-8);
}

TEST_CASE("all labels true flags separation instead of crashing") {
  std::vector<std::vector<double>> rows(30);
  std::vector<int> labels(30, 1);
  const auto fit = fit_logistic(DesignMatrix::with_intercept(rows), labels);
  CHECK(fit.separation_detected);
  CHECK_FALSE(fit.converged);
}

TEST_CASE("perfectly separating covariate flags separation") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({i < 10 ? 0.0 : 1.0});
    labels.push_back(i < 10 ? 0 : 1);
  }
  const auto fit = fit_logistic(DesignMatrix::with_intercept(rows), labels);
  CHECK(fit.separation_detected);
}

TEST_CASE("duplicated column is a singular design") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    const double x = i % 3;
    rows.push_back({x, x});
    labels.push_back(i % 2);
  }
  CHECK_THROWS_AS(fit_logistic(DesignMatrix::with_intercept(rows), labels),
                  SingularDesignError);
}

TEST_CASE("IRLS matches the grid-search likelihood maximizer on a 20x2 problem") {
  // One binary covariate, mixed labels in both strata: finite interior MLE.
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({0.0});
    labels.push_back(i < 4 ? 1 : 0);  // 4/10 in the x=0 stratum
  }
  for (int i = 0; i < 10; ++i) {
    rows.push_back({1.0});
    labels.push_back(i < 7 ? 1 : 0);  // 7/10 in the x=1 stratum
  }
  const auto fit = fit_logistic(DesignMatrix::with_intercept(rows), labels);
  REQUIRE(fit.converged);
  REQUIRE_FALSE(fit.separation_detected);

  const auto oracle_beta = oracle::grid_search_logistic_2d(
      [&] {
        std::vector<std::vector<double>> full;
        for (const auto& row : rows) {
          full.push_back({1.0, row[0]});
        }
        return full;
      }(),
      labels);
  CHECK(std::fabs(fit.coefficients[0] - oracle_beta[0]) < 1e-4);
  CHECK(std::fabs(fit.coefficients[1] - oracle_beta[1]) < 1e-4);

  // Analytic check: saturated 2x2 logits.
  CHECK(fit.coefficients[0] == doctest::Approx(std::log(4.0 / 6.0)).epsilon(1e-6));
  CHECK(fit.coefficients[1] ==
        doctest::Approx(std::log(7.0 / 3.0) - std::log(4.0 / 6.0)).epsilon(1e-6));
}

TEST_CASE("with an intercept the fitted-probability mean equals the label mean") {
  RngStream rng(77);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 120; ++i) {
    const double x = rng.normal(0.0, 1.0);
    rows.push_back({x});
    labels.push_back(rng.bernoulli(inverse_logit(0.4 + 0.9 * x)) ? 1 : 0);
  }
  const auto design = DesignMatrix::with_intercept(rows);
  const auto fit = fit_logistic(design, labels);
  REQUIRE(fit.converged);
  const auto fitted = logistic_predict(design, fit.coefficients);
  double fitted_mean = 0.0, label_mean = 0.0;
  for (std::size_t i = 0; i < fitted.size(); ++i) {
    fitted_mean += fitted[i];
    label_mean += labels[i];
  }
  CHECK(std::fabs(fitted_mean - label_mean) / fitted.size() < 1e-6);
}

TEST_CASE("standard errors are positive on clean convergence") {
  RngStream rng(5);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    const double x = rng.normal(0.0, 1.0);
    rows.push_back({x});
    labels.push_back(rng.bernoulli(inverse_logit(0.2 * x)) ? 1 : 0);
  }
  const auto fit = fit_logistic(DesignMatrix::with_intercept(rows), labels);
  REQUIRE(fit.converged);
  REQUIRE(fit.standard_errors.size() == 2);
  CHECK(fit.standard_errors[0] > 0.0);
  CHECK(fit.standard_errors[1] > 0.0);
}

// ---------------------------------------------------------------------------
// Exclusion rule
// ---------------------------------------------------------------------------

namespace {

LogisticFit converged_fit(std::vector<double> coefficients) {
  LogisticFit fit;
  fit.coefficients = std::move(coefficients);
  fit.standard_errors.assign(fit.coefficients.size(), 0.5);
  fit.converged = true;
  return fit;
}

}  // namespace

TEST_CASE("flat fit excludes no one") {
  const auto rule = derive_exclusion_rule(converged_fit({0.0, 0.0}), 1, 0.4);
  CHECK_FALSE(rule.excludes(std::vector<double>{0.0}));
  CHECK_FALSE(rule.excludes(std::vector<double>{1.0}));
}

TEST_CASE("strongly negative intercept excludes everyone") {
  const auto rule = derive_exclusion_rule(converged_fit({-3.0}), 0, 0.4);
  CHECK(rule.excludes(std::vector<double>{}));
}

TEST_CASE("strong binary coefficient excludes exactly the low stratum") {
  // P(respond | x=0) = inverse_logit(-2) ~ 0.12, P(respond | x=1) ~ 0.88.
  const auto rule = derive_exclusion_rule(converged_fit({-2.0, 4.0}), 1, 0.4);
  CHECK(rule.excludes(std::vector<double>{0.0}));
  CHECK_FALSE(rule.excludes(std::vector<double>{1.0}));
}

TEST_CASE("unusable fits raise rule-unavailable") {
  LogisticFit bad;
  bad.coefficients = {1.0};
  bad.converged = false;
  CHECK_THROWS_AS(derive_exclusion_rule(bad, 0, 0.4), RuleUnavailableError);
  bad.converged = true;
  bad.separation_detected = true;
  CHECK_THROWS_AS(derive_exclusion_rule(bad, 0, 0.4), RuleUnavailableError);
}
