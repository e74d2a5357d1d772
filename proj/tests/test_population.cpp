#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rdt/errors.hpp"
#include "rdt/population.hpp"

using namespace rdt;

namespace {

PopulationModel plain_model(int n, double alpha0 = 0.0) {
  PopulationModel model;
  model.n_stage1 = n;
  model.response_intercept = alpha0;
  model.outcome.residual_sd = 1.0;
  return model;
}

}  // namespace

TEST_CASE("same (config, seed) reproduces the population byte for byte") {
  auto model = plain_model(50, 0.3);
  model.covariates.push_back({"x", NormalDist{0.0, 1.0}, 0.5, 1.0});
  const auto a = generate_population(model, 42);
  const auto b = generate_population(model, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].latent_responder == b[i].latent_responder);
    CHECK(a[i].individual_effect == b[i].individual_effect);
    CHECK(a[i].baseline_level == b[i].baseline_level);
    CHECK(a[i].covariates == b[i].covariates);
  }
  const auto c = generate_population(model, 43);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    any_difference = any_difference || a[i].baseline_level != c[i].baseline_level;
  }
  CHECK(any_difference);
}

TEST_CASE("alpha0 = 0 with no covariates gives responder rate one half") {
  const auto population = generate_population(plain_model(100000), 7);
  int responders = 0;
  for (const auto& p : population) {
    responders += p.latent_responder ? 1 : 0;
  }
  const double rate = static_cast<double>(responders) / population.size();
  CHECK(rate == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::fabs(rate - 0.5) < 0.005 + 3 * std::sqrt(0.25 / 100000));
}

TEST_CASE("positive logit coefficient raises the responder rate in its stratum") {
  auto model = plain_model(40000, -1.0);
  model.covariates.push_back({"flag", BernoulliDist{0.5}, 3.0, 0.0});
  const auto population = generate_population(model, 11);
  int n1 = 0, r1 = 0, n0 = 0, r0 = 0;
  for (const auto& p : population) {
    if (p.covariates[0] > 0.5) {
      ++n1;
      r1 += p.latent_responder ? 1 : 0;
    } else {
      ++n0;
      r0 += p.latent_responder ? 1 : 0;
    }
  }
  const double rate1 = static_cast<double>(r1) / n1;
  const double rate0 = static_cast<double>(r0) / n0;
  CHECK(rate1 > rate0);
  CHECK(rate1 == doctest::Approx(inverse_logit(2.0)).epsilon(0.03));
  CHECK(rate0 == doctest::Approx(inverse_logit(-1.0)).epsilon(0.05));
}

TEST_CASE("latent responder rate converges to the analytic logit mean") {
  auto model = plain_model(200000, 0.25);
  model.covariates.push_back({"b", BernoulliDist{0.3}, 0.8, 0.0});
  const auto population = generate_population(model, 3);
  int responders = 0;
  for (const auto& p : population) {
    responders += p.latent_responder ? 1 : 0;
  }
  const double analytic = 0.3 * inverse_logit(0.25 + 0.8) + 0.7 * inverse_logit(0.25);
  const double rate = static_cast<double>(responders) / population.size();
  CHECK(rate == doctest::Approx(analytic).epsilon(0.01));
}

TEST_CASE("invalid covariate parameters name the offending covariate") {
  auto model = plain_model(10);
  model.covariates.push_back({"bad_sd", NormalDist{0.0, -1.0}, 0.0, 0.0});
  CHECK_THROWS_WITH_AS(generate_population(model, 1),
                       doctest::Contains("bad_sd"), ConfigError);

  auto model2 = plain_model(10);
  model2.covariates.push_back({"bad_probs", CategoricalDist{{0.5, 0.4}}, 0.0, 0.0});
  CHECK_THROWS_WITH_AS(generate_population(model2, 1),
                       doctest::Contains("bad_probs"), ConfigError);
}

TEST_CASE("categorical covariates sample level indices with the right frequencies") {
  auto model = plain_model(60000);
  model.covariates.push_back({"cat", CategoricalDist{{0.2, 0.3, 0.5}}, 0.0, 0.0});
  const auto population = generate_population(model, 19);
  std::vector<int> counts(3, 0);
  for (const auto& p : population) {
    ++counts[static_cast<std::size_t>(p.covariates[0])];
  }
  CHECK(counts[0] / 60000.0 == doctest::Approx(0.2).epsilon(0.05));
  CHECK(counts[1] / 60000.0 == doctest::Approx(0.3).epsilon(0.05));
  CHECK(counts[2] / 60000.0 == doctest::Approx(0.5).epsilon(0.05));
}

namespace {

OutcomeModel noise_free_model() {
  OutcomeModel model;
  model.baseline_mean = 10.0;
  model.residual_sd = 1e-12;
  return model;
}

PatientProfile responder_with_effect(double delta, double baseline = 10.0) {
  PatientProfile profile;
  profile.id = 1;
  profile.latent_responder = true;
  profile.individual_effect = delta;
  profile.baseline_level = baseline;
  return profile;
}

}  // namespace

TEST_CASE("all effects zero: outcomes equal the baseline") {
  auto model = noise_free_model();
  PatientProfile profile = responder_with_effect(0.0);
  TreatmentSchedule schedule{{{Arm::Experimental, 5, 0}, {Arm::Control, 5, 2}}};
  RngStream rng(1);
  const auto outcomes = simulate_outcomes(profile, schedule, model, rng);
  for (const double y : outcomes) {
    CHECK(y == doctest::Approx(10.0).epsilon(1e-9));
  }
}

TEST_CASE("full washout reverses a reversible outcome") {
  auto model = noise_free_model();
  model.carryover_coef = 0.5;
  model.washout_full_days = 7;
  PatientProfile profile = responder_with_effect(5.0);
  TreatmentSchedule schedule{{{Arm::Experimental, 5, 0}, {Arm::Control, 5, 7}}};
  RngStream rng(1);
  const auto outcomes = simulate_outcomes(profile, schedule, model, rng);
  CHECK(outcomes[0] == doctest::Approx(15.0).epsilon(1e-9));
  CHECK(outcomes[1] == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("short washout leaks a carryover fraction") {
  auto model = noise_free_model();
  model.carryover_coef = 0.4;
  model.washout_full_days = 7;
  PatientProfile profile = responder_with_effect(5.0);
  TreatmentSchedule schedule{{{Arm::Experimental, 5, 0}, {Arm::Control, 5, 3}}};
  RngStream rng(1);
  const auto outcomes = simulate_outcomes(profile, schedule, model, rng);
  CHECK(outcomes[1] == doctest::Approx(10.0 + 0.4 * 5.0).epsilon(1e-9));
}

TEST_CASE("non-reversible ratchet: repeat treatment adds nothing") {
  auto model = noise_free_model();
  model.reversible = false;
  PatientProfile profile = responder_with_effect(5.0);
  TreatmentSchedule schedule{{{Arm::Experimental, 5, 0}, {Arm::Experimental, 5, 2}}};
  RngStream rng(1);
  const auto outcomes = simulate_outcomes(profile, schedule, model, rng);
  CHECK(outcomes[0] == doctest::Approx(15.0).epsilon(1e-9));
  CHECK(outcomes[1] == doctest::Approx(outcomes[0]).epsilon(1e-9));
}

TEST_CASE("non-reversible ratchet persists into control periods") {
  auto model = noise_free_model();
  model.reversible = false;
  PatientProfile profile = responder_with_effect(5.0);
  TreatmentSchedule schedule{{{Arm::Experimental, 5, 0}, {Arm::Control, 5, 30}}};
  RngStream rng(1);
  const auto outcomes = simulate_outcomes(profile, schedule, model, rng);
  CHECK(outcomes[1] == doctest::Approx(15.0).epsilon(1e-9));
}

TEST_CASE("decreasing outcomes improve downward") {
  auto model = noise_free_model();
  model.improvement_direction = ImprovementDirection::Decrease;
  PatientProfile profile = responder_with_effect(4.0);
  TreatmentSchedule schedule{{{Arm::Experimental, 5, 0}}};
  RngStream rng(1);
  const auto outcomes = simulate_outcomes(profile, schedule, model, rng);
  CHECK(outcomes[0] == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("period effect drifts with the period index") {
  auto model = noise_free_model();
  model.period_effect = 3.0;
  PatientProfile profile = responder_with_effect(0.0);
  TreatmentSchedule schedule{{{Arm::Control, 5, 0}, {Arm::Control, 5, 0}, {Arm::Control, 5, 0}}};
  RngStream rng(1);
  const auto outcomes = simulate_outcomes(profile, schedule, model, rng);
  CHECK(outcomes[0] == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(outcomes[1] == doctest::Approx(13.0).epsilon(1e-9));
  CHECK(outcomes[2] == doctest::Approx(16.0).epsilon(1e-9));
}

TEST_CASE("with gamma=0 and full washouts, post-experimental control periods match naive controls") {
  OutcomeModel model;
  model.baseline_mean = 0.0;
  model.residual_sd = 1.0;
  model.carryover_coef = 0.0;
  PatientProfile profile = responder_with_effect(5.0, 0.0);

  TreatmentSchedule exposed{{{Arm::Experimental, 5, 0}, {Arm::Control, 5, 5}}};
  TreatmentSchedule naive{{{Arm::Control, 5, 0}, {Arm::Control, 5, 5}}};

  const int n = 20000;
  double sum_exposed = 0.0, sum_naive = 0.0;
  RngStream rng_a(21), rng_b(22);
  for (int i = 0; i < n; ++i) {
    sum_exposed += simulate_outcomes(profile, exposed, model, rng_a)[1];
    sum_naive += simulate_outcomes(profile, naive, model, rng_b)[1];
  }
  const double se = std::sqrt(2.0 / n);
  CHECK(std::fabs(sum_exposed / n - sum_naive / n) < 3 * se);
}

TEST_CASE("empty schedule is rejected") {
  OutcomeModel model;
  PatientProfile profile;
  TreatmentSchedule empty;
  RngStream rng(1);
  CHECK_THROWS_AS(simulate_outcomes(profile, empty, model, rng), std::invalid_argument);
}
