#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rdt/analysis.hpp"
#include "rdt/errors.hpp"
#include "rdt/rng.hpp"

using namespace rdt;

// ---------------------------------------------------------------------------
// Crossover estimator
// ---------------------------------------------------------------------------

namespace {

std::vector<CrossoverObservation> crossover_data(const std::vector<SequenceOrder>& sequences,
                                                 const std::vector<double>& period1,
                                                 const std::vector<double>& period2) {
  std::vector<CrossoverObservation> data;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    data.push_back({sequences[i], period1[i], period2[i]});
  }
  return data;
}

}  // namespace

TEST_CASE("all-zero outcomes give a zero estimate and p in the no-evidence region") {
  std::vector<CrossoverObservation> data;
  for (int i = 0; i < 4; ++i) {
    data.push_back({i % 2 == 0 ? SequenceOrder::ExperimentalFirst
                               : SequenceOrder::ControlFirst,
                    0.0, 0.0});
  }
  const auto estimate = crossover_estimate(data);
  CHECK(estimate.point == 0.0);
  CHECK(estimate.p_value == doctest::Approx(1.0));
}

TEST_CASE("period effects cancel exactly in noise-free data") {
  // delta = 3, a +7 shift on every second period.
  std::vector<SequenceOrder> sequences = {
      SequenceOrder::ExperimentalFirst, SequenceOrder::ExperimentalFirst,
      SequenceOrder::ControlFirst, SequenceOrder::ControlFirst};
  std::vector<double> period1 = {13.0, 13.0, 10.0, 10.0};
  std::vector<double> period2 = {17.0, 17.0, 20.0, 20.0};
  const auto estimate = crossover_estimate(crossover_data(sequences, period1, period2));
  CHECK(estimate.point == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("crossover estimator equals the patient-effects least-squares fit") {
  RngStream rng(41);
  const int n = 12;
  std::vector<SequenceOrder> sequences;
  std::vector<double> period1, period2;
  for (int i = 0; i < n; ++i) {
    sequences.push_back(i % 2 == 0 ? SequenceOrder::ExperimentalFirst
                                   : SequenceOrder::ControlFirst);
    const double patient = rng.normal(0.0, 3.0);
    const double treatment = 1.7;
    const double period_shift = 0.9;
    const bool exp_first = sequences.back() == SequenceOrder::ExperimentalFirst;
    period1.push_back(patient + (exp_first ? treatment : 0.0) + rng.normal(0.0, 1.0));
    period2.push_back(patient + period_shift + (exp_first ? 0.0 : treatment) +
                      rng.normal(0.0, 1.0));
  }
  const auto estimate = crossover_estimate(crossover_data(sequences, period1, period2));
  const auto reference = oracle::crossover_ols(sequences, period1, period2);
  REQUIRE(estimate.standard_error.has_value());
  CHECK(std::fabs(estimate.point - reference.estimate) < 1e-8);
  CHECK(std::fabs(*estimate.standard_error - reference.standard_error) < 1e-8);
}

TEST_CASE("crossover estimate is invariant to any constant period-2 shift") {
  RngStream rng(43);
  std::vector<SequenceOrder> sequences;
  std::vector<double> period1, period2;
  for (int i = 0; i < 10; ++i) {
    sequences.push_back(rng.bernoulli(0.5) ? SequenceOrder::ExperimentalFirst
                                           : SequenceOrder::ControlFirst);
    period1.push_back(rng.normal(0.0, 2.0));
    period2.push_back(rng.normal(0.0, 2.0));
  }
  // Keep both sequence groups populated.
  sequences[0] = SequenceOrder::ExperimentalFirst;
  sequences[1] = SequenceOrder::ExperimentalFirst;
  sequences[2] = SequenceOrder::ControlFirst;
  sequences[3] = SequenceOrder::ControlFirst;

  const auto base = crossover_estimate(crossover_data(sequences, period1, period2));
  for (double shift : {-11.0, 3.25, 1e6}) {
    auto shifted = period2;
    for (auto& y : shifted) {
      y += shift;
    }
    const auto moved = crossover_estimate(crossover_data(sequences, period1, shifted));
    CHECK(std::fabs(moved.point - base.point) < 1e-12 * std::max(1.0, std::fabs(shift)));
  }
}

TEST_CASE("a sequence group below two patients is insufficient data") {
  std::vector<CrossoverObservation> data = {
      {SequenceOrder::ExperimentalFirst, 1.0, 0.0},
      {SequenceOrder::ExperimentalFirst, 1.5, 0.5},
      {SequenceOrder::ControlFirst, 0.0, 1.0},
  };
  CHECK_THROWS_AS(crossover_estimate(data), InsufficientDataError);
}

// ---------------------------------------------------------------------------
// n-of-1 and meta-analysis
// ---------------------------------------------------------------------------

TEST_CASE("nof1_effect on constant differences") {
  const auto effect = nof1_effect({{2.0, 0.0}, {3.0, 1.0}, {4.0, 2.0}});
  CHECK(effect.estimate == doctest::Approx(2.0));
  CHECK(effect.variance == doctest::Approx(0.0));
}

TEST_CASE("nof1_effect two-cycle example") {
  const auto effect = nof1_effect({{1.0, 0.0}, {3.0, 0.0}});
  CHECK(effect.estimate == doctest::Approx(2.0));
  CHECK(effect.variance == doctest::Approx(1.0));  // sample var 2, / k=2
}

TEST_CASE("nof1_effect recomputation on random cycles") {
  RngStream rng(51);
  std::vector<CyclePair> cycles;
  for (int c = 0; c < 5; ++c) {
    cycles.push_back({rng.normal(2.0, 1.0), rng.normal(0.0, 1.0)});
  }
  const auto effect = nof1_effect(cycles);
  double mean = 0.0;
  for (const auto& cycle : cycles) {
    mean += cycle.experimental - cycle.control;
  }
  mean /= 5.0;
  double ss = 0.0;
  for (const auto& cycle : cycles) {
    const double d = cycle.experimental - cycle.control - mean;
    ss += d * d;
  }
  CHECK(effect.estimate == doctest::Approx(mean).epsilon(1e-12));
  CHECK(effect.variance == doctest::Approx(ss / 4.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("nof1_effect requires two cycles") {
  CHECK_THROWS_AS(nof1_effect({{1.0, 0.0}}), InsufficientDataError);
}

TEST_CASE("meta_combine: identical inputs pool to themselves with tau^2 = 0") {
  const auto meta = meta_combine({{2.0, 0.5}, {2.0, 0.5}, {2.0, 0.5}});
  CHECK(meta.pooled_effect == doctest::Approx(2.0));
  CHECK(meta.tau_squared == doctest::Approx(0.0));
}

TEST_CASE("meta_combine: symmetric pair pools to the midpoint") {
  const auto meta = meta_combine({{1.0, 0.4}, {3.0, 0.4}});
  CHECK(meta.pooled_effect == doctest::Approx(2.0));
}

TEST_CASE("meta_combine matches the direct DerSimonian-Laird formulas") {
  const std::vector<double> estimates = {0.4, 1.9, -0.3, 2.8, 1.1};
  const std::vector<double> variances = {0.25, 0.6, 0.4, 1.2, 0.09};
  std::vector<PatientEffect> inputs;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    inputs.push_back({estimates[i], variances[i]});
  }
  const auto meta = meta_combine(inputs);
  const auto reference = oracle::dersimonian_laird(estimates, variances);
  CHECK(std::fabs(meta.pooled_effect - reference.pooled) < 1e-10);
  CHECK(std::fabs(meta.pooled_se - reference.pooled_se) < 1e-10);
  CHECK(std::fabs(meta.tau_squared - reference.tau_squared) < 1e-10);
}

TEST_CASE("with homogeneous effects DL reduces to fixed-effect pooling") {
  // Estimates drawn tight enough that Q < m-1 forces tau^2 = 0.
  std::vector<PatientEffect> inputs = {
      {1.00, 0.5}, {1.01, 0.7}, {0.99, 0.4}, {1.02, 0.9}};
  const auto meta = meta_combine(inputs);
  REQUIRE(meta.tau_squared == 0.0);
  double sw = 0.0, swe = 0.0;
  for (const auto& input : inputs) {
    sw += 1.0 / input.variance;
    swe += input.estimate / input.variance;
  }
  CHECK(meta.pooled_effect == doctest::Approx(swe / sw).epsilon(1e-12));
  CHECK(meta.pooled_se == doctest::Approx(1.0 / std::sqrt(sw)).epsilon(1e-12));
}

TEST_CASE("zero variances are floored, keeping noise-free data runnable") {
  const auto meta = meta_combine({{2.0, 0.0}, {2.0, 0.0}});
  CHECK(meta.floored_variances == 2);
  CHECK(meta.pooled_effect == doctest::Approx(2.0));
  CHECK(meta.pooled_se > 0.0);
}

TEST_CASE("pooled_se never exceeds the largest tau^2-inflated per-patient se") {
  RngStream rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PatientEffect> inputs;
    const int m = rng.uniform_int(2, 8);
    for (int i = 0; i < m; ++i) {
      inputs.push_back({rng.normal(0.0, 3.0), 0.05 + 2.0 * rng.uniform01()});
    }
    const auto meta = meta_combine(inputs);
    double max_se = 0.0;
    for (const auto& input : inputs) {
      max_se = std::max(max_se, std::sqrt(input.variance + meta.tau_squared));
    }
    CHECK(meta.pooled_se <= max_se + 1e-12);
  }
}

TEST_CASE("meta_combine requires two patients") {
  CHECK_THROWS_AS(meta_combine({{1.0, 0.5}}), InsufficientDataError);
}

// ---------------------------------------------------------------------------
// Randomization test
// ---------------------------------------------------------------------------

TEST_CASE("uniform responses give p = 1") {
  std::vector<AdaptiveObservation> observations;
  for (int i = 0; i < 8; ++i) {
    observations.push_back({i % 2 == 0 ? Arm::Experimental : Arm::Control, true});
  }
  RngStream rng(71);
  const auto estimate = adaptive_randomization_test(observations, UrnState{1, 1, 1}, 1000, rng);
  CHECK(estimate.point == 0.0);
  CHECK(estimate.p_value == doctest::Approx(1.0));
  CHECK_FALSE(estimate.standard_error.has_value());
}

TEST_CASE("p never drops below the add-one floor") {
  // Perfectly arm-aligned successes: as extreme as it gets.
  std::vector<AdaptiveObservation> observations;
  for (int i = 0; i < 12; ++i) {
    const bool experimental = i % 2 == 0;
    observations.push_back({experimental ? Arm::Experimental : Arm::Control, experimental});
  }
  RngStream rng(73);
  const auto estimate = adaptive_randomization_test(observations, UrnState{1, 1, 1}, 1000, rng);
  CHECK(estimate.p_value >= 1.0 / 1001.0);
  CHECK(estimate.p_value <= 1.0);
}

TEST_CASE("monte carlo p matches exhaustive enumeration at n = 6") {
  const std::vector<bool> successes = {true, false, true, true, false, true};
  // A fixed allocation pattern: E C E C C E.
  std::vector<AdaptiveObservation> observations;
  const std::vector<Arm> arms = {Arm::Experimental, Arm::Control, Arm::Experimental,
                                 Arm::Control, Arm::Control, Arm::Experimental};
  for (std::size_t i = 0; i < arms.size(); ++i) {
    observations.push_back({arms[i], successes[i]});
  }
  RngStream rng(79);
  const auto estimate =
      adaptive_randomization_test(observations, UrnState{1, 1, 1}, 100000, rng);
  const double exact =
      oracle::exact_randomization_p(successes, 1, 1, 1, estimate.point);
  CHECK(std::fabs(estimate.p_value - exact) <= 0.02);
}

TEST_CASE("randomization test preconditions") {
  std::vector<AdaptiveObservation> observations = {
      {Arm::Experimental, true}, {Arm::Experimental, false}, {Arm::Control, true}};
  RngStream rng(81);
  CHECK_THROWS_AS(adaptive_randomization_test(observations, UrnState{1, 1, 1}, 1000, rng),
                  InsufficientDataError);
  observations.push_back({Arm::Control, false});
  CHECK_THROWS_AS(adaptive_randomization_test(observations, UrnState{1, 1, 1}, 999, rng),
                  std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Welch test
// ---------------------------------------------------------------------------

TEST_CASE("identical arms estimate zero") {
  const std::vector<double> arm = {1.0, 2.0, 3.0, 4.0};
  const auto estimate = parallel_test(arm, arm);
  CHECK(estimate.point == 0.0);
  CHECK(estimate.p_value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("arm order convention is experimental minus control") {
  const std::vector<double> experimental = {0.001, -0.002, 0.0005};
  const std::vector<double> control = {1.001, 0.998, 1.0005};
  const auto estimate = parallel_test(experimental, control);
  CHECK(estimate.point == doctest::Approx(-1.0).epsilon(0.01));
}

TEST_CASE("welch matches the textbook formulas") {
  RngStream rng(91);
  std::vector<double> a, b;
  for (int i = 0; i < 9; ++i) a.push_back(rng.normal(1.0, 2.0));
  for (int i = 0; i < 14; ++i) b.push_back(rng.normal(0.0, 0.7));
  const auto estimate = parallel_test(a, b);

  double mean_a = 0.0, mean_b = 0.0;
  for (double v : a) mean_a += v;
  mean_a /= a.size();
  for (double v : b) mean_b += v;
  mean_b /= b.size();
  double var_a = 0.0, var_b = 0.0;
  for (double v : a) var_a += (v - mean_a) * (v - mean_a);
  var_a /= a.size() - 1;
  for (double v : b) var_b += (v - mean_b) * (v - mean_b);
  var_b /= b.size() - 1;
  const double se = std::sqrt(var_a / a.size() + var_b / b.size());

  REQUIRE(estimate.standard_error.has_value());
  CHECK(std::fabs(estimate.point - (mean_a - mean_b)) < 1e-10);
  CHECK(std::fabs(*estimate.standard_error - se) < 1e-10);
}

TEST_CASE("parallel test needs two per arm") {
  CHECK_THROWS_AS(parallel_test({1.0}, {0.0, 0.5}), InsufficientDataError);
}

// ---------------------------------------------------------------------------
// Interim rule
// ---------------------------------------------------------------------------

TEST_CASE("interim decisions") {
  InterimRule rule;
  rule.efficacy_alpha_interim = 0.005;
  rule.futility_p_threshold = 0.6;
  rule.final_alpha = 0.048;
  CHECK(interim_decide(0.001, true, rule) == InterimDecision::StopEfficacy);
  CHECK(interim_decide(0.001, false, rule) == InterimDecision::Continue);
  CHECK(interim_decide(0.7, true, rule) == InterimDecision::StopFutility);
  CHECK(interim_decide(0.10, true, rule) == InterimDecision::Continue);
}

TEST_CASE("interim rule validation") {
  InterimRule rule;
  rule.efficacy_alpha_interim = 0.06;
  rule.final_alpha = 0.048;
  CHECK_THROWS_AS(rule.validate(), ConfigError);
  rule.efficacy_alpha_interim = 0.005;
  rule.information_fraction = 1.0;
  CHECK_THROWS_AS(rule.validate(), ConfigError);
}

TEST_CASE("p-values stay within [0,1] across estimators") {
  RngStream rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CrossoverObservation> data;
    for (int i = 0; i < 8; ++i) {
      data.push_back({i % 2 == 0 ? SequenceOrder::ExperimentalFirst
                                 : SequenceOrder::ControlFirst,
                      rng.normal(0.0, 1.0), rng.normal(0.0, 1.0)});
    }
    const auto estimate = crossover_estimate(data);
    CHECK(estimate.p_value >= 0.0);
    CHECK(estimate.p_value <= 1.0);
  }
}
