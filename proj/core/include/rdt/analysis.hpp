#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rdt/rng.hpp"
#include "rdt/types.hpp"

namespace rdt {

/// Treatment effect on the outcome scale, experimental minus control.
/// standard_error is absent for the randomization test, which has no
/// model-based variance.
struct EffectEstimate {
  double point = 0.0;
  std::optional<double> standard_error;
  double p_value = 1.0;
  std::string method;
  int n_used = 0;
};

struct CrossoverObservation {
  SequenceOrder sequence = SequenceOrder::ExperimentalFirst;
  double period1_outcome = 0.0;
  double period2_outcome = 0.0;
};

/// 2x2 crossover period-difference estimator.
///
/// With d_i = period1 - period2, the estimate is
/// (mean d over AB - mean d over BA) / 2, which cancels any shared period
/// effect; SE and p come from the pooled two-sample t on the d's, which is
/// numerically identical to OLS of outcome ~ treatment + period + patient.
EffectEstimate crossover_estimate(const std::vector<CrossoverObservation>& data);

struct CyclePair {
  double experimental = 0.0;
  double control = 0.0;
};

struct PatientEffect {
  double estimate = 0.0;
  double variance = 0.0;
};

/// One patient's n-of-1 summary: mean of within-cycle differences and its
/// variance (sample variance of differences divided by the cycle count).
PatientEffect nof1_effect(const std::vector<CyclePair>& cycles);

struct MetaResult {
  double pooled_effect = 0.0;
  double pooled_se = 0.0;
  double tau_squared = 0.0;  // between-patient variance
  std::vector<PatientEffect> per_patient;
  int floored_variances = 0;  // inputs clamped to the 1e-12 variance floor
};

/// DerSimonian-Laird random-effects pooling of per-patient effects.
///
/// Q = sum w_i (e_i - weighted mean)^2 with w_i = 1/v_i,
/// tau^2 = max(0, (Q - (m-1)) / (sum w - sum w^2 / sum w)),
/// pooled = sum e_i/(v_i+tau^2) / sum 1/(v_i+tau^2),
/// pooled_se = (sum 1/(v_i+tau^2))^(-1/2).
/// Zero variances are floored at 1e-12 and counted in floored_variances.
MetaResult meta_combine(const std::vector<PatientEffect>& per_patient);

/// Population-level test for a series of n-of-1 trials: DerSimonian-Laird
/// pooling with Hartung-Knapp variance and a t reference on m-1 degrees of
/// freedom, which keeps the test calibrated at small patient counts.
EffectEstimate nof1_series_estimate(const std::vector<PatientEffect>& per_patient);

struct AdaptiveObservation {
  Arm arm = Arm::Control;
  bool success = false;
};

/// Randomization test for response-adaptive allocation.
///
/// The observed statistic is the difference in arm success proportions.
/// Under the null the per-patient responses are attached to the patients,
/// and only the urn's allocation randomness is replayed: each resample
/// re-runs the play-the-winner urn over the fixed response sequence.
/// p = (1 + #{resampled |stat| >= observed |stat|}) / (n_resamples + 1).
EffectEstimate adaptive_randomization_test(const std::vector<AdaptiveObservation>& observations,
                                           const UrnState& initial_urn, int n_resamples,
                                           RngStream& rng);

/// Welch two-sample t, experimental minus control.
EffectEstimate parallel_test(const std::vector<double>& experimental,
                             const std::vector<double>& control);

enum class InterimDecision { Continue, StopEfficacy, StopFutility };

struct InterimRule {
  double information_fraction = 0.5;
  double efficacy_alpha_interim = 0.005;
  double futility_p_threshold = 0.6;
  double final_alpha = 0.048;

  void validate() const;
};

/// One-look group-sequential rule: stop for efficacy on a small favorable p,
/// stop for futility on a large p, otherwise continue.
InterimDecision interim_decide(double interim_p, bool direction_favorable,
                               const InterimRule& rule);

const char* to_string(InterimDecision decision);

}  // namespace rdt
