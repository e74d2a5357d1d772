#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rdt/rng.hpp"
#include "rdt/types.hpp"

namespace rdt {

struct BernoulliDist {
  double p = 0.5;
};

struct NormalDist {
  double mean = 0.0;
  double sd = 1.0;
};

/// Realized value is the sampled level index (0-based), so a single
/// coefficient scales linearly in the level.
struct CategoricalDist {
  std::vector<double> level_probabilities;
};

using CovariateDistribution = std::variant<BernoulliDist, NormalDist, CategoricalDist>;

/// One baseline characteristic: how it is sampled and how it shifts the
/// responder propensity (log-odds scale) and the baseline outcome level.
struct CovariateSpec {
  std::string name;
  CovariateDistribution distribution;
  double response_logit_coef = 0.0;
  double outcome_coef = 0.0;

  /// Throws ConfigError naming this covariate when parameters are invalid.
  void validate() const;
};

/// Generative outcome model shared by every design.
///
/// Outcomes are continuous Gaussian. A period's mean is
///   baseline + period_effect * period_index
///   + signed individual effect while on experimental treatment
///   + carryover_coef * signed individual effect when the previous period
///     was experimental and the intervening washout was shorter than
///     washout_full_days (reversible outcomes only).
/// For non-reversible outcomes the baseline ratchets up by the individual
/// effect after the first experimental period and later experimental
/// periods add nothing further.
struct OutcomeModel {
  double baseline_mean = 0.0;
  double responder_effect = 0.0;       // mean improvement for latent responders
  double nonresponder_effect = 0.0;
  double period_effect = 0.0;          // drift per period index
  double carryover_coef = 0.0;         // fraction persisting across short washouts
  double residual_sd = 1.0;
  double effect_heterogeneity_sd = 0.0;  // spread of responder effects
  int washout_full_days = 0;           // washouts >= this clear prior exposure
  ImprovementDirection improvement_direction = ImprovementDirection::Increase;
  bool reversible = true;

  void validate() const;
};

/// Latent ground truth plus observable baseline data for one patient.
/// latent_responder and individual_effect are the simulator's oracle; they
/// must never feed classification or analysis.
struct PatientProfile {
  int id = 0;
  std::vector<double> covariates;
  bool latent_responder = false;
  double individual_effect = 0.0;
  double baseline_level = 0.0;
};

struct SchedulePeriod {
  Arm arm = Arm::Control;
  int period_length_days = 1;
  int preceding_washout_days = 0;
};

struct TreatmentSchedule {
  std::vector<SchedulePeriod> periods;

  int total_days() const;
};

/// Population block of a scenario: cohort size, responder-propensity model
/// and the outcome model.
struct PopulationModel {
  int n_stage1 = 0;
  double response_intercept = 0.0;  // log-odds of responding with all covariates zero
  std::vector<CovariateSpec> covariates;
  OutcomeModel outcome;

  void validate() const;
};

double inverse_logit(double x);

/// True responder propensity for a realized covariate vector.
double response_propensity(const PopulationModel& model, std::span<const double> covariates);

/// Draws one patient profile. Fresh Stage-2 recruits are generated with the
/// same routine under a different id/stream.
PatientProfile sample_patient(const PopulationModel& model, int id, RngStream& rng);

/// Deterministic in (model, seed): same inputs give byte-identical profiles.
std::vector<PatientProfile> generate_population(const PopulationModel& model, std::uint64_t seed);

/// Per-period outcomes for one patient on a treatment schedule.
///
/// Pure over the explicit stream; the profile is not mutated (the
/// non-reversible ratchet is tracked locally within the call).
std::vector<double> simulate_outcomes(const PatientProfile& profile,
                                      const TreatmentSchedule& schedule,
                                      const OutcomeModel& model, RngStream& rng);

}  // namespace rdt
