#pragma once

#include <span>
#include <vector>

#include "rdt/logistic.hpp"
#include "rdt/population.hpp"
#include "rdt/rng.hpp"
#include "rdt/types.hpp"

namespace rdt {

/// Pre-specified responder criteria: minimum improvement plus, optionally, a
/// positive patient self-report. The sensitivity/specificity pair is the
/// noise model of the simulated self-report channel.
struct ResponderCriteria {
  double improvement_threshold = 0.0;  // tau, outcome units
  bool require_patient_report = false;
  double report_sensitivity = 1.0;
  double report_specificity = 1.0;

  void validate() const;
};

struct Stage1PatientRecord {
  int patient_id = 0;
  double pre = 0.0;
  double post = 0.0;
  double improvement = 0.0;
  bool self_report = false;
  bool classified_responder = false;
};

enum class GateOutcome { Proceed, StopFutility };

struct Stage1Result {
  std::vector<Stage1PatientRecord> patients;
  GateOutcome gate = GateOutcome::StopFutility;
  double responder_proportion = 0.0;

  int responder_count() const;
};

/// Improvement is post-pre for increasing outcomes, pre-post for decreasing.
/// Classifies on observables only; ties at the threshold count as response.
bool classify_responder(double pre, double post, ImprovementDirection direction,
                        const ResponderCriteria& criteria, bool self_report);

/// Proceed iff the responder proportion meets p_min (ties proceed).
GateOutcome gate_decision(int n_responders, int n_total, double p_min);

/// Enrichment stage: every patient gets one experimental period; the
/// self-report channel is drawn from latent responder status.
Stage1Result run_stage1(const std::vector<PatientProfile>& population,
                        const OutcomeModel& model, const ResponderCriteria& criteria,
                        double p_min, RngStream& rng);

/// Screening predicate for Stage-2 recruitment: excludes covariate vectors
/// whose predicted response probability falls below the cutoff.
struct ExclusionRule {
  std::vector<double> coefficients;  // intercept first, then one per covariate
  double prob_cutoff = 0.0;

  double predicted_probability(std::span<const double> covariates) const;
  bool excludes(std::span<const double> covariates) const;
};

/// Builds the rule from a logistic fit. Throws RuleUnavailableError when the
/// fit did not converge or separation was detected; callers fall back to no
/// exclusion.
ExclusionRule derive_exclusion_rule(const LogisticFit& fit, std::size_t n_covariates,
                                    double prob_cutoff);

}  // namespace rdt
