#include "rdt/stage1.hpp"

#include <cmath>

#include "rdt/errors.hpp"

namespace rdt {

void ResponderCriteria::validate() const {
  if (!(report_sensitivity >= 0.0 && report_sensitivity <= 1.0)) {
    throw ConfigError("stage1: report_sensitivity must be in [0,1]");
  }
  if (!(report_specificity >= 0.0 && report_specificity <= 1.0)) {
    throw ConfigError("stage1: report_specificity must be in [0,1]");
  }
}

int Stage1Result::responder_count() const {
  int count = 0;
  for (const auto& record : patients) {
    count += record.classified_responder ? 1 : 0;
  }
  return count;
}

bool classify_responder(double pre, double post, ImprovementDirection direction,
                        const ResponderCriteria& criteria, bool self_report) {
  const double improvement =
      direction == ImprovementDirection::Increase ? post - pre : pre - post;
  const bool meets_threshold = improvement >= criteria.improvement_threshold;
  const bool report_ok = self_report || !criteria.require_patient_report;
  return meets_threshold && report_ok;
}

GateOutcome gate_decision(int n_responders, int n_total, double p_min) {
  if (n_total < 1 || n_responders < 0 || n_responders > n_total) {
    throw std::invalid_argument("gate_decision: responder count out of range");
  }
  if (!(p_min >= 0.0 && p_min <= 1.0)) {
    throw std::invalid_argument("gate_decision: p_min must be in [0,1]");
  }
  const double proportion = static_cast<double>(n_responders) / static_cast<double>(n_total);
  return proportion >= p_min ? GateOutcome::Proceed : GateOutcome::StopFutility;
}

Stage1Result run_stage1(const std::vector<PatientProfile>& population,
                        const OutcomeModel& model, const ResponderCriteria& criteria,
                        double p_min, RngStream& rng) {
  if (population.empty()) {
    throw std::invalid_argument("run_stage1: population must be non-empty");
  }
  criteria.validate();

  const TreatmentSchedule enrichment{{SchedulePeriod{Arm::Experimental, 1, 0}}};

  Stage1Result result;
  result.patients.reserve(population.size());
  for (const auto& profile : population) {
    Stage1PatientRecord record;
    record.patient_id = profile.id;
    record.pre = profile.baseline_level;
    record.post = simulate_outcomes(profile, enrichment, model, rng).front();
    record.improvement = model.improvement_direction == ImprovementDirection::Increase
                             ? record.post - record.pre
                             : record.pre - record.post;
    // The self-report channel reflects the patient's true experience, not the
    // clinical measurement.
    record.self_report = profile.latent_responder
                             ? rng.bernoulli(criteria.report_sensitivity)
                             : !rng.bernoulli(criteria.report_specificity);
    record.classified_responder = classify_responder(
        record.pre, record.post, model.improvement_direction, criteria, record.self_report);
    result.patients.push_back(record);
  }

  const int responders = result.responder_count();
  result.responder_proportion =
      static_cast<double>(responders) / static_cast<double>(result.patients.size());
  result.gate = gate_decision(responders, static_cast<int>(result.patients.size()), p_min);
  return result;
}

double ExclusionRule::predicted_probability(std::span<const double> covariates) const {
  double logit = coefficients.empty() ? 0.0 : coefficients.front();
  for (std::size_t j = 0; j + 1 < coefficients.size() && j < covariates.size(); ++j) {
    logit += coefficients[j + 1] * covariates[j];
  }
  return inverse_logit(logit);
}

bool ExclusionRule::excludes(std::span<const double> covariates) const {
  return predicted_probability(covariates) < prob_cutoff;
}

ExclusionRule derive_exclusion_rule(const LogisticFit& fit, std::size_t n_covariates,
                                    double prob_cutoff) {
  if (!(prob_cutoff > 0.0 && prob_cutoff < 1.0)) {
    throw std::invalid_argument("derive_exclusion_rule: prob_cutoff must be in (0,1)");
  }
  if (!fit.converged || fit.separation_detected) {
    throw RuleUnavailableError("derive_exclusion_rule: logistic fit unusable");
  }
  if (fit.coefficients.size() != n_covariates + 1) {
    throw std::invalid_argument("derive_exclusion_rule: coefficient arity mismatch");
  }
  return ExclusionRule{fit.coefficients, prob_cutoff};
}

}  // namespace rdt
