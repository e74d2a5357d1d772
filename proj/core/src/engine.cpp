#include "rdt/engine.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "rdt/errors.hpp"

namespace rdt {

namespace {

constexpr std::uint64_t kStage1StreamTag = 0x7374616765310aULL;
constexpr std::uint64_t kStage2StreamTag = 0x7374616765320aULL;
constexpr std::uint64_t kAnalysisStreamTag = 0x616e616c797a65ULL;
constexpr std::uint64_t kRecruitStreamTag = 0x72656372756974ULL;

std::optional<Arm> superior_arm_of(const OutcomeModel& model) {
  if (model.responder_effect > 0.0) return Arm::Experimental;
  if (model.responder_effect < 0.0) return Arm::Control;
  return std::nullopt;
}

void record_enrollment(AuditTrail& audit, int patient_id) {
  TrialEvent event;
  event.kind = EventKind::Enrolled;
  event.patient_id = patient_id;
  audit.record(event);
}

void record_stage1_outcomes(AuditTrail& audit, const Stage1Result& stage1, int period_days) {
  for (const auto& record : stage1.patients) {
    TrialEvent event;
    event.kind = EventKind::OutcomeObserved;
    event.patient_id = record.patient_id;
    event.period_index = 0;
    event.arm = Arm::Experimental;
    event.value = record.post;
    event.day = period_days;  // end of the enrichment period
    audit.record(event);
  }
}

std::optional<LogisticFit> fit_stage1_association(const std::vector<PatientProfile>& population,
                                                  const Stage1Result& stage1) {
  const std::size_t k = population.empty() ? 0 : population.front().covariates.size();
  if (k == 0 || population.size() < k + 2) {
    return std::nullopt;
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(population.size());
  for (const auto& profile : population) {
    rows.push_back(profile.covariates);
  }
  std::vector<int> labels;
  labels.reserve(stage1.patients.size());
  for (const auto& record : stage1.patients) {
    labels.push_back(record.classified_responder ? 1 : 0);
  }
  try {
    return fit_logistic(DesignMatrix::with_intercept(rows), labels);
  } catch (const SingularDesignError&) {
    return std::nullopt;
  }
}

void compute_classification_accuracy(const std::vector<PatientProfile>& population,
                                     const Stage1Result& stage1, TrialResult& result) {
  int true_positive = 0, false_negative = 0, true_negative = 0, false_positive = 0;
  for (std::size_t i = 0; i < population.size(); ++i) {
    const bool latent = population[i].latent_responder;
    const bool classified = stage1.patients[i].classified_responder;
    if (latent && classified) ++true_positive;
    if (latent && !classified) ++false_negative;
    if (!latent && !classified) ++true_negative;
    if (!latent && classified) ++false_positive;
  }
  if (true_positive + false_negative > 0) {
    result.classification_sensitivity =
        static_cast<double>(true_positive) / (true_positive + false_negative);
  }
  if (true_negative + false_positive > 0) {
    result.classification_specificity =
        static_cast<double>(true_negative) / (true_negative + false_positive);
  }
}

// Fresh recruits for the non-reversible variant, screened by the exclusion
// rule when one is available.
std::vector<PatientProfile> recruit_stage2_cohort(const ScenarioConfig& scenario,
                                                  const std::optional<ExclusionRule>& rule,
                                                  AuditTrail& audit, RngStream& rng) {
  std::vector<PatientProfile> cohort;
  const int target = scenario.stage2.n_patients;
  int next_id = scenario.population.n_stage1;
  const int max_candidates = std::max(1000, 100 * target);
  for (int attempt = 0; attempt < max_candidates && static_cast<int>(cohort.size()) < target;
       ++attempt) {
    PatientProfile candidate = sample_patient(scenario.population, next_id++, rng);
    if (rule && rule->excludes(candidate.covariates)) {
      continue;
    }
    record_enrollment(audit, candidate.id);
    cohort.push_back(std::move(candidate));
  }
  return cohort;
}

}  // namespace

const char* to_string(FinalDecision decision) {
  switch (decision) {
    case FinalDecision::EffectiveForResponders: return "effective-for-responders";
    case FinalDecision::Ineffective: return "ineffective";
    case FinalDecision::StoppedEarly: return "stopped-early";
  }
  return "?";
}

TrialMetrics compute_metrics(const AuditTrail& audit, std::optional<Arm> superior_arm) {
  TrialMetrics metrics;
  metrics.total_duration_days = audit.current_day();

  std::set<int> enrolled;
  std::set<int> exposed;
  std::set<int> stage2_patients;
  std::set<int> stage2_exposed;
  std::map<int, Arm> first_stage2_arm;
  std::map<int, int> stage2_assignments;

  for (const auto& event : audit.events()) {
    switch (event.kind) {
      case EventKind::Enrolled:
        enrolled.insert(event.patient_id);
        break;
      case EventKind::OutcomeObserved:
        if (event.arm == Arm::Experimental) {
          exposed.insert(event.patient_id);
        }
        if (event.phase == TrialPhase::Stage2 && event.arm == Arm::Experimental) {
          stage2_exposed.insert(event.patient_id);
        }
        break;
      case EventKind::Assignment:
        if (event.phase == TrialPhase::Stage2) {
          stage2_patients.insert(event.patient_id);
          ++stage2_assignments[event.patient_id];
          if (!first_stage2_arm.contains(event.patient_id) && event.arm) {
            first_stage2_arm[event.patient_id] = *event.arm;
          }
        }
        break;
      default:
        break;
    }
  }

  metrics.total_enrolled = static_cast<int>(enrolled.size());
  metrics.stage2_n = static_cast<int>(stage2_patients.size());
  if (!enrolled.empty()) {
    int exposed_enrolled = 0;
    for (const int id : enrolled) {
      exposed_enrolled += exposed.contains(id) ? 1 : 0;
    }
    metrics.access_proportion = static_cast<double>(exposed_enrolled) /
                                static_cast<double>(enrolled.size());
  }
  if (!stage2_patients.empty()) {
    int exposed_stage2 = 0;
    for (const int id : stage2_patients) {
      exposed_stage2 += stage2_exposed.contains(id) ? 1 : 0;
    }
    metrics.stage2_access_proportion = static_cast<double>(exposed_stage2) /
                                       static_cast<double>(stage2_patients.size());

    const bool single_treatment =
        std::all_of(stage2_assignments.begin(), stage2_assignments.end(),
                    [](const auto& entry) { return entry.second == 1; });
    if (superior_arm && single_treatment) {
      int on_superior = 0;
      for (const auto& [id, arm] : first_stage2_arm) {
        on_superior += arm == *superior_arm ? 1 : 0;
      }
      metrics.superior_arm_allocation = static_cast<double>(on_superior) /
                                        static_cast<double>(stage2_patients.size());
    }
  }
  return metrics;
}

TrialResult run_trial(const ScenarioConfig& scenario, std::uint64_t seed) {
  scenario.validate();

  TrialResult result;
  AuditTrail& audit = result.audit;

  // Enrollment.
  result.stage1_population = generate_population(scenario.population, seed);
  for (const auto& profile : result.stage1_population) {
    record_enrollment(audit, profile.id);
  }

  // Stage 1: enrichment.
  audit.transition(TrialPhase::Stage1);
  RngStream stage1_rng(mix64(seed, kStage1StreamTag));
  result.stage1 = run_stage1(result.stage1_population, scenario.population.outcome,
                             scenario.stage1.criteria, scenario.stage1.p_min, stage1_rng);
  record_stage1_outcomes(audit, result.stage1, scenario.stage1.period_days);
  audit.advance_day(scenario.stage1.period_days);
  compute_classification_accuracy(result.stage1_population, result.stage1, result);

  // Exploratory association analysis (always run; reported as exploratory).
  result.logistic = fit_stage1_association(result.stage1_population, result.stage1);

  // Gate.
  audit.transition(TrialPhase::Gate);
  {
    TrialEvent event;
    event.kind = EventKind::GateEvaluated;
    event.value = result.stage1.responder_proportion;
    event.note = result.stage1.gate == GateOutcome::Proceed ? "proceed" : "stop-futility";
    audit.record(event);
  }
  const std::optional<Arm> superior = superior_arm_of(scenario.population.outcome);
  if (result.stage1.gate == GateOutcome::StopFutility) {
    audit.stop(StopReason::Stage1Futility);
    result.final_decision = FinalDecision::StoppedEarly;
    result.end_reason = StopReason::Stage1Futility;
    result.metrics = compute_metrics(audit, superior);
    return result;
  }

  // Washout between stages.
  audit.transition(TrialPhase::Washout);
  audit.advance_day(scenario.stage2.washout_days);

  // Stage 2 cohort.
  audit.transition(TrialPhase::Stage2);
  RngStream recruit_rng(mix64(seed, kRecruitStreamTag));
  std::vector<PatientProfile> cohort;
  if (scenario.stage2.non_reversible_mode) {
    std::optional<ExclusionRule> rule;
    if (result.logistic) {
      try {
        rule = derive_exclusion_rule(*result.logistic,
                                     scenario.population.covariates.size(),
                                     scenario.stage2.prob_cutoff);
      } catch (const RuleUnavailableError&) {
        rule = std::nullopt;
      }
    }
    if (!rule) {
      // Protocol deviation: recruit on Stage-1 inclusion criteria only.
      result.protocol_deviation = true;
      TrialEvent event;
      event.kind = EventKind::ProtocolDeviation;
      event.note = "exclusion rule unavailable; recruiting without screening";
      audit.record(event);
    }
    cohort = recruit_stage2_cohort(scenario, rule, audit, recruit_rng);
  } else {
    for (std::size_t i = 0; i < result.stage1_population.size(); ++i) {
      if (result.stage1.patients[i].classified_responder) {
        cohort.push_back(result.stage1_population[i]);
      }
    }
  }

  const Stage2Settings settings = scenario.stage2_settings();
  RngStream stage2_rng(mix64(seed, kStage2StreamTag));
  if (cohort.empty()) {
    audit.stop(StopReason::DesignInfeasible);
    result.final_decision = FinalDecision::StoppedEarly;
    result.end_reason = StopReason::DesignInfeasible;
    result.metrics = compute_metrics(audit, superior);
    return result;
  }
  try {
    result.stage2 = run_stage2(settings, cohort, scenario.population.outcome, audit,
                               stage2_rng);
  } catch (const DesignInfeasibleError&) {
    audit.stop(StopReason::DesignInfeasible);
    result.final_decision = FinalDecision::StoppedEarly;
    result.end_reason = StopReason::DesignInfeasible;
    result.metrics = compute_metrics(audit, superior);
    return result;
  }
  const Stage2Data& data = *result.stage2;

  // Stage-2 calendar window: patients run concurrently, so the stage lasts
  // as long as the longest single-patient schedule.
  int window = 0;
  for (const auto& patient : data.patients) {
    window = std::max(window, patient.schedule.total_days());
  }
  audit.advance_day(window);

  // Final decision.
  if (data.interim && data.interim->decision != InterimDecision::Continue) {
    result.effect = data.interim->estimate;
    if (std::holds_alternative<NOf1Design>(settings.design)) {
      MetaResult meta;
      RngStream dummy(0);
      try {
        analyze_stage2(settings, data, data.analyzed_count, dummy, &meta);
        result.meta = meta;
      } catch (const InsufficientDataError&) {
      }
    }
    if (data.interim->decision == InterimDecision::StopEfficacy) {
      audit.stop(StopReason::InterimEfficacy);
      result.final_decision = FinalDecision::EffectiveForResponders;
      result.end_reason = StopReason::InterimEfficacy;
    } else {
      audit.stop(StopReason::InterimFutility);
      result.final_decision = FinalDecision::StoppedEarly;
      result.end_reason = StopReason::InterimFutility;
    }
    result.metrics = compute_metrics(audit, superior);
    return result;
  }

  RngStream analysis_rng(mix64(seed, kAnalysisStreamTag));
  MetaResult meta;
  EffectEstimate estimate;
  try {
    estimate = analyze_stage2(settings, data, data.analyzed_count, analysis_rng,
                              std::holds_alternative<NOf1Design>(settings.design) ? &meta
                                                                                  : nullptr);
  } catch (const InsufficientDataError&) {
    audit.stop(StopReason::DesignInfeasible);
    result.final_decision = FinalDecision::StoppedEarly;
    result.end_reason = StopReason::DesignInfeasible;
    result.metrics = compute_metrics(audit, superior);
    return result;
  }
  if (std::holds_alternative<NOf1Design>(settings.design)) {
    result.meta = meta;
  }
  result.effect = estimate;
  {
    TrialEvent event;
    event.kind = EventKind::FinalAnalysisDone;
    event.value = estimate.p_value;
    event.note = estimate.method;
    audit.record(event);
  }
  audit.complete();
  result.end_reason = StopReason::FinalAnalysis;
  result.final_decision = estimate.p_value < scenario.mc.alpha_final
                              ? FinalDecision::EffectiveForResponders
                              : FinalDecision::Ineffective;
  result.metrics = compute_metrics(audit, superior);
  return result;
}

}  // namespace rdt
