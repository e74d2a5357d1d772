#include "rdt/stage2.hpp"

#include <algorithm>
#include <cmath>

#include "rdt/errors.hpp"

namespace rdt {

namespace {

constexpr std::uint64_t kTokenStreamTag = 0x746f6b656eULL;
constexpr std::uint64_t kDropoutStreamTag = 0x64726f70ULL;
constexpr std::uint64_t kInterimStreamTag = 0x696e746572696dULL;

void shuffle_in_place(std::vector<Arm>& block, RngStream& rng) {
  for (std::size_t i = block.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
    std::swap(block[i - 1], block[j]);
  }
}

}  // namespace

const char* design_label(const DesignChoice& design) {
  struct Labeler {
    const char* operator()(const CrossoverDesign&) const { return "crossover"; }
    const char* operator()(const NOf1Design&) const { return "nof1"; }
    const char* operator()(const ResponseAdaptiveDesign&) const { return "adaptive"; }
    const char* operator()(const ParallelGroupDesign&) const { return "parallel"; }
  };
  return std::visit(Labeler{}, design);
}

std::vector<SequenceOrder> plan_crossover(int n_patients, RngStream& rng) {
  if (n_patients < 2) {
    throw DesignInfeasibleError("plan_crossover: need at least 2 patients");
  }
  std::vector<SequenceOrder> sequences;
  sequences.reserve(static_cast<std::size_t>(n_patients));
  for (int i = 0; i + 1 < n_patients; i += 2) {
    const bool ab_first = rng.bernoulli(0.5);
    sequences.push_back(ab_first ? SequenceOrder::ExperimentalFirst
                                 : SequenceOrder::ControlFirst);
    sequences.push_back(ab_first ? SequenceOrder::ControlFirst
                                 : SequenceOrder::ExperimentalFirst);
  }
  if (sequences.size() < static_cast<std::size_t>(n_patients)) {
    sequences.push_back(rng.bernoulli(0.5) ? SequenceOrder::ExperimentalFirst
                                           : SequenceOrder::ControlFirst);
  }
  return sequences;
}

TreatmentSchedule plan_nof1(int cycles, int period_days, int washout_days, RngStream& rng) {
  if (cycles < 2) {
    throw DesignInfeasibleError("plan_nof1: need at least 2 cycles");
  }
  TreatmentSchedule schedule;
  schedule.periods.reserve(static_cast<std::size_t>(2 * cycles));
  for (int c = 0; c < cycles; ++c) {
    const bool experimental_first = rng.bernoulli(0.5);
    const Arm first = experimental_first ? Arm::Experimental : Arm::Control;
    const Arm second = experimental_first ? Arm::Control : Arm::Experimental;
    schedule.periods.push_back(
        {first, period_days, schedule.periods.empty() ? 0 : washout_days});
    schedule.periods.push_back({second, period_days, washout_days});
  }
  return schedule;
}

std::vector<Arm> plan_parallel(int n_patients, RngStream& rng) {
  std::vector<Arm> arms;
  arms.reserve(static_cast<std::size_t>(n_patients));
  while (arms.size() < static_cast<std::size_t>(n_patients)) {
    std::vector<Arm> block = {Arm::Experimental, Arm::Experimental, Arm::Control,
                              Arm::Control};
    shuffle_in_place(block, rng);
    for (const Arm arm : block) {
      if (arms.size() < static_cast<std::size_t>(n_patients)) {
        arms.push_back(arm);
      }
    }
  }
  return arms;
}

Arm urn_draw(const UrnState& urn, RngStream& rng) {
  const double p_experimental =
      static_cast<double>(urn.balls_experimental) /
      static_cast<double>(urn.balls_experimental + urn.balls_control);
  return rng.bernoulli(p_experimental) ? Arm::Experimental : Arm::Control;
}

UrnState urn_update(UrnState urn, Arm drawn_arm, bool success) {
  const Arm rewarded =
      success ? drawn_arm
              : (drawn_arm == Arm::Experimental ? Arm::Control : Arm::Experimental);
  if (rewarded == Arm::Experimental) {
    urn.balls_experimental += urn.add_on_success;
  } else {
    urn.balls_control += urn.add_on_success;
  }
  return urn;
}

std::vector<AllocationRecord> allocation_records(const Stage2Data& data) {
  std::vector<AllocationRecord> records;
  records.reserve(data.patients.size());
  for (const auto& patient : data.patients) {
    AllocationRecord record;
    record.patient_id = patient.patient_id;
    record.urn_at_draw = patient.urn_at_draw;
    for (std::size_t t = 0; t < patient.schedule.periods.size(); ++t) {
      record.entries.push_back({static_cast<int>(t), patient.schedule.periods[t].arm,
                                t < patient.assignment_tokens.size()
                                    ? patient.assignment_tokens[t]
                                    : 0});
    }
    records.push_back(std::move(record));
  }
  return records;
}

namespace {

// Applies per-period dropout: once a patient drops, every later outcome is
// censored as well.
std::vector<std::optional<double>> censor_outcomes(const std::vector<double>& outcomes,
                                                   double dropout_prob, RngStream& rng) {
  std::vector<std::optional<double>> observed;
  observed.reserve(outcomes.size());
  bool dropped = false;
  for (const double value : outcomes) {
    if (!dropped && dropout_prob > 0.0 && rng.bernoulli(dropout_prob)) {
      dropped = true;
    }
    if (dropped) {
      observed.emplace_back(std::nullopt);
    } else {
      observed.emplace_back(value);
    }
  }
  return observed;
}

void record_assignments(const Stage2PatientData& patient, AuditTrail& audit) {
  for (std::size_t t = 0; t < patient.schedule.periods.size(); ++t) {
    TrialEvent event;
    event.kind = EventKind::Assignment;
    event.patient_id = patient.patient_id;
    event.period_index = static_cast<int>(t);
    event.arm = patient.schedule.periods[t].arm;
    event.token = patient.assignment_tokens[t];
    audit.record(event);
  }
}

void record_outcomes(const Stage2PatientData& patient, AuditTrail& audit) {
  int elapsed = 0;
  for (std::size_t t = 0; t < patient.schedule.periods.size(); ++t) {
    const auto& period = patient.schedule.periods[t];
    elapsed += period.preceding_washout_days + period.period_length_days;
    if (!patient.outcomes[t].has_value()) {
      continue;
    }
    TrialEvent event;
    event.kind = EventKind::OutcomeObserved;
    event.patient_id = patient.patient_id;
    event.period_index = static_cast<int>(t);
    event.arm = period.arm;
    event.value = patient.outcomes[t];
    event.day = elapsed;  // offset from the Stage-2 clock
    audit.record(event);
  }
}

std::vector<std::uint64_t> draw_tokens(std::size_t count, RngStream& token_rng) {
  std::vector<std::uint64_t> tokens(count);
  for (auto& token : tokens) {
    token = token_rng.next_u64();
  }
  return tokens;
}

struct InterimOutcome {
  bool stop = false;
};

// Evaluates the interim rule over the first n_used patients; returns whether
// the trial should stop. Skipped silently when the statistic is not yet
// computable.
InterimOutcome evaluate_interim(const Stage2Settings& settings, Stage2Data& data,
                                std::size_t n_used, const OutcomeModel& model,
                                AuditTrail& audit, RngStream& rng) {
  const InterimRule& rule = *settings.interim;
  EffectEstimate estimate;
  try {
    RngStream interim_rng = rng.substream(kInterimStreamTag);
    estimate = analyze_stage2(settings, data, n_used, interim_rng);
  } catch (const InsufficientDataError&) {
    TrialEvent event;
    event.kind = EventKind::InterimEvaluated;
    event.note = "skipped: insufficient data";
    audit.record(event);
    return {false};
  }
  const bool favorable =
      estimate_favorable(estimate, settings.design, model.improvement_direction);
  const InterimDecision decision = interim_decide(estimate.p_value, favorable, rule);

  InterimRecord record;
  record.n_used = static_cast<int>(n_used);
  record.estimate = estimate;
  record.decision = decision;
  data.interim = record;

  TrialEvent event;
  event.kind = EventKind::InterimEvaluated;
  event.value = estimate.p_value;
  event.note = to_string(decision);
  audit.record(event);

  return {decision != InterimDecision::Continue};
}

Stage2Data run_concurrent_stage2(const Stage2Settings& settings,
                                 const std::vector<PatientProfile>& patients,
                                 const OutcomeModel& model, AuditTrail& audit,
                                 RngStream& rng) {
  RngStream token_rng = rng.substream(kTokenStreamTag);
  RngStream dropout_rng = rng.substream(kDropoutStreamTag);

  Stage2Data data;
  data.patients.reserve(patients.size());

  // Plan and conceal every assignment before any outcome exists.
  if (const auto* crossover = std::get_if<CrossoverDesign>(&settings.design)) {
    const auto sequences = plan_crossover(static_cast<int>(patients.size()), rng);
    for (std::size_t i = 0; i < patients.size(); ++i) {
      Stage2PatientData patient;
      patient.patient_id = patients[i].id;
      patient.sequence = sequences[i];
      const Arm first = sequences[i] == SequenceOrder::ExperimentalFirst
                            ? Arm::Experimental
                            : Arm::Control;
      const Arm second = first == Arm::Experimental ? Arm::Control : Arm::Experimental;
      patient.schedule.periods = {{first, settings.period_days, 0},
                                  {second, settings.period_days, crossover->washout_days}};
      patient.assignment_tokens = draw_tokens(2, token_rng);
      data.patients.push_back(std::move(patient));
    }
  } else if (const auto* nof1 = std::get_if<NOf1Design>(&settings.design)) {
    for (const auto& profile : patients) {
      Stage2PatientData patient;
      patient.patient_id = profile.id;
      patient.schedule =
          plan_nof1(nof1->cycles, settings.period_days, nof1->washout_days, rng);
      patient.assignment_tokens = draw_tokens(patient.schedule.periods.size(), token_rng);
      data.patients.push_back(std::move(patient));
    }
  } else if (std::holds_alternative<ParallelGroupDesign>(settings.design)) {
    const auto arms = plan_parallel(static_cast<int>(patients.size()), rng);
    for (std::size_t i = 0; i < patients.size(); ++i) {
      Stage2PatientData patient;
      patient.patient_id = patients[i].id;
      patient.schedule.periods = {{arms[i], settings.period_days, 0}};
      patient.assignment_tokens = draw_tokens(1, token_rng);
      data.patients.push_back(std::move(patient));
    }
  }

  for (auto& patient : data.patients) {
    record_assignments(patient, audit);
  }

  for (std::size_t i = 0; i < data.patients.size(); ++i) {
    auto& patient = data.patients[i];
    const auto raw = simulate_outcomes(patients[i], patient.schedule, model, rng);
    patient.outcomes = censor_outcomes(raw, settings.dropout_prob, dropout_rng);
    record_outcomes(patient, audit);
  }

  data.analyzed_count = data.patients.size();
  if (settings.interim) {
    const auto planned = data.patients.size();
    const auto n_interim = static_cast<std::size_t>(
        std::ceil(settings.interim->information_fraction * static_cast<double>(planned)));
    if (n_interim >= 2 && n_interim < planned) {
      const auto outcome = evaluate_interim(settings, data, n_interim, model, audit, rng);
      if (outcome.stop) {
        data.analyzed_count = n_interim;
      }
    }
  }
  return data;
}

Stage2Data run_adaptive_stage2(const Stage2Settings& settings,
                               const std::vector<PatientProfile>& patients,
                               const OutcomeModel& model, AuditTrail& audit,
                               RngStream& rng) {
  const auto& adaptive = std::get<ResponseAdaptiveDesign>(settings.design);
  RngStream token_rng = rng.substream(kTokenStreamTag);
  RngStream dropout_rng = rng.substream(kDropoutStreamTag);

  Stage2Data data;
  const auto planned = patients.size();
  const std::size_t n_interim =
      settings.interim
          ? static_cast<std::size_t>(std::ceil(settings.interim->information_fraction *
                                               static_cast<double>(planned)))
          : 0;

  UrnState urn = adaptive.urn;
  const double sign = direction_sign(model.improvement_direction);
  bool stopped = false;
  for (std::size_t i = 0; i < planned && !stopped; ++i) {
    const auto& profile = patients[i];
    Stage2PatientData patient;
    patient.patient_id = profile.id;
    patient.urn_at_draw = urn;
    const Arm arm = urn_draw(urn, rng);
    patient.schedule.periods = {{arm, settings.period_days, 0}};
    patient.assignment_tokens = draw_tokens(1, token_rng);
    record_assignments(patient, audit);

    const auto raw = simulate_outcomes(profile, patient.schedule, model, rng);
    patient.outcomes = censor_outcomes(raw, settings.dropout_prob, dropout_rng);
    record_outcomes(patient, audit);

    if (patient.outcomes.front().has_value()) {
      const double improvement = sign * (*patient.outcomes.front() - profile.baseline_level);
      const bool success = improvement >= adaptive.success_threshold;
      patient.success = success;
      urn = urn_update(urn, arm, success);
    }
    data.patients.push_back(std::move(patient));

    if (settings.interim && data.patients.size() == n_interim && n_interim >= 2 &&
        n_interim < planned) {
      const auto outcome = evaluate_interim(settings, data, n_interim, model, audit, rng);
      stopped = outcome.stop;
    }
  }
  data.analyzed_count = data.patients.size();
  return data;
}

}  // namespace

Stage2Data run_stage2(const Stage2Settings& settings,
                      const std::vector<PatientProfile>& patients, const OutcomeModel& model,
                      AuditTrail& audit, RngStream& rng) {
  if (patients.empty()) {
    throw DesignInfeasibleError("run_stage2: no patients");
  }
  if (settings.interim) {
    settings.interim->validate();
  }
  if (std::holds_alternative<ResponseAdaptiveDesign>(settings.design)) {
    return run_adaptive_stage2(settings, patients, model, audit, rng);
  }
  return run_concurrent_stage2(settings, patients, model, audit, rng);
}

EffectEstimate analyze_stage2(const Stage2Settings& settings, const Stage2Data& data,
                              std::size_t limit, RngStream& analysis_rng,
                              MetaResult* meta_out) {
  const std::size_t n = std::min(limit, data.patients.size());

  if (std::holds_alternative<CrossoverDesign>(settings.design)) {
    std::vector<CrossoverObservation> observations;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& patient = data.patients[i];
      if (patient.outcomes.size() == 2 && patient.outcomes[0] && patient.outcomes[1]) {
        observations.push_back(
            {patient.sequence, *patient.outcomes[0], *patient.outcomes[1]});
      }
    }
    return crossover_estimate(observations);
  }

  if (std::holds_alternative<NOf1Design>(settings.design)) {
    std::vector<PatientEffect> per_patient;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& patient = data.patients[i];
      std::vector<CyclePair> cycles;
      for (std::size_t t = 0; t + 1 < patient.schedule.periods.size(); t += 2) {
        const auto& first = patient.outcomes[t];
        const auto& second = patient.outcomes[t + 1];
        if (!first || !second) {
          continue;
        }
        const bool exp_first = patient.schedule.periods[t].arm == Arm::Experimental;
        cycles.push_back(exp_first ? CyclePair{*first, *second}
                                   : CyclePair{*second, *first});
      }
      if (cycles.size() >= 2) {
        per_patient.push_back(nof1_effect(cycles));
      }
    }
    if (per_patient.size() < 2) {
      throw InsufficientDataError("analyze_stage2: <2 evaluable n-of-1 patients");
    }
    if (meta_out != nullptr) {
      *meta_out = meta_combine(per_patient);
    }
    return nof1_series_estimate(per_patient);
  }

  if (const auto* adaptive = std::get_if<ResponseAdaptiveDesign>(&settings.design)) {
    std::vector<AdaptiveObservation> observations;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& patient = data.patients[i];
      if (patient.success.has_value()) {
        observations.push_back(
            {patient.schedule.periods.front().arm, *patient.success});
      }
    }
    return adaptive_randomization_test(observations, adaptive->urn, settings.n_resamples,
                                       analysis_rng);
  }

  // Parallel group: Welch t on the raw single-period outcomes.
  std::vector<double> experimental;
  std::vector<double> control;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& patient = data.patients[i];
    if (!patient.outcomes.empty() && patient.outcomes.front()) {
      (patient.schedule.periods.front().arm == Arm::Experimental ? experimental : control)
          .push_back(*patient.outcomes.front());
    }
  }
  return parallel_test(experimental, control);
}

bool estimate_favorable(const EffectEstimate& estimate, const DesignChoice& design,
                        ImprovementDirection direction) {
  if (std::holds_alternative<ResponseAdaptiveDesign>(design)) {
    // Success proportions are already improvement-oriented.
    return estimate.point > 0.0;
  }
  return estimate.point * direction_sign(direction) > 0.0;
}

}  // namespace rdt
