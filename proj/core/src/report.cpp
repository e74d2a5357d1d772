#include "rdt/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "rdt/errors.hpp"

namespace rdt {

namespace {

using nlohmann::json;

std::string cell(double value) {
  return std::isnan(value) ? std::string() : format_number(value);
}

/// Value as it appears in reports: rounded to 6 significant digits so CSV
/// and JSON carry numerically identical numbers.
json json_number(double value) {
  if (std::isnan(value)) {
    return nullptr;
  }
  return std::stod(format_number(value));
}

double parse_cell(const std::string& text) {
  if (text.empty()) {
    return std::nan("");
  }
  return std::stod(text);
}

const char* const kOcColumns[] = {
    "design",
    "replications",
    "rejection_rate",
    "rejection_rate_mcse",
    "stage1_stop_rate",
    "stage1_stop_rate_mcse",
    "mean_total_n",
    "mean_total_n_mcse",
    "mean_duration_days",
    "mean_duration_days_mcse",
    "mean_access_proportion",
    "mean_access_proportion_mcse",
    "mean_stage2_n",
    "mean_stage2_n_mcse",
    "stage2_access_proportion",
    "stage2_access_proportion_mcse",
    "classification_sensitivity",
    "classification_sensitivity_mcse",
    "classification_specificity",
    "classification_specificity_mcse",
    "superior_arm_allocation",
    "superior_arm_allocation_mcse",
    "mean_effect_point",
    "mean_effect_point_mcse",
};

json oc_to_json(const OperatingCharacteristics& oc) {
  json row;
  row["design"] = oc.design_label;
  row["replications"] = oc.replications;
  row["rejection_rate"] = json_number(oc.rejection_rate.value);
  row["rejection_rate_mcse"] = json_number(oc.rejection_rate.mc_se);
  row["stage1_stop_rate"] = json_number(oc.stage1_stop_rate.value);
  row["stage1_stop_rate_mcse"] = json_number(oc.stage1_stop_rate.mc_se);
  row["mean_total_n"] = json_number(oc.mean_total_n.value);
  row["mean_total_n_mcse"] = json_number(oc.mean_total_n.mc_se);
  row["mean_duration_days"] = json_number(oc.mean_duration_days.value);
  row["mean_duration_days_mcse"] = json_number(oc.mean_duration_days.mc_se);
  row["mean_access_proportion"] = json_number(oc.mean_access_proportion.value);
  row["mean_access_proportion_mcse"] = json_number(oc.mean_access_proportion.mc_se);
  row["mean_stage2_n"] = json_number(oc.mean_stage2_n.value);
  row["mean_stage2_n_mcse"] = json_number(oc.mean_stage2_n.mc_se);
  row["stage2_access_proportion"] = json_number(oc.stage2_access_proportion.value);
  row["stage2_access_proportion_mcse"] = json_number(oc.stage2_access_proportion.mc_se);
  row["classification_sensitivity"] = json_number(oc.classification_sensitivity.value);
  row["classification_sensitivity_mcse"] = json_number(oc.classification_sensitivity.mc_se);
  row["classification_specificity"] = json_number(oc.classification_specificity.value);
  row["classification_specificity_mcse"] = json_number(oc.classification_specificity.mc_se);
  row["superior_arm_allocation"] = json_number(oc.superior_arm_allocation.value);
  row["superior_arm_allocation_mcse"] = json_number(oc.superior_arm_allocation.mc_se);
  row["mean_effect_point"] = json_number(oc.mean_effect_point.value);
  row["mean_effect_point_mcse"] = json_number(oc.mean_effect_point.mc_se);
  return row;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream{line};
  while (std::getline(stream, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

}  // namespace

std::string format_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

void write_oc_csv(const std::vector<OperatingCharacteristics>& table, std::ostream& out) {
  for (std::size_t i = 0; i < std::size(kOcColumns); ++i) {
    out << (i == 0 ? "" : ",") << kOcColumns[i];
  }
  out << "\n";
  for (const auto& oc : table) {
    out << oc.design_label << "," << oc.replications << ","
        << cell(oc.rejection_rate.value) << "," << cell(oc.rejection_rate.mc_se) << ","
        << cell(oc.stage1_stop_rate.value) << "," << cell(oc.stage1_stop_rate.mc_se) << ","
        << cell(oc.mean_total_n.value) << "," << cell(oc.mean_total_n.mc_se) << ","
        << cell(oc.mean_duration_days.value) << "," << cell(oc.mean_duration_days.mc_se)
        << "," << cell(oc.mean_access_proportion.value) << ","
        << cell(oc.mean_access_proportion.mc_se) << "," << cell(oc.mean_stage2_n.value)
        << "," << cell(oc.mean_stage2_n.mc_se) << ","
        << cell(oc.stage2_access_proportion.value) << ","
        << cell(oc.stage2_access_proportion.mc_se) << ","
        << cell(oc.classification_sensitivity.value) << ","
        << cell(oc.classification_sensitivity.mc_se) << ","
        << cell(oc.classification_specificity.value) << ","
        << cell(oc.classification_specificity.mc_se) << ","
        << cell(oc.superior_arm_allocation.value) << ","
        << cell(oc.superior_arm_allocation.mc_se) << "," << cell(oc.mean_effect_point.value)
        << "," << cell(oc.mean_effect_point.mc_se) << "\n";
  }
}

std::vector<OperatingCharacteristics> parse_oc_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("parse_oc_csv: empty input");
  }
  const auto header = split_csv_line(line);
  if (header.size() != std::size(kOcColumns)) {
    throw IoError("parse_oc_csv: unexpected column count");
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != kOcColumns[i]) {
      throw IoError("parse_oc_csv: unexpected column '" + header[i] + "'");
    }
  }

  std::vector<OperatingCharacteristics> table;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != std::size(kOcColumns)) {
      throw IoError("parse_oc_csv: malformed row");
    }
    OperatingCharacteristics oc;
    oc.design_label = fields[0];
    oc.replications = static_cast<int>(std::stol(fields[1]));
    oc.rejection_rate = {parse_cell(fields[2]), parse_cell(fields[3])};
    oc.stage1_stop_rate = {parse_cell(fields[4]), parse_cell(fields[5])};
    oc.mean_total_n = {parse_cell(fields[6]), parse_cell(fields[7]), oc.replications};
    oc.mean_duration_days = {parse_cell(fields[8]), parse_cell(fields[9]), oc.replications};
    oc.mean_access_proportion = {parse_cell(fields[10]), parse_cell(fields[11]),
                                 oc.replications};
    oc.mean_stage2_n = {parse_cell(fields[12]), parse_cell(fields[13]), oc.replications};
    oc.stage2_access_proportion = {parse_cell(fields[14]), parse_cell(fields[15]), 0};
    oc.classification_sensitivity = {parse_cell(fields[16]), parse_cell(fields[17]), 0};
    oc.classification_specificity = {parse_cell(fields[18]), parse_cell(fields[19]), 0};
    oc.superior_arm_allocation = {parse_cell(fields[20]), parse_cell(fields[21]), 0};
    oc.mean_effect_point = {parse_cell(fields[22]), parse_cell(fields[23]), 0};
    table.push_back(std::move(oc));
  }
  return table;
}

void write_oc_json(const std::vector<OperatingCharacteristics>& table, std::ostream& out) {
  json rows = json::array();
  for (const auto& oc : table) {
    rows.push_back(oc_to_json(oc));
  }
  out << rows.dump(2) << "\n";
}

void write_power_csv(const std::vector<PowerPoint>& points, std::ostream& out) {
  out << "delta,rejection_rate,rejection_rate_mcse,mean_effect_point,mean_effect_point_mcse\n";
  for (const auto& point : points) {
    out << format_number(point.delta) << "," << cell(point.rejection_rate.value) << ","
        << cell(point.rejection_rate.mc_se) << "," << cell(point.mean_effect_point.value)
        << "," << cell(point.mean_effect_point.mc_se) << "\n";
  }
}

void write_power_json(const std::vector<PowerPoint>& points, std::ostream& out) {
  json rows = json::array();
  for (const auto& point : points) {
    json row;
    row["delta"] = json_number(point.delta);
    row["rejection_rate"] = json_number(point.rejection_rate.value);
    row["rejection_rate_mcse"] = json_number(point.rejection_rate.mc_se);
    row["mean_effect_point"] = json_number(point.mean_effect_point.value);
    row["mean_effect_point_mcse"] = json_number(point.mean_effect_point.mc_se);
    rows.push_back(row);
  }
  out << rows.dump(2) << "\n";
}

void write_stage1_csv(const TrialResult& trial, const std::vector<CovariateSpec>& covariates,
                      std::ostream& out) {
  out << "id";
  for (const auto& covariate : covariates) {
    out << "," << covariate.name;
  }
  out << ",pre,post,improvement,self_report,responder\n";
  for (std::size_t i = 0; i < trial.stage1.patients.size(); ++i) {
    const auto& record = trial.stage1.patients[i];
    out << record.patient_id;
    const auto& profile = trial.stage1_population[i];
    for (double value : profile.covariates) {
      out << "," << format_number(value);
    }
    out << "," << format_number(record.pre) << "," << format_number(record.post) << ","
        << format_number(record.improvement) << "," << (record.self_report ? 1 : 0) << ","
        << (record.classified_responder ? 1 : 0) << "\n";
  }
}

void write_stage2_csv(const TrialResult& trial, std::ostream& out) {
  out << "patient,period,arm,outcome,urn_experimental,urn_control\n";
  if (!trial.stage2) {
    return;
  }
  for (const auto& patient : trial.stage2->patients) {
    for (std::size_t t = 0; t < patient.schedule.periods.size(); ++t) {
      out << patient.patient_id << "," << t << ","
          << to_string(patient.schedule.periods[t].arm) << ",";
      if (t < patient.outcomes.size() && patient.outcomes[t]) {
        out << format_number(*patient.outcomes[t]);
      }
      out << ",";
      if (patient.urn_at_draw) {
        out << patient.urn_at_draw->balls_experimental;
      }
      out << ",";
      if (patient.urn_at_draw) {
        out << patient.urn_at_draw->balls_control;
      }
      out << "\n";
    }
  }
}

void write_audit_jsonl(const TrialResult& trial, std::ostream& out) {
  const auto& events = trial.audit.events();
  for (std::size_t seq = 0; seq < events.size(); ++seq) {
    const auto& event = events[seq];
    json line;
    line["seq"] = seq;
    line["kind"] = to_string(event.kind);
    line["phase"] = to_string(event.phase);
    line["day"] = event.day;
    if (event.patient_id >= 0) {
      line["patient"] = event.patient_id;
    }
    if (event.period_index >= 0) {
      line["period"] = event.period_index;
    }
    if (event.arm) {
      line["arm"] = to_string(*event.arm);
    }
    if (event.value) {
      line["value"] = *event.value;
    }
    if (event.token != 0) {
      line["token"] = std::to_string(event.token);
    }
    if (event.kind == EventKind::PhaseTransition) {
      line["to"] = to_string(event.transition_to);
    }
    if (!event.note.empty()) {
      line["note"] = event.note;
    }
    out << line.dump() << "\n";
  }
}

void write_analysis_json(const TrialResult& trial, std::ostream& out) {
  json doc;
  doc["final_decision"] = to_string(trial.final_decision);
  doc["end_reason"] = to_string(trial.end_reason);
  doc["gate"] = {{"decision", trial.stage1.gate == GateOutcome::Proceed ? "proceed"
                                                                        : "stop-futility"},
                 {"responder_proportion", json_number(trial.stage1.responder_proportion)}};
  if (trial.effect) {
    json effect;
    effect["method"] = trial.effect->method;
    effect["point"] = json_number(trial.effect->point);
    effect["se"] = trial.effect->standard_error ? json_number(*trial.effect->standard_error)
                                                : json(nullptr);
    effect["p"] = json_number(trial.effect->p_value);
    effect["n_used"] = trial.effect->n_used;
    doc["effect"] = effect;
  } else {
    doc["effect"] = nullptr;
  }
  if (trial.stage2 && trial.stage2->interim) {
    const auto& interim = *trial.stage2->interim;
    doc["interim"] = {{"n_used", interim.n_used},
                      {"p", json_number(interim.estimate.p_value)},
                      {"decision", to_string(interim.decision)}};
  } else {
    doc["interim"] = nullptr;
  }
  if (trial.meta) {
    doc["meta"] = {{"pooled_effect", json_number(trial.meta->pooled_effect)},
                   {"pooled_se", json_number(trial.meta->pooled_se)},
                   {"tau_squared", json_number(trial.meta->tau_squared)},
                   {"patients", trial.meta->per_patient.size()}};
  }
  if (trial.logistic) {
    json association;
    association["exploratory"] = true;
    association["converged"] = trial.logistic->converged;
    association["separation_detected"] = trial.logistic->separation_detected;
    association["iterations"] = trial.logistic->iterations;
    association["coefficients"] = trial.logistic->coefficients;
    association["standard_errors"] = trial.logistic->standard_errors;
    doc["association_analysis"] = association;
  } else {
    doc["association_analysis"] = nullptr;
  }
  doc["metrics"] = {
      {"total_enrolled", trial.metrics.total_enrolled},
      {"total_duration_days", trial.metrics.total_duration_days},
      {"access_proportion", json_number(trial.metrics.access_proportion)},
      {"stage2_n", trial.metrics.stage2_n},
      {"stage2_access_proportion", trial.metrics.stage2_access_proportion
                                       ? json_number(*trial.metrics.stage2_access_proportion)
                                       : json(nullptr)},
      {"superior_arm_allocation", trial.metrics.superior_arm_allocation
                                      ? json_number(*trial.metrics.superior_arm_allocation)
                                      : json(nullptr)},
  };
  doc["protocol_deviation"] = trial.protocol_deviation;
  out << doc.dump(2) << "\n";
}

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  writer(out);
  out.flush();
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

}  // namespace rdt
