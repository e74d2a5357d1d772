#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rdt/engine.hpp"
#include "rdt/montecarlo.hpp"

namespace rdt {

/// Floats in all reports are rendered at 6 significant digits.
std::string format_number(double value);

void write_oc_csv(const std::vector<OperatingCharacteristics>& table, std::ostream& out);
void write_oc_json(const std::vector<OperatingCharacteristics>& table, std::ostream& out);

/// Parses a CSV previously produced by write_oc_csv.
std::vector<OperatingCharacteristics> parse_oc_csv(std::istream& in);

void write_power_csv(const std::vector<PowerPoint>& points, std::ostream& out);
void write_power_json(const std::vector<PowerPoint>& points, std::ostream& out);

/// Stage-1 per-patient table: id, covariates..., pre, post, improvement,
/// self_report, responder.
void write_stage1_csv(const TrialResult& trial, const std::vector<CovariateSpec>& covariates,
                      std::ostream& out);

/// Stage-2 long format: patient id, period, arm, outcome, and the urn
/// snapshot columns for the adaptive design.
void write_stage2_csv(const TrialResult& trial, std::ostream& out);

/// Audit trail as JSON lines, one event per line.
void write_audit_jsonl(const TrialResult& trial, std::ostream& out);

/// Analysis summary: method, point, se, p, n_used, interim decision, gate,
/// final decision and metrics. The association analysis is exploratory and
/// is flagged as such.
void write_analysis_json(const TrialResult& trial, std::ostream& out);

/// Opens a file for writing, throwing IoError on failure.
void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& writer);

}  // namespace rdt
