#include "rdt/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "rdt/errors.hpp"

namespace rdt {

namespace {

std::string trim(std::string_view s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return std::string(s.substr(begin, end - begin));
}

double parse_double(const std::string& value, const std::string& context) {
  std::size_t consumed = 0;
  double result = 0.0;
  try {
    result = std::stod(value, &consumed);
  } catch (const std::exception&) {
    throw ConfigError(context + ": expected a number, got '" + value + "'");
  }
  if (consumed != value.size()) {
    throw ConfigError(context + ": expected a number, got '" + value + "'");
  }
  return result;
}

int parse_int(const std::string& value, const std::string& context) {
  std::size_t consumed = 0;
  long long result = 0;
  try {
    result = std::stoll(value, &consumed);
  } catch (const std::exception&) {
    throw ConfigError(context + ": expected an integer, got '" + value + "'");
  }
  if (consumed != value.size()) {
    throw ConfigError(context + ": expected an integer, got '" + value + "'");
  }
  return static_cast<int>(result);
}

std::uint64_t parse_u64(const std::string& value, const std::string& context) {
  std::size_t consumed = 0;
  unsigned long long result = 0;
  try {
    result = std::stoull(value, &consumed);
  } catch (const std::exception&) {
    throw ConfigError(context + ": expected an unsigned integer, got '" + value + "'");
  }
  if (consumed != value.size()) {
    throw ConfigError(context + ": expected an unsigned integer, got '" + value + "'");
  }
  return result;
}

bool parse_bool(const std::string& value, const std::string& context) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  throw ConfigError(context + ": expected true/false, got '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& value, const std::string& context) {
  std::vector<double> result;
  std::stringstream stream{value};
  std::string item;
  while (std::getline(stream, item, ',')) {
    result.push_back(parse_double(trim(item), context));
  }
  if (result.empty()) {
    throw ConfigError(context + ": expected a comma-separated list of numbers");
  }
  return result;
}

/// One parsed [section] with unknown-key tracking.
class Section {
 public:
  Section(std::string name, int index = -1) : name_(std::move(name)), index_(index) {}

  const std::string& name() const { return name_; }

  void add(const std::string& key, const std::string& value) {
    if (entries_.contains(key)) {
      throw ConfigError(context(key) + ": duplicate key");
    }
    entries_[key] = value;
  }

  bool has(const std::string& key) const { return entries_.contains(key); }

  std::string require(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
      throw ConfigError("[" + name_ + "] missing required key '" + key + "'");
    }
    used_.insert(key);
    return it->second;
  }

  std::optional<std::string> optional(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
      return std::nullopt;
    }
    used_.insert(key);
    return it->second;
  }

  double require_double(const std::string& key) { return parse_double(require(key), context(key)); }
  int require_int(const std::string& key) { return parse_int(require(key), context(key)); }

  double get_double(const std::string& key, double fallback) {
    const auto value = optional(key);
    return value ? parse_double(*value, context(key)) : fallback;
  }
  int get_int(const std::string& key, int fallback) {
    const auto value = optional(key);
    return value ? parse_int(*value, context(key)) : fallback;
  }
  bool get_bool(const std::string& key, bool fallback) {
    const auto value = optional(key);
    return value ? parse_bool(*value, context(key)) : fallback;
  }
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
    const auto value = optional(key);
    return value ? parse_u64(*value, context(key)) : fallback;
  }

  std::string context(const std::string& key) const {
    if (index_ >= 0) {
      return "[" + name_ + " #" + std::to_string(index_ + 1) + "] " + key;
    }
    return "[" + name_ + "] " + key;
  }

  /// Unknown keys are hard errors: misconfigured trials must fail loudly.
  void reject_unused() const {
    for (const auto& [key, value] : entries_) {
      if (!used_.contains(key)) {
        throw ConfigError(context(key) + ": unknown key");
      }
    }
  }

 private:
  std::string name_;
  int index_;
  std::map<std::string, std::string> entries_;
  std::set<std::string> used_;
};

CovariateSpec parse_covariate(Section& section) {
  CovariateSpec spec;
  spec.name = section.require("name");
  const std::string kind = section.require("distribution");
  if (kind == "bernoulli") {
    spec.distribution = BernoulliDist{section.require_double("p")};
  } else if (kind == "normal") {
    spec.distribution = NormalDist{section.get_double("mean", 0.0), section.require_double("sd")};
  } else if (kind == "categorical") {
    spec.distribution = CategoricalDist{
        parse_double_list(section.require("probs"), section.context("probs"))};
  } else {
    throw ConfigError(section.context("distribution") + ": unknown distribution '" + kind + "'");
  }
  spec.response_logit_coef = section.get_double("response_logit_coef", 0.0);
  spec.outcome_coef = section.get_double("outcome_coef", 0.0);
  section.reject_unused();
  return spec;
}

}  // namespace

DesignChoice Stage2Config::make_design(const std::string& kind) const {
  if (kind == "crossover") {
    return CrossoverDesign{washout_days};
  }
  if (kind == "nof1") {
    return NOf1Design{cycles, washout_days};
  }
  if (kind == "adaptive") {
    return ResponseAdaptiveDesign{urn, success_threshold};
  }
  if (kind == "parallel") {
    return ParallelGroupDesign{};
  }
  throw ConfigError("unknown design '" + kind +
                    "' (expected crossover, nof1, adaptive or parallel)");
}

void ScenarioConfig::validate() const {
  population.validate();
  stage1.criteria.validate();
  if (!(stage1.p_min >= 0.0 && stage1.p_min <= 1.0)) {
    throw ConfigError("stage1: p_min must be in [0,1]");
  }
  if (stage1.period_days < 1) {
    throw ConfigError("stage1: period_days must be >= 1");
  }
  if (stage2.period_days < 1) {
    throw ConfigError("stage2: period_days must be >= 1");
  }
  if (stage2.washout_days < 0) {
    throw ConfigError("stage2: washout_days must be >= 0");
  }
  if (stage2.n_patients < 0) {
    throw ConfigError("stage2: n_patients must be >= 0");
  }
  if (stage2.non_reversible_mode && stage2.n_patients < 1) {
    throw ConfigError("stage2: non_reversible_mode requires n_patients >= 1");
  }
  if (!(stage2.prob_cutoff > 0.0 && stage2.prob_cutoff < 1.0)) {
    throw ConfigError("stage2: prob_cutoff must be in (0,1)");
  }
  if (!(stage2.dropout_prob >= 0.0 && stage2.dropout_prob < 1.0)) {
    throw ConfigError("stage2: dropout_prob must be in [0,1)");
  }
  if (stage2.n_resamples < 1000) {
    throw ConfigError("stage2: n_resamples must be >= 1000");
  }
  if (const auto* nof1 = std::get_if<NOf1Design>(&stage2.design)) {
    if (nof1->cycles < 2) {
      throw ConfigError("stage2: nof1 cycles must be >= 2");
    }
  }
  if (const auto* adaptive = std::get_if<ResponseAdaptiveDesign>(&stage2.design)) {
    if (adaptive->urn.balls_experimental < 1 || adaptive->urn.balls_control < 1) {
      throw ConfigError("stage2: urn ball counts must be >= 1");
    }
    if (adaptive->urn.add_on_success < 1) {
      throw ConfigError("stage2: urn_add must be >= 1");
    }
  }
  if (mc.replications < 1) {
    throw ConfigError("mc: replications must be >= 1");
  }
  if (!(mc.alpha_final > 0.0 && mc.alpha_final < 1.0)) {
    throw ConfigError("mc: alpha_final must be in (0,1)");
  }
  if (stage2.interim) {
    stage2.interim->validate();
  }
}

Stage2Settings ScenarioConfig::stage2_settings() const {
  Stage2Settings settings;
  settings.design = stage2.design;
  settings.period_days = stage2.period_days;
  settings.dropout_prob = stage2.dropout_prob;
  settings.n_resamples = stage2.n_resamples;
  settings.interim = stage2.interim;
  return settings;
}

ScenarioConfig parse_scenario(std::string_view text) {
  std::map<std::string, Section> singles;
  std::vector<Section> covariates;
  Section* current = nullptr;

  static const std::set<std::string> known_sections = {"population", "covariate", "stage1",
                                                       "stage2", "interim", "mc"};

  std::size_t line_number = 0;
  std::stringstream stream{std::string(text)};
  std::string raw_line;
  while (std::getline(stream, raw_line)) {
    ++line_number;
    std::string line = raw_line;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) {
      line = line.substr(0, comment);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_number) + ": malformed section header");
      }
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (!known_sections.contains(name)) {
        throw ConfigError("line " + std::to_string(line_number) + ": unknown section [" + name +
                          "]");
      }
      if (name == "covariate") {
        covariates.emplace_back(name, static_cast<int>(covariates.size()));
        current = &covariates.back();
      } else {
        if (singles.contains(name)) {
          throw ConfigError("line " + std::to_string(line_number) + ": duplicate section [" +
                            name + "]");
        }
        auto [it, inserted] = singles.emplace(name, Section(name));
        current = &it->second;
      }
      continue;
    }
    const auto equals = line.find('=');
    if (equals == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_number) + ": expected key = value");
    }
    if (current == nullptr) {
      throw ConfigError("line " + std::to_string(line_number) + ": key outside any section");
    }
    current->add(trim(line.substr(0, equals)), trim(line.substr(equals + 1)));
  }

  for (const char* required : {"population", "stage1", "stage2", "mc"}) {
    if (!singles.contains(required)) {
      throw ConfigError(std::string("missing required section [") + required + "]");
    }
  }

  ScenarioConfig config;

  {
    Section& s = singles.at("population");
    config.population.n_stage1 = s.require_int("n_stage1");
    config.population.response_intercept = s.get_double("alpha0", 0.0);
    auto& outcome = config.population.outcome;
    outcome.baseline_mean = s.get_double("baseline_mean", 0.0);
    outcome.responder_effect = s.require_double("responder_effect");
    outcome.nonresponder_effect = s.get_double("nonresponder_effect", 0.0);
    outcome.period_effect = s.get_double("period_effect", 0.0);
    outcome.carryover_coef = s.get_double("carryover_coef", 0.0);
    outcome.residual_sd = s.require_double("residual_sd");
    outcome.effect_heterogeneity_sd = s.get_double("effect_heterogeneity_sd", 0.0);
    outcome.washout_full_days = s.get_int("washout_full_days", 0);
    const auto direction = s.optional("improvement_direction").value_or("increase");
    if (direction == "increase") {
      outcome.improvement_direction = ImprovementDirection::Increase;
    } else if (direction == "decrease") {
      outcome.improvement_direction = ImprovementDirection::Decrease;
    } else {
      throw ConfigError("[population] improvement_direction must be increase or decrease");
    }
    outcome.reversible = s.get_bool("reversible", true);
    s.reject_unused();
  }

  for (auto& section : covariates) {
    config.population.covariates.push_back(parse_covariate(section));
  }

  {
    Section& s = singles.at("stage1");
    config.stage1.period_days = s.require_int("period_days");
    config.stage1.criteria.improvement_threshold = s.require_double("improvement_threshold");
    config.stage1.criteria.require_patient_report = s.get_bool("require_patient_report", false);
    config.stage1.criteria.report_sensitivity = s.get_double("report_sensitivity", 1.0);
    config.stage1.criteria.report_specificity = s.get_double("report_specificity", 1.0);
    config.stage1.p_min = s.require_double("p_min");
    s.reject_unused();
  }

  {
    Section& s = singles.at("stage2");
    const std::string kind = s.require("design");
    config.stage2.period_days = s.require_int("period_days");
    config.stage2.washout_days = s.require_int("washout_days");
    config.stage2.n_patients = s.get_int("n_patients", 0);
    config.stage2.dropout_prob = s.get_double("dropout_prob", 0.0);
    config.stage2.n_resamples = s.get_int("n_resamples", 1000);
    config.stage2.non_reversible_mode = s.get_bool("non_reversible_mode", false);
    config.stage2.prob_cutoff = s.get_double("prob_cutoff", 0.3);
    config.stage2.cycles = s.get_int("cycles", 2);
    config.stage2.urn.balls_experimental = s.get_int("urn_experimental", 1);
    config.stage2.urn.balls_control = s.get_int("urn_control", 1);
    config.stage2.urn.add_on_success = s.get_int("urn_add", 1);
    // The adaptive success cutoff defaults to the Stage-1 responder threshold.
    config.stage2.success_threshold = s.get_double(
        "success_threshold", config.stage1.criteria.improvement_threshold);
    try {
      config.stage2.design = config.stage2.make_design(kind);
    } catch (const ConfigError& error) {
      throw ConfigError(s.context("design") + ": " + error.what());
    }
    s.reject_unused();
  }

  {
    Section& s = singles.at("mc");
    config.mc.replications = s.require_int("replications");
    config.mc.master_seed = s.get_u64("master_seed", 0);
    config.mc.alpha_final = s.get_double("alpha_final", 0.05);
    s.reject_unused();
  }

  if (singles.contains("interim")) {
    Section& s = singles.at("interim");
    InterimRule rule;
    rule.information_fraction = s.get_double("information_fraction", 0.5);
    rule.efficacy_alpha_interim = s.get_double("efficacy_alpha", 0.005);
    rule.futility_p_threshold = s.get_double("futility_p", 0.6);
    rule.final_alpha = config.mc.alpha_final;
    config.stage2.interim = rule;
    s.reject_unused();
  }

  config.validate();
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream input(path);
  if (!input) {
    throw IoError("cannot open scenario file: " + path.string());
  }
  std::stringstream buffer;
  buffer << input.rdbuf();
  return parse_scenario(buffer.str());
}

}  // namespace rdt
