#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "rdt/analysis.hpp"
#include "rdt/population.hpp"
#include "rdt/stage1.hpp"
#include "rdt/stage2.hpp"

namespace rdt {

struct Stage1Config {
  int period_days = 1;
  ResponderCriteria criteria;
  double p_min = 0.0;
};

struct Stage2Config {
  DesignChoice design = ParallelGroupDesign{};
  int period_days = 1;
  int washout_days = 0;  // also the post-Stage-1 washout
  int n_patients = 0;    // recruitment target in non-reversible mode
  double dropout_prob = 0.0;
  int n_resamples = 1000;
  bool non_reversible_mode = false;
  double prob_cutoff = 0.3;  // exclusion-rule threshold for fresh recruits
  std::optional<InterimRule> interim;

  // Design parameters kept independently of the active design so one config
  // can drive head-to-head comparisons.
  int cycles = 2;
  UrnState urn;
  double success_threshold = 0.0;

  /// Builds a design of the given kind ("crossover", "nof1", "adaptive",
  /// "parallel") from the stored parameters.
  DesignChoice make_design(const std::string& kind) const;
};

struct McConfig {
  int replications = 1;
  std::uint64_t master_seed = 0;
  double alpha_final = 0.05;
};

/// Complete description of one simulated trial scenario.
struct ScenarioConfig {
  PopulationModel population;
  Stage1Config stage1;
  Stage2Config stage2;
  McConfig mc;

  void validate() const;

  Stage2Settings stage2_settings() const;
};

/// Parses the scenario file format: named [section] blocks of key=value
/// pairs, '#' or ';' comments, with one [covariate] block per covariate.
/// Unknown sections or keys are hard errors.
ScenarioConfig parse_scenario(std::string_view text);

/// Loads and validates a scenario file.
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace rdt
