// rdtsim: Monte Carlo harness for two-stage rare-disease trial designs.
//
// Subcommands:
//   simulate     operating characteristics of one scenario
//   compare      head-to-head design comparison under common random numbers
//   power-curve  rejection rate over a grid of responder effects
//
// Exit codes: 0 ok, 2 I/O error, 64 usage error, 65 config error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdt/engine.hpp"
#include "rdt/errors.hpp"
#include "rdt/montecarlo.hpp"
#include "rdt/report.hpp"
#include "rdt/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitUsage = 64;
constexpr int kExitConfig = 65;

constexpr const char* kSeedEnvVar = "RDTSIM_MASTER_SEED";

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::string out_dir;
  std::string format = "csv";
  int workers = 1;
};

void add_common_options(CLI::App* cmd, CommonOptions& options) {
  cmd->add_option("--config", options.config_path, "Scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", options.seed, "Master seed override");
  cmd->add_option("--reps", options.reps, "Replication count override");
  cmd->add_option("--out", options.out_dir, "Output directory for report files");
  cmd->add_option("--format", options.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--workers", options.workers,
                  "Worker threads (0 = hardware concurrency)");
}

// Precedence: environment variable, then --seed, then the config file.
void apply_overrides(rdt::ScenarioConfig& scenario, const CommonOptions& options) {
  if (options.seed) {
    scenario.mc.master_seed = *options.seed;
  }
  if (const char* env = std::getenv(kSeedEnvVar)) {
    scenario.mc.master_seed = std::stoull(env);
  }
  if (options.reps) {
    scenario.mc.replications = *options.reps;
  }
}

void print_oc_table(const std::vector<rdt::OperatingCharacteristics>& table) {
  rdt::write_oc_csv(table, std::cout);
}

void write_reports(const std::vector<rdt::OperatingCharacteristics>& table,
                   const CommonOptions& options, const std::string& stem) {
  if (options.out_dir.empty()) {
    return;
  }
  std::filesystem::create_directories(options.out_dir);
  const auto path = std::filesystem::path(options.out_dir) /
                    (stem + (options.format == "csv" ? ".csv" : ".json"));
  rdt::write_file(path, [&](std::ostream& out) {
    if (options.format == "csv") {
      rdt::write_oc_csv(table, out);
    } else {
      rdt::write_oc_json(table, out);
    }
  });
  std::cerr << "wrote " << path.string() << "\n";
}

void dump_first_replication(const rdt::ScenarioConfig& scenario, const std::string& dump_dir) {
  const auto trial = rdt::run_trial(scenario, rdt::replication_seed(scenario.mc.master_seed, 0));
  std::filesystem::create_directories(dump_dir);
  const std::filesystem::path dir(dump_dir);
  rdt::write_file(dir / "stage1.csv", [&](std::ostream& out) {
    rdt::write_stage1_csv(trial, scenario.population.covariates, out);
  });
  rdt::write_file(dir / "stage2.csv",
                  [&](std::ostream& out) { rdt::write_stage2_csv(trial, out); });
  rdt::write_file(dir / "audit.jsonl",
                  [&](std::ostream& out) { rdt::write_audit_jsonl(trial, out); });
  rdt::write_file(dir / "analysis.json",
                  [&](std::ostream& out) { rdt::write_analysis_json(trial, out); });
  std::cerr << "dumped replication 0 to " << dump_dir << "\n";
}

std::vector<double> parse_delta_list(const std::string& text) {
  std::vector<double> deltas;
  std::stringstream stream{text};
  std::string item;
  while (std::getline(stream, item, ',')) {
    deltas.push_back(std::stod(item));
  }
  return deltas;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage rare-disease trial simulator"};
  app.require_subcommand(1);

  CommonOptions simulate_options;
  std::string dump_dir;
  CLI::App* simulate = app.add_subcommand("simulate", "Run one scenario");
  add_common_options(simulate, simulate_options);
  simulate->add_option("--dump-dir", dump_dir,
                       "Also dump replication 0 (stage tables, audit log, analysis)");

  CommonOptions compare_options;
  std::vector<std::string> design_names;
  CLI::App* compare = app.add_subcommand("compare", "Compare designs head-to-head");
  add_common_options(compare, compare_options);
  compare->add_option("--designs", design_names,
                      "Designs to compare (crossover, nof1, adaptive, parallel)")
      ->delimiter(',');

  CommonOptions power_options;
  std::string delta_list = "0,0.5,1,1.5,2";
  CLI::App* power = app.add_subcommand("power-curve", "Sweep the responder effect");
  add_common_options(power, power_options);
  power->add_option("--deltas", delta_list, "Comma-separated responder effects");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      auto scenario = rdt::load_scenario(simulate_options.config_path);
      apply_overrides(scenario, simulate_options);
      const auto oc = rdt::run_replications(scenario, scenario.mc.replications,
                                            scenario.mc.master_seed,
                                            simulate_options.workers);
      print_oc_table({oc});
      write_reports({oc}, simulate_options, "operating_characteristics");
      if (!dump_dir.empty()) {
        dump_first_replication(scenario, dump_dir);
      }
    } else if (compare->parsed()) {
      if (design_names.empty()) {
        std::cerr << "compare: --designs must name at least one design\n";
        return kExitUsage;
      }
      auto scenario = rdt::load_scenario(compare_options.config_path);
      apply_overrides(scenario, compare_options);
      std::vector<rdt::DesignChoice> designs;
      designs.reserve(design_names.size());
      for (const auto& name : design_names) {
        designs.push_back(scenario.stage2.make_design(name));
      }
      const auto table = rdt::compare_designs(scenario, designs, compare_options.workers);
      print_oc_table(table);
      write_reports(table, compare_options, "design_comparison");
    } else if (power->parsed()) {
      auto scenario = rdt::load_scenario(power_options.config_path);
      apply_overrides(scenario, power_options);
      const auto deltas = parse_delta_list(delta_list);
      if (deltas.empty()) {
        std::cerr << "power-curve: --deltas must name at least one value\n";
        return kExitUsage;
      }
      const auto points = rdt::power_curve(scenario, deltas, power_options.workers);
      rdt::write_power_csv(points, std::cout);
      if (!power_options.out_dir.empty()) {
        std::filesystem::create_directories(power_options.out_dir);
        const auto path = std::filesystem::path(power_options.out_dir) /
                          (std::string("power_curve") +
                           (power_options.format == "csv" ? ".csv" : ".json"));
        rdt::write_file(path, [&](std::ostream& out) {
          if (power_options.format == "csv") {
            rdt::write_power_csv(points, out);
          } else {
            rdt::write_power_json(points, out);
          }
        });
        std::cerr << "wrote " << path.string() << "\n";
      }
    }
  } catch (const rdt::ConfigError& error) {
    std::cerr << "config error: " << error.what() << "\n";
    return kExitConfig;
  } catch (const rdt::IoError& error) {
    std::cerr << "i/o error: " << error.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& error) {
    std::cerr << "i/o error: " << error.what() << "\n";
    return kExitIo;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return kExitOk;
}
