/*
 * Copyright 2026 the nightlights authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <string>

#include "nightlights/pipeline.hpp"

namespace {

using nightlights::Diagnostics;
using nightlights::PipelineConfig;

struct CliOverrides {
  std::string config_path;
  int workers = 0;           // 0: keep config value
  std::string output_dir;    // empty: keep config value
  std::vector<int> months;   // empty: keep config value
  bool per_country = false;
};

// Precedence: flags > config file > built-in defaults.
PipelineConfig load_with_overrides(const CliOverrides& cli) {
  PipelineConfig config = nightlights::load_config(cli.config_path);
  if (cli.workers > 0) config.workers = cli.workers;
  if (!cli.output_dir.empty()) config.output_dir = cli.output_dir;
  if (!cli.months.empty()) config.months = cli.months;
  if (cli.per_country) config.per_country = true;
  return config;
}

void print_warnings(const Diagnostics& diag) {
  for (const std::string& message : diag.warnings()) {
    std::cerr << "warning: " << message << "\n";
  }
}

int run_command(const CliOverrides& cli,
                const std::function<int(const PipelineConfig&, Diagnostics*)>& command) {
  Diagnostics diag;
  try {
    const PipelineConfig config = load_with_overrides(cli);
    const int code = command(config, &diag);
    print_warnings(diag);
    return code;
  } catch (const nightlights::Error& e) {
    print_warnings(diag);
    std::cerr << "error: " << e.what() << "\n";
    return nightlights::kExitDataError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nighttime-lights to GDP pipeline"};
  app.require_subcommand(1);

  CliOverrides cli;
  app.add_option("-c,--config", cli.config_path, "Pipeline configuration JSON")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--workers", cli.workers, "Parallel workers for the luminosity stage");
  app.add_option("--out", cli.output_dir, "Output directory (overrides config)");
  app.add_option("--months", cli.months, "Season months, e.g. --months 9,10,11")
      ->delimiter(',');
  app.add_flag("--per-country", cli.per_country,
               "Also fit per-country regressions (exploratory, pooled fits stay primary)");

  auto* luminosity =
      app.add_subcommand("luminosity", "Per-region monthly sums of lights from the rasters");
  auto* harmonize =
      app.add_subcommand("harmonize", "Seasonal composites and DMSP/VIIRS splicing");
  auto* fit = app.add_subcommand("fit", "Join indicators and fit the ten regressions");
  auto* all = app.add_subcommand("all", "Run luminosity, harmonize and fit");
  for (CLI::App* sub : {luminosity, harmonize, fit, all}) {
    sub->fallthrough();  // global flags may follow the subcommand name
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return nightlights::kExitUsage;
  }

  if (luminosity->parsed()) {
    return run_command(cli, [](const PipelineConfig& c, Diagnostics* d) {
      return nightlights::cmd_luminosity(c, d);
    });
  }
  if (harmonize->parsed()) {
    return run_command(cli, [](const PipelineConfig& c, Diagnostics* d) {
      return nightlights::cmd_harmonize(c, d);
    });
  }
  if (fit->parsed()) {
    return run_command(cli, [](const PipelineConfig& c, Diagnostics* d) {
      return nightlights::cmd_fit(c, d);
    });
  }
  if (all->parsed()) {
    return run_command(cli, [](const PipelineConfig& c, Diagnostics* d) {
      return nightlights::cmd_all(c, d);
    });
  }
  return nightlights::kExitUsage;
}
