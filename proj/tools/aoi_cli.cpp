// aoi_cli: run experiments, certify bounds and check pathwise identities.
//
// Exit codes: 0 success, 1 diagnostics failed, 2 config error,
// 3 infeasible instance, 4 solver non-convergence.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "aoi/config.hpp"
#include "aoi/error.hpp"
#include "aoi/experiment.hpp"
#include "aoi/presets.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kConfigError = 2;
constexpr int kInfeasible = 3;
constexpr int kNonConvergence = 4;

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw aoi::ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

fs::path convergence_path(const fs::path& csv) {
  fs::path p = csv;
  return p.replace_extension(".convergence.csv");
}

// Writes the result CSV (and convergence CSV when checkpoints exist) and
// prints the seed-averaged summary.
void emit(const aoi::ExperimentResult& r, const std::string& out) {
  std::ostringstream csv;
  aoi::write_results_csv(csv, r);
  if (out.empty()) {
    std::cout << csv.str();
    if (!r.convergence.empty()) {
      std::cout << '\n';
      aoi::write_convergence_csv(std::cout, r);
    }
    aoi::write_summary(std::cerr, r);
    return;
  }
  write_file(out, csv.str());
  std::cout << "wrote " << out << " (" << r.rows.size() << " rows)\n";
  if (!r.convergence.empty()) {
    std::ostringstream conv;
    aoi::write_convergence_csv(conv, r);
    write_file(convergence_path(out), conv.str());
    std::cout << "wrote " << convergence_path(out).string() << " (" << r.convergence.size() << " rows)\n";
  }
  aoi::write_summary(std::cout, r);
}

int print_diagnostics(const std::vector<aoi::DiagnosticLine>& lines) {
  bool ok = true;
  std::cout << std::left << std::setw(24) << "check" << std::setw(10) << "sweep" << std::setw(16) << "policy"
            << std::setw(6) << "runs" << std::setw(14) << "worst" << std::setw(14) << "tolerance"
            << "result\n";
  for (const auto& l : lines) {
    ok = ok && l.pass;
    std::cout << std::setw(24) << l.check << std::setw(10)
              << (std::isnan(l.sweep_value) ? "-" : aoi::format_number(l.sweep_value)) << std::setw(16) << l.policy
              << std::setw(6) << l.runs << std::setw(14) << aoi::format_number(l.worst) << std::setw(14)
              << aoi::format_number(l.tolerance) << (l.pass ? "PASS" : "FAIL") << '\n';
  }
  std::cout << (ok ? "all checks passed\n" : "some checks FAILED\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information scheduling simulator and bound solver"};
  app.require_subcommand(1);
  unsigned threads = aoi::default_threads();
  app.add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);

  std::string config_path, out_path;
  auto* simulate = app.add_subcommand("simulate", "Run every (sweep value, policy, seed) job and write the CSV");
  simulate->add_option("config", config_path, "JSON config file")->required();
  simulate->add_option("--out", out_path, "CSV output path (default: config 'output', else stdout)");

  auto* bounds = app.add_subcommand("bounds", "Solve the optimum and bound values and print them as JSON");
  bounds->add_option("config", config_path, "JSON config file")->required();

  std::string preset_name, out_dir = ".";
  std::uint64_t seeds = 0;
  bool config_only = false;
  auto* preset = app.add_subcommand("preset", "Run a built-in experiment");
  preset->add_option("name", preset_name, "Preset name")->required();
  preset->add_option("--out", out_dir, "Output directory");
  preset->add_option("--seeds", seeds, "Use seeds 1..k instead of the preset's list")->check(CLI::PositiveNumber);
  preset->add_flag("--config-only", config_only, "Write <name>.json to the output directory and stop");

  auto* diagnose = app.add_subcommand("diagnose", "Check the pathwise identities and age inequalities; print a pass/fail table");
  diagnose->add_option("config", config_path, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*simulate) {
      const auto cfg = aoi::load_config(config_path);
      emit(aoi::run_experiment(cfg, threads), out_path.empty() ? cfg.output : out_path);
    } else if (*bounds) {
      const auto cfg = aoi::load_config(config_path);
      std::cout << aoi::solve_bounds(cfg).dump(2) << '\n';
    } else if (*preset) {
      auto cfg = aoi::preset(preset_name);
      if (!cfg) {
        std::string names;
        for (const auto& n : aoi::preset_names()) names += " " + n;
        throw aoi::ConfigError("unknown preset '" + preset_name + "'; available:" + names);
      }
      if (seeds) cfg->seeds = aoi::detail::seed_range(seeds);
      const fs::path dir(out_dir);
      if (config_only) {
        write_file(dir / (preset_name + ".json"), aoi::config_to_json(*cfg).dump(2) + "\n");
        std::cout << "wrote " << (dir / (preset_name + ".json")).string() << '\n';
      } else {
        emit(aoi::run_experiment(*cfg, threads), (dir / (preset_name + ".csv")).string());
      }
    } else if (*diagnose) {
      const auto cfg = aoi::load_config(config_path);
      return print_diagnostics(aoi::run_diagnostics(cfg, threads));
    }
  } catch (const aoi::UnschedulableLink& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const aoi::SolverNonConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const aoi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 70;
  }
  return 0;
}
