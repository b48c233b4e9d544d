// Command-line campaign runner: single runs, Monte Carlo sweeps and replays.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "objrel/campaign.hpp"

namespace fs = std::filesystem;
using namespace objrel;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> filter;
  std::optional<std::string> gating;
  std::optional<std::string> sigma_mode;
  std::optional<int> runs;
};

void apply(Scenario& s, const Overrides& o) {
  if (o.seed) s.seed = *o.seed;
  if (o.filter) s.filter.kind = parse_filter_kind(*o.filter);
  if (o.gating) s.filter.gating.method = parse_gating_method(*o.gating);
  if (o.sigma_mode) s.sensor.mode = parse_reporting_mode(*o.sigma_mode);
  if (o.runs) s.runs = *o.runs;
  validate(s.filter);
}

void add_overrides(CLI::App* cmd, Overrides& o, bool with_sim) {
  cmd->add_option("--filter", o.filter, "direct|inverse");
  cmd->add_option("--gating", o.gating, "none|chi2|chi2p|aor|aorp");
  if (with_sim) {
    cmd->add_option("--seed", o.seed, "base random seed");
    cmd->add_option("--sigma-mode", o.sigma_mode, "exact|fixed|episodes");
  }
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
  return os;
}

void report(const fs::path& out, const RunResult& result) {
  const RunSummary summary = summarize(result);
  {
    std::ofstream os = open_out(out, "ticks.csv");
    write_ticks_csv(os, result.record);
  }
  {
    std::ofstream os = open_out(out, "summary.csv");
    write_summary_csv(os, summary, result.stats);
  }
  std::cout << "rmse_position " << summary.rmse_position << " m, rmse_orientation " << summary.rmse_orientation
            << " deg, anees_position " << summary.anees_position << '\n';
  if (result.record.diverged) std::cout << "diverged: " << result.record.diagnostic << '\n';
}

void write_cells(const fs::path& out, const SweepResult& sweep) {
  std::ofstream os = open_out(out, "cells.csv");
  os << "sigma_p,sigma_theta,runs,diverged,mean_rmse_m,std_rmse_m,mean_rmse_deg,mean_anees_position,mean_anees_orientation\n";
  os.precision(17);
  for (const CellStats& c : sweep.cells) {
    os << c.sigma_p << ',' << c.sigma_theta << ',' << c.runs << ',' << c.diverged << ',' << c.mean_rmse << ','
       << c.std_rmse << ',' << c.mean_rmse_orientation << ',' << c.mean_anees_position << ','
       << c.mean_anees_orientation << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-relative inertial state estimation campaigns"};
  app.require_subcommand(1);

  std::string config, log, out = "out";
  unsigned parallel = 1;
  Overrides run_o, sweep_o, replay_o;

  CLI::App* run = app.add_subcommand("run", "simulate one run and filter it");
  run->add_option("config", config, "scenario YAML")->required();
  run->add_option("--out", out, "output directory");
  add_overrides(run, run_o, true);

  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over the noise grid");
  sweep->add_option("config", config, "scenario YAML")->required();
  sweep->add_option("--out", out, "output directory");
  sweep->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--runs", sweep_o.runs, "runs per cell")->check(CLI::PositiveNumber);
  add_overrides(sweep, sweep_o, true);

  CLI::App* replay = app.add_subcommand("replay", "re-run a filter on a recorded log");
  replay->add_option("log", log, "replay log")->required();
  replay->add_option("--config", config, "scenario YAML supplying filter settings");
  replay->add_option("--out", out, "output directory");
  add_overrides(replay, replay_o, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      Scenario s = load_scenario(config);
      apply(s, run_o);
      const RunInputs in = simulate(s, s.seed);
      {
        std::ofstream os = open_out(out, "replay.log");
        write_replay(os, in);
      }
      report(out, run_filter(in, s.filter, s.divergence_bound));
    } else if (*sweep) {
      Scenario s = load_scenario(config);
      apply(s, sweep_o);
      const SweepResult result = run_sweep(s, parallel);
      {
        std::ofstream os = open_out(out, "sweep.csv");
        write_sweep_csv(os, result);
      }
      {
        std::ofstream os = open_out(out, "sweep.md");
        write_sweep_markdown(os, result);
      }
      write_cells(out, result);
      write_sweep_markdown(std::cout, result);
    } else if (*replay) {
      Scenario s = config.empty() ? default_scenario() : load_scenario(config);
      apply(s, replay_o);
      std::ifstream is(log, std::ios::binary);
      if (!is) throw std::runtime_error("cannot open log '" + log + "'");
      const RunInputs in = read_replay(is);
      report(out, run_filter(in, s.filter, s.divergence_bound));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
