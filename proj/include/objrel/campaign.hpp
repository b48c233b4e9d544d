#pragma once

/// \file campaign.hpp
/// Scenario configs, simulation-to-filter runs, replay logs and Monte Carlo
/// sweeps.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "objrel/estimator.hpp"
#include "objrel/metrics.hpp"
#include "objrel/simkit.hpp"

namespace objrel {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kReplayVersion = 1;

struct Scenario {
  int preset = 0;
  double duration = 20.0;  // s
  std::uint64_t seed = 1;
  SensorSpec sensor;
  ImuSimSpec imu;
  FilterConfig filter;
  InitialUncertainty init;
  /// Sample the initial estimate from N(truth, P0) instead of starting at truth.
  bool initial_error = true;
  double divergence_bound = 10.0;  // m
  std::vector<double> sweep_sigma_p{0.01, 0.05, 0.1, 0.2, 0.3};
  std::vector<double> sweep_sigma_theta{0.0175, 0.0875, 0.175, 0.35};
  int runs = 100;
};

/// Defaults used by the CLI for everything a config leaves out.
Scenario default_scenario();

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a YAML scenario. Required: schema_version, preset, duration,
/// filter.kind, measurement.sigma_p, measurement.sigma_theta. Throws
/// ConfigError naming the field (and line, when known) for missing, unknown
/// or ill-typed entries.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

struct ImageFrame {
  double t = 0.0;
  std::vector<PoseMeasurement> measurements;
};

struct TruthSample {
  double t = 0.0;
  Pose pose;  // T_WI
};

/// Everything a filter run consumes: initial estimate, prior, and the sensor
/// streams, plus ground truth for evaluation.
struct RunInputs {
  FullState initial;
  Eigen::VectorXd prior_variances;  // diagonal of P0, core states only
  std::vector<ImuSample> imu;
  std::vector<ImageFrame> frames;
  std::vector<TruthSample> truth;  // one per camera tick
};

RunInputs simulate(const Scenario& scenario, std::uint64_t seed);

struct RunStats {
  std::size_t images = 0;
  std::size_t updates = 0;
  std::size_t skipped_updates = 0;
  std::size_t initialized = 0;
  std::size_t accepted = 0;
  std::size_t rejected_all = 0;
  std::size_t rejected_position = 0;
  std::size_t rejected_rotation = 0;
};

struct RunResult {
  RunRecord record;
  RunStats stats;
  std::vector<StateSnapshot> snapshots;  // filled when requested
};

/// Drives the estimator over the inputs. A run whose position error exceeds
/// `divergence_bound` or whose estimate turns non-finite is marked diverged
/// and stopped.
RunResult run_filter(const RunInputs& inputs, const FilterConfig& filter, double divergence_bound,
                     bool keep_snapshots = false);

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Line records "t,KIND,payload" with KIND in INIT|IMU|MEAS|TRUTH, 17
/// significant digits, framed by a version header and a record-count footer.
void write_replay(std::ostream& os, const RunInputs& inputs);
/// Throws ReplayError on version mismatch, truncation, malformed records or
/// non-monotone timestamps.
RunInputs read_replay(std::istream& is);

struct RunSummary {
  bool diverged = false;
  double rmse_position = 0.0;
  double rmse_orientation = 0.0;
  double max_position_error = 0.0;
  double anees_position = 0.0;
  double anees_orientation = 0.0;
  std::size_t ticks = 0;
};

RunSummary summarize(const RunResult& result);

/// Per-tick CSV: time, truth, estimate, marginal std devs.
void write_ticks_csv(std::ostream& os, const RunRecord& record);
void write_summary_csv(std::ostream& os, const RunSummary& summary, const RunStats& stats);

struct CellStats {
  double sigma_p = 0.0;
  double sigma_theta = 0.0;
  std::size_t runs = 0;
  std::size_t diverged = 0;
  double mean_rmse = 0.0;
  double std_rmse = 0.0;
  double mean_rmse_orientation = 0.0;
  double mean_anees_position = 0.0;
  double mean_anees_orientation = 0.0;
};

struct SweepResult {
  std::vector<double> sigma_p;
  std::vector<double> sigma_theta;
  std::vector<CellStats> cells;  // row-major over (sigma_p, sigma_theta)
  const CellStats& at(std::size_t row, std::size_t col) const { return cells[row * sigma_theta.size() + col]; }
};

/// Seed of run r in every cell; a single run with this seed reproduces it.
constexpr std::uint64_t sweep_run_seed(std::uint64_t base, std::size_t run) { return base + run; }

/// Runs `scenario.runs` seeds per grid cell on `threads` workers. Results
/// are merged by (cell, run) index, so the table does not depend on the
/// thread count.
SweepResult run_sweep(const Scenario& scenario, unsigned threads);

/// Summary of one Monte Carlo batch of a scenario as configured.
CellStats run_batch(const Scenario& scenario, unsigned threads);

/// Rows sigma_p, columns sigma_theta, cells "mean ± std"; diverged runs excluded.
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);
void write_sweep_markdown(std::ostream& os, const SweepResult& sweep);

}  // namespace objrel
