#pragma once

/// \file metrics.hpp
/// Accuracy and consistency metrics over one run.

#include <cstddef>
#include <string>
#include <vector>

#include "objrel/geom3.hpp"

namespace objrel {

/// One evaluated camera tick.
struct RunTick {
  double t = 0.0;
  Pose truth;      // T_WI
  Pose estimate;   // estimated T_WI
  Mat3 cov_position = Mat3::Identity();
  Mat3 cov_theta = Mat3::Identity();
};

struct RunRecord {
  std::vector<RunTick> ticks;
  bool diverged = false;
  std::string diagnostic;
};

/// Position error p_hat - p.
Vec3 position_error(const RunTick& tick);
/// Right-perturbation rotation error Log(R_hat^T R), consistent with the
/// filter's error definition R = R_hat Exp(dtheta).
Vec3 rotation_error(const RunTick& tick);

/// sqrt(mean |p_hat - p|^2) in metres. Throws std::invalid_argument on an empty run.
double rmse_position(const RunRecord& run);
/// sqrt(mean |Log(R_hat^T R)|^2) in degrees. Throws on an empty run.
double rmse_orientation(const RunRecord& run);
/// max |p_hat - p| in metres. Throws on an empty run.
double max_position_error(const RunRecord& run);

struct AneesResult {
  double value = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;  // ticks with a singular covariance block
};

/// mean of e^T P^-1 e / 3 over ticks with an invertible 3x3 block.
AneesResult anees_position(const RunRecord& run);
AneesResult anees_orientation(const RunRecord& run);

/// e^T P^-1 e / dof averaged over paired samples; singular P are skipped.
AneesResult anees(const std::vector<Vec3>& errors, const std::vector<Mat3>& covariances);

}  // namespace objrel
