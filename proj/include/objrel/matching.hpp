#pragma once

/// \file matching.hpp
/// Data association of per-image measurements to estimated object frames and
/// initialization of unseen objects.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "objrel/measurement.hpp"
#include "objrel/state.hpp"

namespace objrel {

/// p^_WO = p_WI + R_WI (p_IC + R_IC p^_CO), R^_WO = R_WI R_IC R^_CO.
Pose project_measurement(const FullState& state, const PoseMeasurement& meas);

struct ProjectedObject {
  Pose pose;
  std::string object_class;
};

struct MatchGates {
  double weight_position = 1.0;  // 1/m
  double weight_rotation = 1.0;  // 1/rad
  double gate = 1.0;             // combined, dimensionless
};

struct MatchResult {
  /// (measurement index, object index) pairs, ordered by measurement index.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> unmatched_measurements;
  std::vector<std::size_t> unmatched_objects;
};

/// Minimum-cost assignment on a rectangular cost matrix (rows <= cols or
/// not). Returns, per row, the assigned column or -1.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

/// Class-consistent assignment minimizing w_p |dp| + w_theta geodesic(dR).
/// Pairs with a class mismatch or cost above the gate are never matched.
MatchResult match(const std::vector<ProjectedObject>& projected, const std::vector<ObjectState>& estimated,
                  const MatchGates& gates);

/// Covariance contributions for initializing an object from a measurement.
struct ObjectInitialization {
  ObjectState object;
  Eigen::MatrixXd jacobian;  // 6 x dim
  Mat6 noise;                // J_n Sigma_CO J_n^T
};

ObjectInitialization object_initialization(const FullState& state, const PoseMeasurement& meas, int id);

/// Projects the measurement and appends the new object via add_object.
void initialize_object(FullState& state, ErrorCovariance& cov, const PoseMeasurement& meas, int id);

}  // namespace objrel
