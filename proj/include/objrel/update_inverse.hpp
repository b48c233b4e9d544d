#pragma once

/// \file update_inverse.hpp
/// Baseline filter measuring the camera in the object frame. The position of
/// the inverted measurement depends on the measured rotation, so rotation
/// errors leak into the position residual and the blocks cannot be gated
/// separately.

#include <vector>

#include "objrel/update_direct.hpp"

namespace objrel {

/// Relative pose with full 3x3 position and rotation covariance blocks.
struct InvertedMeasurement {
  double t = 0.0;
  std::string object_class;
  Vec3 p = Vec3::Zero();
  UnitQuaternion q;
  Mat3 cov_p = Mat3::Identity();
  Mat3 cov_theta = Mat3::Identity();
};

/// p_OC = -R_CO^T p_CO, q_OC = q_CO^-1, and each covariance block rotated as
/// R_OC Sigma R_OC^T. No position/rotation cross terms are introduced.
InvertedMeasurement invert_measurement(const PoseMeasurement& meas);

/// Same inversion applied to an already inverted measurement (involution).
InvertedMeasurement invert_measurement(const InvertedMeasurement& meas);

/// Predicted camera pose in the object frame.
Pose predict_inverse(const FullState& state, std::size_t obj);

Vec3 inverse_residual_position(const FullState& state, std::size_t obj, const InvertedMeasurement& meas);

/// Throws DegenerateResidual near pi.
Vec3 inverse_residual_rotation(const FullState& state, std::size_t obj, const InvertedMeasurement& meas);

/// H = dh/dx of the predicted inverse pose; anchor columns not masked.
MeasurementJacobians inverse_jacobians(const FullState& state, std::size_t obj);

/// Stacks the 6-row blocks of every accepted measurement. Throws
/// std::invalid_argument if a decision carries a partial verdict. A
/// degenerate rotation residual rejects the whole measurement.
StackedUpdate build_stacked_inverse(const FullState& state, const std::vector<MatchedMeasurement>& matches,
                                    const std::vector<GatingDecision>& decisions);

/// Full EKF update with the inverted measurements.
UpdateOutcome inverse_update(FullState& state, ErrorCovariance& cov, const std::vector<MatchedMeasurement>& matches,
                             const std::vector<GatingDecision>& decisions, AnchorMode mode);

}  // namespace objrel
