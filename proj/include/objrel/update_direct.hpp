#pragma once

/// \file update_direct.hpp
/// Direct object-relative pose measurement: the camera-to-object pose is used
/// as measured. Position and rotation residuals are decoupled, so either
/// block can be dropped from an update independently.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "objrel/gating.hpp"
#include "objrel/measurement.hpp"
#include "objrel/state.hpp"

namespace objrel {

using RowBlock = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// Rotation residual too close to pi for the small-angle quaternion form.
class DegenerateResidual : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smallest |qw| of the residual quaternion accepted by the 2 qv / qw form.
inline constexpr double kMinResidualQw = 1e-6;

/// How the anchor object enters an update.
enum class AnchorMode {
  /// Anchor Jacobian columns zeroed and its gain rows zeroed.
  ZeroJacobian,
  /// Anchor columns kept in the innovation covariance, gain rows zeroed
  /// (Schmidt consider update). The anchor pose is still never corrected.
  Consider,
};

/// Predicted camera-object pose p_CO, R_CO from the state.
Pose predict_direct(const FullState& state, std::size_t obj);

/// z_p = p^_CO - R_IC^T(-p_IC + R_WI^T (p_WO - p_WI)).
Vec3 residual_position(const FullState& state, std::size_t obj, const PoseMeasurement& meas);

/// 2 qv / qw of (q_IC^-1 q_WI^-1 q_WO)^-1 q^_CO after canonicalization.
/// Throws DegenerateResidual when |qw| < kMinResidualQw.
Vec3 residual_rotation(const FullState& state, std::size_t obj, const PoseMeasurement& meas);

/// Small-angle rotation residual of a residual quaternion. Throws
/// DegenerateResidual near pi.
Vec3 small_angle_residual(const UnitQuaternion& residual);

struct MeasurementJacobians {
  RowBlock h_p;  // 3 x dim
  RowBlock h_r;  // 3 x dim
};

/// Measurement Jacobians of the predicted direct pose with respect to the
/// error state (H = dh/dx, so dz/dx = -H). Anchor columns are not masked.
MeasurementJacobians jacobians(const FullState& state, std::size_t obj);

/// Vertically stacked residuals, Jacobians and block-diagonal noise.
struct StackedUpdate {
  Eigen::VectorXd residual;
  Eigen::MatrixXd h;
  Eigen::MatrixXd noise;
  int rows() const { return static_cast<int>(residual.size()); }
  bool empty() const { return residual.size() == 0; }
};

/// A measurement assigned to an object index in the state.
struct MatchedMeasurement {
  std::size_t object_index = 0;
  PoseMeasurement meas;
};

/// Appends rows of one object: [p-block, theta-block] per selection.
void append_rows(StackedUpdate& stacked, const Eigen::Vector3d& residual, const RowBlock& h, const Mat3& noise);

/// Stacks the blocks each decision keeps, in match order. A degenerate
/// rotation residual drops that rotation block. When every row is rejected
/// the result is empty and no update should be run.
StackedUpdate build_stacked(const FullState& state, const std::vector<MatchedMeasurement>& matches,
                            const std::vector<GatingDecision>& decisions);

/// Sets the masked columns of H to zero.
void zero_columns(Eigen::MatrixXd& h, const ErrorMask& mask);

struct UpdateOutcome {
  bool applied = false;
  double condition_number = 0.0;
  std::string diagnostic;
};

inline constexpr double kMaxInnovationCondition = 1e12;

/// Error-state EKF update with Joseph-form covariance:
///   S = H P H^T + Sigma, K = P H^T S^-1, dx = K z,
///   P <- (I-KH) P (I-KH)^T + K Sigma K^T.
/// Gain rows flagged in `frozen` are zeroed so those states never move.
/// Skipped (state untouched) when S has condition number > 1e12.
UpdateOutcome ekf_update(FullState& state, ErrorCovariance& cov, const StackedUpdate& stacked,
                         const ErrorMask& frozen = {});

/// Applies the anchor mode to a stacked update and runs ekf_update.
UpdateOutcome anchored_update(FullState& state, ErrorCovariance& cov, StackedUpdate stacked, AnchorMode mode);

}  // namespace objrel
