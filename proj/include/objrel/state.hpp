#pragma once

/// \file state.hpp
/// Nominal filter state, error-state covariance and the object registry.
///
/// Error-state layout (dimension 21 + 6N):
///   [dp_WI, dv_WI, dtheta_WI, db_w, db_a, dp_IC, dtheta_IC,
///    dp_WO0, dtheta_WO0, ..., dp_WON, dtheta_WON]

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "objrel/geom3.hpp"

namespace objrel {

using Mat6 = Eigen::Matrix<double, 6, 6>;

namespace idx {
inline constexpr int kP = 0;
inline constexpr int kV = 3;
inline constexpr int kTheta = 6;
inline constexpr int kBiasGyro = 9;
inline constexpr int kBiasAcc = 12;
inline constexpr int kPosIC = 15;
inline constexpr int kThetaIC = 18;
inline constexpr int kCoreDim = 21;
/// Number of propagated core states; extrinsics and objects are static.
inline constexpr int kDynamicDim = 15;
inline constexpr int kObjectDim = 6;

inline constexpr int object_pos(std::size_t i) { return kCoreDim + kObjectDim * static_cast<int>(i); }
inline constexpr int object_theta(std::size_t i) { return object_pos(i) + 3; }
}  // namespace idx

struct CoreState {
  Vec3 p_wi = Vec3::Zero();
  Vec3 v_wi = Vec3::Zero();
  UnitQuaternion q_wi;
  Vec3 b_w = Vec3::Zero();
  Vec3 b_a = Vec3::Zero();
};

/// IMU-camera calibration. Carried in the state layout, never estimated.
struct Extrinsics {
  Vec3 p_ic = Vec3::Zero();
  UnitQuaternion q_ic;
};

struct ObjectState {
  int id = 0;
  std::string object_class;
  Vec3 p_wo = Vec3::Zero();
  UnitQuaternion q_wo;
  bool anchor = false;
};

struct FullState {
  double t = 0.0;
  CoreState core;
  Extrinsics extr;
  /// Order defines the error-state block layout.
  std::vector<ObjectState> objects;

  int error_dim() const { return idx::kCoreDim + idx::kObjectDim * static_cast<int>(objects.size()); }

  /// Index of the object with identifier `id`, or -1.
  int find_object(int id) const;
  /// Index of the anchor object, or -1 when no object is registered.
  int anchor_index() const;
};

/// Symmetric error-state covariance.
class ErrorCovariance {
 public:
  ErrorCovariance() = default;
  explicit ErrorCovariance(Eigen::MatrixXd p);

  const Eigen::MatrixXd& matrix() const { return p_; }
  Eigen::MatrixXd& matrix() { return p_; }
  int dim() const { return static_cast<int>(p_.rows()); }

  void symmetrize();
  /// Largest absolute asymmetry |P - P^T|.
  double asymmetry() const;

 private:
  Eigen::MatrixXd p_;
};

/// Initial covariance for the 21 core states.
struct InitialUncertainty {
  double sigma_p = 0.005;       // m
  double sigma_v = 0.01;        // m/s
  double sigma_theta = 0.003;   // rad
  double sigma_bias_gyro = 1e-3;  // rad/s
  double sigma_bias_acc = 1e-2;   // m/s^2
  double sigma_extrinsic = 1e-6;  // std dev of the held-fixed calibration block
};

ErrorCovariance initial_covariance(const InitialUncertainty& init);

/// Mask over the error state; true marks a state excluded from corrections.
using ErrorMask = std::vector<bool>;

/// Additive on vector blocks, right-multiplicative Exp on rotation blocks.
/// Throws std::invalid_argument on a dimension mismatch.
FullState inject_error(const FullState& state, const Eigen::VectorXd& dx);

/// Appends `obj` and grows the covariance by a 6x6 block:
///   P_new,new = J P J^T + noise_cov, P_new,rest = J P
/// where J (6 x dim) is the initialization Jacobian with respect to the
/// existing error state. The first object becomes the anchor; later objects
/// never do. Throws std::invalid_argument on a duplicate id or bad sizes.
void add_object(FullState& state, ErrorCovariance& cov, ObjectState obj, const Mat6& noise_cov,
                const Eigen::MatrixXd& init_jacobian);

/// Mask of the anchor object's 6 error columns. Throws std::logic_error if
/// no object is registered.
ErrorMask anchor_mask(const FullState& state);

/// Flat state snapshot for logging.
struct StateSnapshot {
  std::vector<std::string> names;
  std::vector<double> values;
};

/// Timestamp, core nominal values, extrinsics, object poses and P diagonal.
StateSnapshot snapshot(const FullState& state, const ErrorCovariance& cov);

}  // namespace objrel
