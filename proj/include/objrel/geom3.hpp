#pragma once

/// \file geom3.hpp
/// SO(3) and unit-quaternion algebra used by the filter Jacobians.
///
/// Quaternions follow the Hamilton convention with scalar-last storage
/// [qx qy qz qw]. Every rotation error is a right perturbation:
/// R_true = R_est * Exp(dtheta).

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace objrel {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Tolerance used when validating rotation matrices and quaternion norms.
inline constexpr double kRotationTolerance = 1e-9;

/// Angle below which exp/log/J_r switch to their Taylor expansions.
inline constexpr double kSmallAngle = 1e-7;

/// Unit quaternion, canonicalized so that qw >= 0. When qw == 0 the first
/// nonzero vector component (x, then y, then z) is made positive.
class UnitQuaternion {
 public:
  UnitQuaternion() = default;

  /// Normalizes and canonicalizes. Throws std::invalid_argument on a zero
  /// or non-finite input.
  UnitQuaternion(double qx, double qy, double qz, double qw);

  static UnitQuaternion identity() { return {}; }
  /// Stores already unit, canonical coefficients verbatim so serialized
  /// quaternions round-trip bit-exactly. Throws std::invalid_argument when
  /// the norm deviates from 1 by more than 1e-12 or the sign is not canonical.
  static UnitQuaternion from_canonical(double qx, double qy, double qz, double qw);

  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  double w() const { return w_; }

  Vec3 vec() const { return {x_, y_, z_}; }
  /// Scalar-last coefficient vector.
  Eigen::Vector4d coeffs() const { return {x_, y_, z_, w_}; }

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
  double w_ = 1.0;
};

/// Rigid transform of frame B expressed in frame A.
struct Pose {
  Vec3 p = Vec3::Zero();
  UnitQuaternion q;
};

Mat3 skew(const Vec3& v);

/// Inverse of skew for an antisymmetric matrix.
Vec3 vee(const Mat3& m);

Mat3 exp_so3(const Vec3& theta);

/// Principal logarithm with |theta| in [0, pi]. At exactly pi the axis sign
/// follows the quaternion canonicalization (first nonzero of x, y, z positive).
Vec3 log_so3(const Mat3& rot);

UnitQuaternion quat_mul(const UnitQuaternion& a, const UnitQuaternion& b);
UnitQuaternion quat_conj(const UnitQuaternion& q);
Mat3 rot_of(const UnitQuaternion& q);

/// Throws std::invalid_argument if `rot` is not a proper rotation within
/// kRotationTolerance.
UnitQuaternion quat_of(const Mat3& rot);

UnitQuaternion quat_exp(const Vec3& theta);
Vec3 quat_log(const UnitQuaternion& q);

/// Geodesic angle between two rotations, radians in [0, pi].
double geodesic_distance(const UnitQuaternion& a, const UnitQuaternion& b);

/// Position of A in B given the pose of B in A: -R_AB^T p_AB.
Vec3 inverse_position(const Vec3& p_ab, const Mat3& r_ab);

Pose compose(const Pose& a_b, const Pose& b_c);
Pose invert(const Pose& a_b);

/// Right Jacobian of SO(3): Exp(phi + d) ~= Exp(phi) Exp(J_r(phi) d).
Mat3 right_jacobian(const Vec3& phi);

/// Right-perturbation derivative of Q R^T S with respect to R: -S^T R.
Mat3 dR_transpose_sandwich(const Mat3& q, const Mat3& r, const Mat3& s);

/// Right-perturbation derivative of Q R^T v with respect to R: Q [R^T v]x.
Mat3 dR_transpose_vector(const Mat3& q, const Mat3& r, const Vec3& v);

/// Derivative of Q Exp(phi)^T v with respect to an additive perturbation of
/// phi: Q [R^T v]x J_r(phi).
Mat3 dR_transpose_vector_additive(const Mat3& q, const Vec3& phi, const Vec3& v);

/// True when R^T R = I and det R = 1 within `tol`.
bool is_rotation(const Mat3& rot, double tol = kRotationTolerance);

}  // namespace objrel
