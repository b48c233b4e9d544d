#include "objrel/geom3.hpp"

#include <cmath>
#include <stdexcept>

namespace objrel {

namespace {

// Shepperd's method: pick the largest of the four squared components so the
// division is always well conditioned. No validation.
Eigen::Vector4d shepperd(const Mat3& r) {
  const double tr = r.trace();
  Eigen::Vector4d q;  // x y z w
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q << (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s, 0.25 * s;
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q << 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s, (r(2, 1) - r(1, 2)) / s;
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 - r(0, 0) + r(1, 1) - r(2, 2));
    q << (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s, (r(0, 2) - r(2, 0)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 - r(0, 0) - r(1, 1) + r(2, 2));
    q << (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s, (r(1, 0) - r(0, 1)) / s;
  }
  return q;
}

}  // namespace

UnitQuaternion::UnitQuaternion(double qx, double qy, double qz, double qw) {
  const double n = std::sqrt(qx * qx + qy * qy + qz * qz + qw * qw);
  if (!std::isfinite(n) || n == 0.0) {
    throw std::invalid_argument("UnitQuaternion: zero or non-finite quaternion");
  }
  qx /= n;
  qy /= n;
  qz /= n;
  qw /= n;
  bool flip = qw < 0.0;
  if (qw == 0.0) {
    const double first = qx != 0.0 ? qx : (qy != 0.0 ? qy : qz);
    flip = first < 0.0;
  }
  if (flip) {
    qx = -qx;
    qy = -qy;
    qz = -qz;
    qw = -qw;
  }
  x_ = qx;
  y_ = qy;
  z_ = qz;
  w_ = qw;
}

UnitQuaternion UnitQuaternion::from_canonical(double qx, double qy, double qz, double qw) {
  const double n2 = qx * qx + qy * qy + qz * qz + qw * qw;
  if (!std::isfinite(n2) || std::abs(n2 - 1.0) > 2e-12) {
    throw std::invalid_argument("UnitQuaternion::from_canonical: coefficients are not unit length");
  }
  const UnitQuaternion canonical(qx, qy, qz, qw);
  if (std::signbit(canonical.w_) != std::signbit(qw) && qw != 0.0) {
    throw std::invalid_argument("UnitQuaternion::from_canonical: coefficients are not canonical");
  }
  UnitQuaternion q;
  q.x_ = qx;
  q.y_ = qy;
  q.z_ = qz;
  q.w_ = qw;
  return q;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

Mat3 exp_so3(const Vec3& theta) {
  const double angle = theta.norm();
  const Mat3 k = skew(theta);
  if (angle < kSmallAngle) {
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const double a = std::sin(angle) / angle;
  const double b = (1.0 - std::cos(angle)) / (angle * angle);
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 log_so3(const Mat3& rot) {
  const Vec3 antisym = 0.5 * vee(rot - rot.transpose());
  // First order is exact to ~1e-15 relative when sin(theta) ~ theta.
  if (antisym.norm() < kSmallAngle && rot.trace() > 0.0) {
    return antisym;
  }
  const Eigen::Vector4d c = shepperd(rot);
  Vec3 phi = quat_log(UnitQuaternion(c[0], c[1], c[2], c[3]));
  // At a half turn phi and -phi are the same rotation; pick the one whose
  // first nonzero component is positive.
  if (std::abs(c[3]) < 1e-12) {
    for (int i = 0; i < 3; ++i) {
      if (std::abs(phi[i]) > 1e-12) {
        if (phi[i] < 0.0) phi = -phi;
        break;
      }
    }
  }
  return phi;
}

UnitQuaternion quat_mul(const UnitQuaternion& a, const UnitQuaternion& b) {
  const Vec3 av = a.vec();
  const Vec3 bv = b.vec();
  const double w = a.w() * b.w() - av.dot(bv);
  const Vec3 v = a.w() * bv + b.w() * av + av.cross(bv);
  return {v.x(), v.y(), v.z(), w};
}

UnitQuaternion quat_conj(const UnitQuaternion& q) { return {-q.x(), -q.y(), -q.z(), q.w()}; }

Mat3 rot_of(const UnitQuaternion& q) {
  const double x = q.x(), y = q.y(), z = q.z(), w = q.w();
  Mat3 r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w),
       2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w),
       2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y);
  return r;
}

bool is_rotation(const Mat3& rot, double tol) {
  if (!rot.allFinite()) return false;
  const double ortho = (rot.transpose() * rot - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rot.determinant() - 1.0) <= tol;
}

UnitQuaternion quat_of(const Mat3& rot) {
  if (!is_rotation(rot)) {
    throw std::invalid_argument("quat_of: matrix is not a proper rotation");
  }
  const Eigen::Vector4d c = shepperd(rot);
  return {c[0], c[1], c[2], c[3]};
}

UnitQuaternion quat_exp(const Vec3& theta) {
  const double angle = theta.norm();
  if (angle < kSmallAngle) {
    const Vec3 h = 0.5 * theta;
    return {h.x(), h.y(), h.z(), 1.0 - 0.125 * angle * angle};
  }
  const Vec3 v = std::sin(0.5 * angle) / angle * theta;
  return {v.x(), v.y(), v.z(), std::cos(0.5 * angle)};
}

Vec3 quat_log(const UnitQuaternion& q) {
  const Vec3 v = q.vec();
  const double n = v.norm();
  if (n < kSmallAngle) {
    return 2.0 / q.w() * (1.0 - n * n / (3.0 * q.w() * q.w())) * v;
  }
  return 2.0 * std::atan2(n, q.w()) / n * v;
}

double geodesic_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
  return quat_log(quat_mul(quat_conj(a), b)).norm();
}

Vec3 inverse_position(const Vec3& p_ab, const Mat3& r_ab) { return -r_ab.transpose() * p_ab; }

Pose compose(const Pose& a_b, const Pose& b_c) {
  return {a_b.p + rot_of(a_b.q) * b_c.p, quat_mul(a_b.q, b_c.q)};
}

Pose invert(const Pose& a_b) { return {inverse_position(a_b.p, rot_of(a_b.q)), quat_conj(a_b.q)}; }

Mat3 right_jacobian(const Vec3& phi) {
  const double angle = phi.norm();
  const Mat3 k = skew(phi);
  if (angle < kSmallAngle) {
    return Mat3::Identity() - 0.5 * k + k * k / 6.0;
  }
  const double a2 = angle * angle;
  return Mat3::Identity() - (1.0 - std::cos(angle)) / a2 * k + (angle - std::sin(angle)) / (a2 * angle) * k * k;
}

Mat3 dR_transpose_sandwich(const Mat3& /*q*/, const Mat3& r, const Mat3& s) { return -s.transpose() * r; }

Mat3 dR_transpose_vector(const Mat3& q, const Mat3& r, const Vec3& v) { return q * skew(r.transpose() * v); }

Mat3 dR_transpose_vector_additive(const Mat3& q, const Vec3& phi, const Vec3& v) {
  return q * skew(exp_so3(phi).transpose() * v) * right_jacobian(phi);
}

}  // namespace objrel
