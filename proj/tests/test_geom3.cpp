#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "objrel/geom3.hpp"
#include "test_support.hpp"

using namespace objrel;
using objrel::testing::random_quat;
using objrel::testing::random_vec;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 random_angle(std::mt19937_64& rng, double max_norm) {
  std::uniform_real_distribution<double> u(0.0, max_norm);
  Vec3 axis = random_vec(rng, 1.0).normalized();
  return axis * u(rng);
}

}  // namespace

TEST(Geom3, ExpOfZeroIsIdentity) { EXPECT_TRUE(exp_so3(Vec3::Zero()).isApprox(Mat3::Identity(), 0.0)); }

TEST(Geom3, ExpQuarterTurnAboutZ) {
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT((exp_so3(Vec3(0, 0, kPi / 2)) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Geom3, LogInvertsExpOverThePrincipalBall) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 phi = random_angle(rng, kPi - 1e-6);
    EXPECT_LT((log_so3(exp_so3(phi)) - phi).norm(), 1e-9) << phi.transpose();
  }
}

TEST(Geom3, LogNearZeroUsesSeriesWithoutLoss) {
  const Vec3 tiny(1e-12, -2e-12, 3e-12);
  EXPECT_LT((log_so3(exp_so3(tiny)) - tiny).norm(), 1e-24);
  EXPECT_LT((quat_log(quat_exp(tiny)) - tiny).norm(), 1e-24);
}

TEST(Geom3, LogAtPiFollowsCanonicalSign) {
  const Vec3 phi = log_so3(exp_so3(Vec3(0, 0, kPi)));
  EXPECT_NEAR(phi.norm(), kPi, 1e-9);
  EXPECT_GT(phi.z(), 0.0);
  const Vec3 neg = log_so3(exp_so3(Vec3(-kPi, 0, 0)));
  EXPECT_NEAR(neg.x(), kPi, 1e-9);
}

TEST(Geom3, QuaternionCanonicalization) {
  const UnitQuaternion q(0.0, 0.0, 0.0, -2.0);
  EXPECT_EQ(q.w(), 1.0);
  const UnitQuaternion half(0.0, -1.0, 0.0, 0.0);
  EXPECT_EQ(half.y(), 1.0);
  EXPECT_THROW(UnitQuaternion(0, 0, 0, 0), std::invalid_argument);
  EXPECT_THROW(UnitQuaternion(NAN, 0, 0, 1), std::invalid_argument);
}

TEST(Geom3, FromCanonicalKeepsBitsAndValidates) {
  std::mt19937_64 rng(3);
  const UnitQuaternion q = random_quat(rng);
  const UnitQuaternion r = UnitQuaternion::from_canonical(q.x(), q.y(), q.z(), q.w());
  EXPECT_EQ(r.coeffs(), q.coeffs());
  EXPECT_THROW(UnitQuaternion::from_canonical(0, 0, 0, 2), std::invalid_argument);
  EXPECT_THROW(UnitQuaternion::from_canonical(0, 0, 0, -1), std::invalid_argument);
}

TEST(Geom3, QuaternionAndMatrixAgree) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const UnitQuaternion a = random_quat(rng);
    const UnitQuaternion b = random_quat(rng);
    EXPECT_LT((rot_of(quat_mul(a, b)) - rot_of(a) * rot_of(b)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((rot_of(quat_conj(a)) - rot_of(a).transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((quat_of(rot_of(a)).coeffs() - a.coeffs()).norm(), 1e-12);
    const Vec3 phi = random_angle(rng, 3.0);
    EXPECT_LT((rot_of(quat_exp(phi)) - exp_so3(phi)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Geom3, QuatOfRejectsNonRotations) {
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1.0;
  EXPECT_THROW(quat_of(reflect), std::invalid_argument);
  EXPECT_THROW(quat_of(2.0 * Mat3::Identity()), std::invalid_argument);
  EXPECT_FALSE(is_rotation(reflect));
}

TEST(Geom3, SkewVeeRoundTrip) {
  const Vec3 v(1.0, -2.0, 3.0);
  EXPECT_EQ(vee(skew(v)), v);
  EXPECT_LT((skew(v) * Vec3(4, 5, 6) - v.cross(Vec3(4, 5, 6))).norm(), 1e-15);
}

TEST(Geom3, GeodesicDistanceMatchesAngle) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    const UnitQuaternion a = random_quat(rng);
    const Vec3 phi = random_angle(rng, kPi - 1e-3);
    const UnitQuaternion b = quat_mul(a, quat_exp(phi));
    EXPECT_NEAR(geodesic_distance(a, b), phi.norm(), 1e-9);
    EXPECT_NEAR(geodesic_distance(b, a), phi.norm(), 1e-9);
  }
}

TEST(Geom3, ComposeAndInvert) {
  std::mt19937_64 rng(13);
  const Pose a{random_vec(rng, 1.0), random_quat(rng)};
  const Pose id = compose(a, invert(a));
  EXPECT_LT(id.p.norm(), 1e-12);
  EXPECT_LT(geodesic_distance(id.q, UnitQuaternion()), 1e-9);
  EXPECT_LT((invert(a).p - inverse_position(a.p, rot_of(a.q))).norm(), 1e-15);
}

TEST(Geom3, RightJacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    const Vec3 phi = random_angle(rng, 2.5);
    const Mat3 r0t = exp_so3(phi).transpose();
    Mat3 num;
    for (int k = 0; k < 3; ++k) {
      const Vec3 e = Vec3::Unit(k) * h;
      num.col(k) = (log_so3(r0t * exp_so3(phi + e)) - log_so3(r0t * exp_so3(phi - e))) / (2 * h);
    }
    EXPECT_LT((num - right_jacobian(phi)).cwiseAbs().maxCoeff(), 1e-7);
  }
  EXPECT_TRUE(right_jacobian(Vec3::Zero()).isApprox(Mat3::Identity()));
}

TEST(Geom3, TransposeSandwichIdentity) {
  std::mt19937_64 rng(19);
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    const Mat3 q = rot_of(random_quat(rng)), r = rot_of(random_quat(rng)), s = rot_of(random_quat(rng));
    const Mat3 f0t = (q * r.transpose() * s).transpose();
    Mat3 num;
    for (int k = 0; k < 3; ++k) {
      const Vec3 e = Vec3::Unit(k) * h;
      const Mat3 plus = q * (r * exp_so3(e)).transpose() * s;
      const Mat3 minus = q * (r * exp_so3(-e)).transpose() * s;
      num.col(k) = (log_so3(f0t * plus) - log_so3(f0t * minus)) / (2 * h);
    }
    EXPECT_LT((num - dR_transpose_sandwich(q, r, s)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Geom3, TransposeVectorIdentities) {
  std::mt19937_64 rng(23);
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    const Mat3 q = rot_of(random_quat(rng));
    const Vec3 phi = random_angle(rng, 2.5);
    const Mat3 r = exp_so3(phi);
    const Vec3 v = random_vec(rng, 3.0);
    Mat3 right, additive;
    for (int k = 0; k < 3; ++k) {
      const Vec3 e = Vec3::Unit(k) * h;
      right.col(k) = (q * (r * exp_so3(e)).transpose() * v - q * (r * exp_so3(-e)).transpose() * v) / (2 * h);
      additive.col(k) = (q * exp_so3(phi + e).transpose() * v - q * exp_so3(phi - e).transpose() * v) / (2 * h);
    }
    EXPECT_LT((right - dR_transpose_vector(q, r, v)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((additive - dR_transpose_vector_additive(q, phi, v)).cwiseAbs().maxCoeff(), 1e-7);
  }
}
