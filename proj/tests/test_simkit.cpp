#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "objrel/gating.hpp"
#include "objrel/simkit.hpp"

using namespace objrel;

namespace {

TrajectorySpec static_trajectory(double duration) {
  TrajectorySpec t;
  t.duration = duration;
  return t;
}

WorldSpec single_object(const Vec3& p) {
  WorldSpec w;
  w.objects.push_back({0, "mug", Pose{p, quat_exp(Vec3(0.1, -0.2, 0.3))}});
  return w;
}

/// Point `offset` expressed in the camera frame of the static identity robot.
Vec3 world_point_from_camera(const Vec3& offset) {
  const Extrinsics e = default_extrinsics();
  return e.p_ic + rot_of(e.q_ic) * offset;
}

double cdf_chi3(double x) {
  return std::erf(std::sqrt(x / 2)) - std::sqrt(2 * x / std::numbers::pi) * std::exp(-x / 2);
}

}  // namespace

TEST(Simkit, StaticImuMeasuresGravityOnly) {
  TrajectorySpec t = static_trajectory(1.0);
  t.ypr_center = Vec3(0.3, 0.2, -0.1);
  ImuSimSpec spec;
  spec.perfect = true;
  const ImuStream imu = gen_imu(t, spec, 5);
  ASSERT_EQ(imu.samples.size(), 201u);
  const Vec3 expected = rot_of(evaluate(t, 0.0).q).transpose() * spec.noise.gravity;
  for (const ImuSample& s : imu.samples) {
    EXPECT_LT((s.acc - expected).norm(), 1e-12);
    EXPECT_LT(s.gyro.norm(), 1e-12);
  }
}

TEST(Simkit, TrajectoryDerivativesMatchFiniteDifferences) {
  const Preset pr = preset(5);
  const double h = 1e-5;
  for (double t : {0.3, 4.1, 11.7}) {
    const TrajectoryPoint a = evaluate(pr.trajectory, t - h), b = evaluate(pr.trajectory, t + h), c = evaluate(pr.trajectory, t);
    EXPECT_LT(((b.p - a.p) / (2 * h) - c.v).norm(), 1e-6);
    EXPECT_LT(((b.v - a.v) / (2 * h) - c.a).norm(), 1e-5);
    const Vec3 w = (log_so3(rot_of(c.q).transpose() * rot_of(b.q)) - log_so3(rot_of(c.q).transpose() * rot_of(a.q))) / (2 * h);
    EXPECT_LT((w - c.omega).norm(), 1e-6);
  }
}

TEST(Simkit, ZeroSigmaGivesExactRelativePose) {
  const TrajectorySpec t = preset(0).trajectory;
  const WorldSpec w = preset(0).world;
  SensorSpec s;
  s.sigma_p.setZero();
  s.sigma_theta.setZero();
  const Extrinsics e = default_extrinsics();
  const std::vector<CameraFrame> frames = gen_measurements(t, w, s, e, 3);
  ASSERT_EQ(frames.size(), 401u);
  for (const CameraFrame& f : frames) {
    ASSERT_EQ(f.measurements.size(), 1u);
    const Pose rel = relative_pose(evaluate(t, f.t), e, w.objects[0].pose);
    EXPECT_EQ(f.measurements[0].p_co, rel.p);
    EXPECT_LT(geodesic_distance(f.measurements[0].q_co, rel.q), 1e-15);
    EXPECT_EQ(f.measurements[0].var_p, Vec3::Constant(s.min_reported_sigma).cwiseAbs2());
  }
}

TEST(Simkit, EmpiricalNoiseMatchesConfiguredSigma) {
  const TrajectorySpec t = static_trajectory(500.0);
  const WorldSpec w = single_object(world_point_from_camera(Vec3(0.2, -0.1, 2.0)));
  SensorSpec s;
  s.sigma_p = Vec3(0.01, 0.05, 0.2);
  s.sigma_theta = Vec3(0.0175, 0.1, 0.3);
  const Extrinsics e = default_extrinsics();
  const std::vector<CameraFrame> frames = gen_measurements(t, w, s, e, 11);
  const Pose rel = relative_pose(evaluate(t, 0.0), e, w.objects[0].pose);
  Vec3 sp = Vec3::Zero(), st = Vec3::Zero();
  std::vector<double> angles;
  for (const CameraFrame& f : frames) {
    ASSERT_EQ(f.measurements.size(), 1u);
    sp += (f.measurements[0].p_co - rel.p).cwiseAbs2();
    st += log_so3(rot_of(rel.q).transpose() * rot_of(f.measurements[0].q_co)).cwiseAbs2();
  }
  const double n = static_cast<double>(frames.size());
  ASSERT_GE(n, 1e4);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(std::sqrt(sp[i] / n) / s.sigma_p[i], 1.0, 0.03) << i;
    EXPECT_NEAR(std::sqrt(st[i] / n) / s.sigma_theta[i], 1.0, 0.03) << i;
  }
}

// Isotropic rotation noise: the geodesic angle follows sigma * chi(3).
TEST(Simkit, GeodesicAngleFollowsChiDistribution) {
  const TrajectorySpec t = static_trajectory(500.0);
  const WorldSpec w = single_object(world_point_from_camera(Vec3(0, 0, 3.0)));
  SensorSpec s;
  s.sigma_theta = Vec3::Constant(0.1);
  const Extrinsics e = default_extrinsics();
  const Pose rel = relative_pose(evaluate(t, 0.0), e, w.objects[0].pose);
  std::vector<double> angles;
  for (const CameraFrame& f : gen_measurements(t, w, s, e, 13)) {
    angles.push_back(geodesic_distance(rel.q, f.measurements[0].q_co) / 0.1);
  }
  std::sort(angles.begin(), angles.end());
  const double n = static_cast<double>(angles.size());
  double d = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double f = cdf_chi3(angles[i] * angles[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(d, 1.63 / std::sqrt(n));  // KS critical value, alpha = 0.01
}

TEST(Simkit, VisibilityFrustumAndRange) {
  const TrajectorySpec t = static_trajectory(1.0);
  const Extrinsics e = default_extrinsics();
  auto visible = [&](const Vec3& cam_offset, double range = 10.0) {
    return !visibility(t, single_object(world_point_from_camera(cam_offset)), e, 0.0, 90.0, range).empty();
  };
  EXPECT_TRUE(visible(Vec3(0, 0, 2)));
  EXPECT_FALSE(visible(Vec3(0, 0, -2)));
  EXPECT_TRUE(visible(Vec3(2, 0, 2)));
  EXPECT_TRUE(visible(Vec3(0, -3, 3)));
  EXPECT_FALSE(visible(Vec3(2.01, 0, 2)));
  EXPECT_FALSE(visible(Vec3(0, 0, 12)));
  EXPECT_FALSE(visible(Vec3(0, 0, 2), 1.5));
}

TEST(Simkit, StreamsAreReproducible) {
  const Preset pr = preset(1);
  ImuSimSpec spec;
  const ImuStream a = gen_imu(pr.trajectory, spec, 77), b = gen_imu(pr.trajectory, spec, 77), c = gen_imu(pr.trajectory, spec, 78);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  bool differs = false;
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    EXPECT_EQ(a.samples[k].acc, b.samples[k].acc);
    EXPECT_EQ(a.samples[k].gyro, b.samples[k].gyro);
    differs |= a.samples[k].acc != c.samples[k].acc;
  }
  EXPECT_TRUE(differs);
  SensorSpec s;
  const auto fa = gen_measurements(pr.trajectory, pr.world, s, default_extrinsics(), 77);
  const auto fb = gen_measurements(pr.trajectory, pr.world, s, default_extrinsics(), 77);
  ASSERT_EQ(fa.size(), fb.size());
  for (std::size_t k = 0; k < fa.size(); ++k) {
    ASSERT_EQ(fa[k].measurements.size(), fb[k].measurements.size());
    for (std::size_t i = 0; i < fa[k].measurements.size(); ++i) {
      EXPECT_EQ(fa[k].measurements[i].p_co, fb[k].measurements[i].p_co);
      EXPECT_EQ(fa[k].measurements[i].q_co.coeffs(), fb[k].measurements[i].q_co.coeffs());
    }
  }
}

TEST(Simkit, BiasRandomWalkVarianceGrowsLinearly) {
  const TrajectorySpec t = static_trajectory(10.0);
  ImuSimSpec spec;
  const std::size_t k5 = 1000, k10 = 2000;
  double v5 = 0.0, v10 = 0.0, w10 = 0.0;
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) {
    const ImuStream imu = gen_imu(t, spec, static_cast<std::uint64_t>(s));
    ASSERT_NEAR(imu.truth[k10].t, 10.0, 1e-12);
    v5 += (imu.truth[k5].b_a - imu.truth[0].b_a).squaredNorm();
    v10 += (imu.truth[k10].b_a - imu.truth[0].b_a).squaredNorm();
    w10 += (imu.truth[k10].b_w - imu.truth[0].b_w).squaredNorm();
  }
  const double qa = spec.noise.sigma_bias_acc * spec.noise.sigma_bias_acc;
  const double qw = spec.noise.sigma_bias_gyro * spec.noise.sigma_bias_gyro;
  EXPECT_NEAR(v5 / (3 * seeds) / (qa * 5.0), 1.0, 0.1);
  EXPECT_NEAR(v10 / (3 * seeds) / (qa * 10.0), 1.0, 0.1);
  EXPECT_NEAR(w10 / (3 * seeds) / (qw * 10.0), 1.0, 0.1);
}

TEST(Simkit, EpisodeTriggersAorpRotationRejection) {
  const Preset pr = preset(0);
  SensorSpec s;
  s.mode = ReportingMode::AmbiguityEpisodes;
  s.episodes = {{5.0, 6.0, 20.0}};
  const auto frames = gen_measurements(pr.trajectory, pr.world, s, default_extrinsics(), 1);
  const GatingConfig cfg;
  int inside = 0;
  for (const CameraFrame& f : frames) {
    const PoseMeasurement& m = f.measurements.at(0);
    const bool in_episode = f.t >= 5.0 && f.t < 6.0;
    EXPECT_EQ(m.var_p, s.sigma_p.cwiseAbs2());
    EXPECT_EQ(aorp(m, cfg).verdict, in_episode ? Verdict::RejectRotation : Verdict::AcceptAll) << f.t;
    inside += in_episode;
  }
  EXPECT_EQ(inside, 20);
}

TEST(Simkit, ReportingModes) {
  SensorSpec s;
  s.episodes = {{1.0, 2.0, 10.0}};
  EXPECT_EQ(episode_factor(s, 1.5), 1.0);
  s.mode = ReportingMode::AmbiguityEpisodes;
  EXPECT_EQ(episode_factor(s, 1.0), 10.0);
  EXPECT_EQ(episode_factor(s, 2.0), 1.0);
  EXPECT_EQ(episode_factor(s, 0.99), 1.0);
  // 20 of 81 ticks in [0, 4] lie in the window.
  EXPECT_NEAR(mean_episode_factor(s, 4.0), (61.0 + 20.0 * 10.0) / 81.0, 1e-12);
  s.mode = ReportingMode::FixedAverage;
  const Vec3 fixed = reported_sigma_theta(s, 0.0, 4.0);
  EXPECT_EQ(fixed, reported_sigma_theta(s, 1.5, 4.0));
  EXPECT_NEAR(fixed.x(), s.sigma_theta.x() * (261.0 / 81.0), 1e-12);
  for (ReportingMode m : {ReportingMode::Exact, ReportingMode::FixedAverage, ReportingMode::AmbiguityEpisodes}) {
    EXPECT_EQ(parse_reporting_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_reporting_mode("average"), std::invalid_argument);
}

TEST(Simkit, ValidationErrors) {
  SensorSpec s;
  s.camera_rate = 30.0;
  EXPECT_THROW(validate(s), std::invalid_argument);
  s = SensorSpec{};
  s.sigma_p.x() = -1.0;
  EXPECT_THROW(validate(s), std::invalid_argument);
  s = SensorSpec{};
  s.min_reported_sigma = 0.0;
  EXPECT_THROW(validate(s), std::invalid_argument);
  WorldSpec w;
  w.objects = {{1, "a", {}}, {1, "b", {}}};
  EXPECT_THROW(validate(w), std::invalid_argument);
  EXPECT_THROW(preset(kPresetCount), std::invalid_argument);
  EXPECT_THROW(preset(-1), std::invalid_argument);
}

TEST(Simkit, PresetsAreValidAndPresetZeroKeepsItsObjectInView) {
  for (int i = 0; i < kPresetCount; ++i) {
    const Preset p = preset(i);
    EXPECT_NO_THROW(validate(p.world));
    EXPECT_FALSE(p.name.empty());
    for (std::size_t a = 0; a < p.world.objects.size(); ++a)
      for (std::size_t b = a + 1; b < p.world.objects.size(); ++b)
        EXPECT_NE(p.world.objects[a].object_class, p.world.objects[b].object_class);
  }
  const Preset p0 = preset(0);
  ASSERT_EQ(p0.world.objects.size(), 1u);
  const SensorSpec s;
  for (double t = 0.0; t <= p0.trajectory.duration; t += 0.05) {
    EXPECT_EQ(visibility(p0.trajectory, p0.world, default_extrinsics(), t, s.fov_deg, s.max_range).size(), 1u) << t;
  }
}
