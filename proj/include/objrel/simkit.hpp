#pragma once

/// \file simkit.hpp
/// Synthetic world for Monte Carlo evaluation: analytic sinusoidal
/// trajectories, exact IMU synthesis, object constellations and perturbed
/// pose measurements with emulated aleatoric uncertainty.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "objrel/measurement.hpp"
#include "objrel/propagation.hpp"
#include "objrel/state.hpp"

namespace objrel {

/// p(t) = center + amp .* sin(2 pi freq t + phase) per axis; attitude as
/// yaw-pitch-roll angles with the same form (ZYX convention).
struct TrajectorySpec {
  double duration = 20.0;
  Vec3 center = Vec3::Zero();
  Vec3 amp = Vec3::Zero();
  Vec3 freq = Vec3::Zero();  // Hz
  Vec3 phase = Vec3::Zero();
  Vec3 ypr_center = Vec3::Zero();  // yaw, pitch, roll [rad]
  Vec3 ypr_amp = Vec3::Zero();
  Vec3 ypr_freq = Vec3::Zero();
  Vec3 ypr_phase = Vec3::Zero();
  /// Nonzero seeds jitter all phases deterministically.
  std::uint64_t seed = 0;
};

struct TrajectoryPoint {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();  // world-frame kinematic acceleration
  UnitQuaternion q;       // q_WI
  Vec3 omega = Vec3::Zero();  // body angular rate
};

TrajectoryPoint evaluate(const TrajectorySpec& traj, double t);

struct WorldObject {
  int id = 0;
  std::string object_class;
  Pose pose;  // in W
};

struct WorldSpec {
  std::vector<WorldObject> objects;
};

/// Throws std::invalid_argument on duplicate ids.
void validate(const WorldSpec& world);

enum class ReportingMode { Exact, FixedAverage, AmbiguityEpisodes };

std::string_view to_string(ReportingMode m);
/// Accepts exact, fixed, episodes.
ReportingMode parse_reporting_mode(std::string_view name);

/// Window in which the true rotation noise is scaled by `factor`.
struct Episode {
  double start = 0.0;
  double end = 0.0;
  double factor = 1.0;
};

struct SensorSpec {
  double imu_rate = 200.0;    // Hz
  double camera_rate = 20.0;  // Hz
  Vec3 sigma_p = Vec3::Constant(0.01);        // m
  Vec3 sigma_theta = Vec3::Constant(0.0175);  // rad
  ReportingMode mode = ReportingMode::Exact;
  std::vector<Episode> episodes;
  double fov_deg = 90.0;
  double max_range = 10.0;  // m
  /// Floor on reported standard deviations, keeps zero-noise runs positive definite.
  double min_reported_sigma = 1e-3;
};

/// Throws std::invalid_argument on non-positive rates or a camera rate that
/// does not divide the IMU rate.
void validate(const SensorSpec& sensor);

/// True rotation-noise factor at time t: 1 outside episodes and in Exact
/// mode. Windows are half-open [start, end).
double episode_factor(const SensorSpec& sensor, double t);

/// Mean of episode_factor over the camera ticks in [0, duration].
double mean_episode_factor(const SensorSpec& sensor, double duration);

/// Per-axis rotation std dev reported at time t for the configured mode.
Vec3 reported_sigma_theta(const SensorSpec& sensor, double t, double duration);

struct ImuSimSpec {
  ImuNoise noise;
  double rate = 200.0;
  double initial_bias_acc = 1e-2;   // std dev of b_a(0), m/s^2
  double initial_bias_gyro = 1e-3;  // std dev of b_w(0), rad/s
  /// No white noise, no bias.
  bool perfect = false;
};

struct ImuTruth {
  double t = 0.0;
  Vec3 b_a = Vec3::Zero();
  Vec3 b_w = Vec3::Zero();
};

struct ImuStream {
  std::vector<ImuSample> samples;
  std::vector<ImuTruth> truth;
};

/// a_m = R_WI^T (a_W + g) + b_a + n_a, w_m = w + b_w + n_w, biases as
/// discrete random walks. Samples at k / rate for k = 0 .. duration * rate.
ImuStream gen_imu(const TrajectorySpec& traj, const ImuSimSpec& spec, std::uint64_t seed);

struct CameraFrame {
  double t = 0.0;
  std::size_t tick = 0;
  std::vector<PoseMeasurement> measurements;
  std::vector<int> object_ids;  // ground-truth id per measurement
  std::vector<Vec3> true_sigma_theta;
};

/// Ids of objects inside the camera frustum (angle to optical axis
/// <= fov/2, range <= max_range).
std::vector<int> visibility(const TrajectorySpec& traj, const WorldSpec& world, const Extrinsics& extr, double t,
                            double fov_deg, double max_range);

/// Perturbed camera-object poses at every camera tick.
std::vector<CameraFrame> gen_measurements(const TrajectorySpec& traj, const WorldSpec& world,
                                          const SensorSpec& sensor, const Extrinsics& extr, std::uint64_t seed);

/// Exact camera-object pose.
Pose relative_pose(const TrajectoryPoint& robot, const Extrinsics& extr, const Pose& object);

/// Camera looking along the body x axis, mounted slightly forward.
Extrinsics default_extrinsics();

struct Preset {
  std::string name;
  TrajectorySpec trajectory;
  WorldSpec world;
};

inline constexpr int kPresetCount = 10;

/// Ten fixed trajectory/constellation combinations. Preset 0 has a single
/// object that stays in view for the whole run.
Preset preset(int index);

}  // namespace objrel
