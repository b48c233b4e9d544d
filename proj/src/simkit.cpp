#include "objrel/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "objrel/rng.hpp"

namespace objrel {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPhaseJitter = 0.5;  // rad, full width
constexpr double kEdgeSlack = 1e-12;

struct Sinusoid {
  double value, rate, accel;
};

Sinusoid sinusoid(double c, double a, double f, double phi, double t) {
  const double w = kTwoPi * f;
  const double arg = w * t + phi;
  return {c + a * std::sin(arg), a * w * std::cos(arg), -a * w * w * std::sin(arg)};
}

Mat3 ypr_rotation(double yaw, double pitch, double roll) {
  const Eigen::AngleAxisd rz(yaw, Vec3::UnitZ());
  const Eigen::AngleAxisd ry(pitch, Vec3::UnitY());
  const Eigen::AngleAxisd rx(roll, Vec3::UnitX());
  return (rz * ry * rx).toRotationMatrix();
}

Vec3 jitter(const Vec3& phase, std::uint64_t seed, std::uint64_t which) {
  if (seed == 0) return phase;
  CounterRng rng(make_key({seed, static_cast<std::uint64_t>(Stream::TrajectoryPhase), which}));
  Vec3 out = phase;
  for (int i = 0; i < 3; ++i) out[i] += kPhaseJitter * (rng.uniform() - 0.5);
  return out;
}

std::size_t tick_count(double duration, double rate) {
  return static_cast<std::size_t>(std::floor(duration * rate + 1e-9)) + 1;
}

Vec3 normal3(CounterRng& rng) { return {rng.normal(), rng.normal(), rng.normal()}; }

}  // namespace

TrajectoryPoint evaluate(const TrajectorySpec& traj, double t) {
  TrajectoryPoint out;
  const Vec3 phase = jitter(traj.phase, traj.seed, 0);
  const Vec3 ypr_phase = jitter(traj.ypr_phase, traj.seed, 1);
  for (int i = 0; i < 3; ++i) {
    const Sinusoid s = sinusoid(traj.center[i], traj.amp[i], traj.freq[i], phase[i], t);
    out.p[i] = s.value;
    out.v[i] = s.rate;
    out.a[i] = s.accel;
  }
  const Sinusoid yaw = sinusoid(traj.ypr_center[0], traj.ypr_amp[0], traj.ypr_freq[0], ypr_phase[0], t);
  const Sinusoid pitch = sinusoid(traj.ypr_center[1], traj.ypr_amp[1], traj.ypr_freq[1], ypr_phase[1], t);
  const Sinusoid roll = sinusoid(traj.ypr_center[2], traj.ypr_amp[2], traj.ypr_freq[2], ypr_phase[2], t);
  out.q = quat_of(ypr_rotation(yaw.value, pitch.value, roll.value));

  const double sr = std::sin(roll.value), cr = std::cos(roll.value);
  const double sp = std::sin(pitch.value), cp = std::cos(pitch.value);
  out.omega = {roll.rate - yaw.rate * sp, pitch.rate * cr + yaw.rate * sr * cp,
               -pitch.rate * sr + yaw.rate * cr * cp};
  return out;
}

void validate(const WorldSpec& world) {
  std::set<int> ids;
  for (const WorldObject& o : world.objects) {
    if (!ids.insert(o.id).second) {
      throw std::invalid_argument("WorldSpec: duplicate object id " + std::to_string(o.id));
    }
  }
}

std::string_view to_string(ReportingMode m) {
  switch (m) {
    case ReportingMode::Exact: return "exact";
    case ReportingMode::FixedAverage: return "fixed";
    case ReportingMode::AmbiguityEpisodes: return "episodes";
  }
  return "exact";
}

ReportingMode parse_reporting_mode(std::string_view name) {
  if (name == "exact") return ReportingMode::Exact;
  if (name == "fixed") return ReportingMode::FixedAverage;
  if (name == "episodes") return ReportingMode::AmbiguityEpisodes;
  throw std::invalid_argument("unknown sigma mode '" + std::string(name) + "' (exact|fixed|episodes)");
}

void validate(const SensorSpec& sensor) {
  if (!(sensor.imu_rate > 0.0) || !(sensor.camera_rate > 0.0)) {
    throw std::invalid_argument("SensorSpec: rates must be positive");
  }
  const double ratio = sensor.imu_rate / sensor.camera_rate;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0) {
    throw std::invalid_argument("SensorSpec: camera rate must divide the IMU rate");
  }
  if ((sensor.sigma_p.array() < 0.0).any() || (sensor.sigma_theta.array() < 0.0).any()) {
    throw std::invalid_argument("SensorSpec: noise std devs must be non-negative");
  }
  if (!(sensor.min_reported_sigma > 0.0)) {
    throw std::invalid_argument("SensorSpec: min_reported_sigma must be positive");
  }
  for (const Episode& e : sensor.episodes) {
    if (!(e.end > e.start) || !(e.factor > 0.0)) {
      throw std::invalid_argument("SensorSpec: episodes need end > start and a positive factor");
    }
  }
}

double episode_factor(const SensorSpec& sensor, double t) {
  if (sensor.mode == ReportingMode::Exact) return 1.0;
  for (const Episode& e : sensor.episodes) {
    if (t >= e.start && t < e.end) return e.factor;
  }
  return 1.0;
}

double mean_episode_factor(const SensorSpec& sensor, double duration) {
  const std::size_t n = tick_count(duration, sensor.camera_rate);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += episode_factor(sensor, static_cast<double>(k) / sensor.camera_rate);
  return sum / static_cast<double>(n);
}

Vec3 reported_sigma_theta(const SensorSpec& sensor, double t, double duration) {
  const double factor = sensor.mode == ReportingMode::FixedAverage ? mean_episode_factor(sensor, duration)
                                                                   : episode_factor(sensor, t);
  return (sensor.sigma_theta * factor).cwiseMax(sensor.min_reported_sigma);
}

ImuStream gen_imu(const TrajectorySpec& traj, const ImuSimSpec& spec, std::uint64_t seed) {
  if (!(spec.rate > 0.0)) throw std::invalid_argument("gen_imu: rate must be positive");
  const double dt = 1.0 / spec.rate;
  const std::size_t n = tick_count(traj.duration, spec.rate);
  const auto s = [](Stream st) { return static_cast<std::uint64_t>(st); };

  Vec3 b_a = Vec3::Zero();
  Vec3 b_w = Vec3::Zero();
  if (!spec.perfect) {
    CounterRng init(make_key({seed, s(Stream::InitialBias)}));
    b_a = spec.initial_bias_acc * normal3(init);
    b_w = spec.initial_bias_gyro * normal3(init);
  }
  const double sd_acc = spec.noise.sigma_acc / std::sqrt(dt);
  const double sd_gyro = spec.noise.sigma_gyro / std::sqrt(dt);
  const double sd_walk_acc = spec.noise.sigma_bias_acc * std::sqrt(dt);
  const double sd_walk_gyro = spec.noise.sigma_bias_gyro * std::sqrt(dt);

  ImuStream out;
  out.samples.reserve(n);
  out.truth.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const TrajectoryPoint tp = evaluate(traj, t);
    const Mat3 r = rot_of(tp.q);
    ImuSample sample{t, r.transpose() * (tp.a + spec.noise.gravity) + b_a, tp.omega + b_w};
    if (!spec.perfect) {
      CounterRng white(make_key({seed, s(Stream::ImuNoise), k}));
      sample.acc += sd_acc * normal3(white);
      sample.gyro += sd_gyro * normal3(white);
    }
    out.samples.push_back(sample);
    out.truth.push_back({t, b_a, b_w});
    if (!spec.perfect) {
      CounterRng walk(make_key({seed, s(Stream::BiasWalk), k}));
      b_a += sd_walk_acc * normal3(walk);
      b_w += sd_walk_gyro * normal3(walk);
    }
  }
  return out;
}

Pose relative_pose(const TrajectoryPoint& robot, const Extrinsics& extr, const Pose& object) {
  const Pose w_c = compose(Pose{robot.p, robot.q}, Pose{extr.p_ic, extr.q_ic});
  return compose(invert(w_c), object);
}

std::vector<int> visibility(const TrajectorySpec& traj, const WorldSpec& world, const Extrinsics& extr, double t,
                            double fov_deg, double max_range) {
  const TrajectoryPoint tp = evaluate(traj, t);
  const double half = 0.5 * fov_deg * std::numbers::pi / 180.0;
  std::vector<int> out;
  for (const WorldObject& o : world.objects) {
    const Vec3 p = relative_pose(tp, extr, o.pose).p;
    const double range = p.norm();
    if (range <= 0.0 || range > max_range) continue;
    const double angle = std::atan2(p.head<2>().norm(), p.z());
    if (angle <= half + kEdgeSlack) out.push_back(o.id);
  }
  return out;
}

std::vector<CameraFrame> gen_measurements(const TrajectorySpec& traj, const WorldSpec& world,
                                          const SensorSpec& sensor, const Extrinsics& extr, std::uint64_t seed) {
  validate(sensor);
  validate(world);
  const std::size_t n = tick_count(traj.duration, sensor.camera_rate);
  const double fixed_factor = mean_episode_factor(sensor, traj.duration);
  const double floor = sensor.min_reported_sigma;
  std::vector<CameraFrame> frames;
  frames.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    CameraFrame frame;
    frame.tick = k;
    frame.t = static_cast<double>(k) / sensor.camera_rate;
    const TrajectoryPoint tp = evaluate(traj, frame.t);
    const double factor = episode_factor(sensor, frame.t);
    const Vec3 true_sp = sensor.sigma_p;
    const Vec3 true_st = sensor.sigma_theta * factor;
    const Vec3 rep_st = sensor.mode == ReportingMode::FixedAverage ? Vec3(sensor.sigma_theta * fixed_factor) : true_st;
    const Vec3 rep_sp = true_sp.cwiseMax(floor);
    const Vec3 rep_st_floored = rep_st.cwiseMax(floor);

    for (int id : visibility(traj, world, extr, frame.t, sensor.fov_deg, sensor.max_range)) {
      const auto it = std::find_if(world.objects.begin(), world.objects.end(),
                                   [id](const WorldObject& o) { return o.id == id; });
      const Pose rel = relative_pose(tp, extr, it->pose);
      CounterRng rng(make_key({seed, static_cast<std::uint64_t>(Stream::Measurement), k,
                               static_cast<std::uint64_t>(static_cast<std::int64_t>(id))}));
      const Vec3 np = normal3(rng);
      const Vec3 nt = normal3(rng);
      PoseMeasurement m;
      m.t = frame.t;
      m.object_class = it->object_class;
      m.p_co = rel.p + true_sp.cwiseProduct(np);
      m.q_co = quat_mul(rel.q, quat_exp(true_st.cwiseProduct(nt)));
      m.var_p = rep_sp.cwiseAbs2();
      m.var_theta = rep_st_floored.cwiseAbs2();
      frame.measurements.push_back(std::move(m));
      frame.object_ids.push_back(id);
      frame.true_sigma_theta.push_back(true_st);
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

Extrinsics default_extrinsics() {
  Mat3 r_ic;
  r_ic.col(0) = Vec3(0.0, -1.0, 0.0);
  r_ic.col(1) = Vec3(0.0, 0.0, -1.0);
  r_ic.col(2) = Vec3(1.0, 0.0, 0.0);
  return {Vec3(0.05, 0.0, 0.02), quat_of(r_ic)};
}

namespace {

WorldObject object_at(int id, std::string cls, const Vec3& p, double yaw, double pitch = 0.0, double roll = 0.0) {
  return {id, std::move(cls), Pose{p, quat_of(ypr_rotation(yaw, pitch, roll))}};
}

struct Motion {
  double distance;
  Vec3 amp, freq, phase;
  Vec3 ypr_amp, ypr_freq, ypr_phase;
};

TrajectorySpec trajectory_of(const Motion& m) {
  TrajectorySpec t;
  t.center = Vec3(-m.distance, 0.0, 1.0);
  t.amp = m.amp;
  t.freq = m.freq;
  t.phase = m.phase;
  t.ypr_amp = m.ypr_amp;
  t.ypr_freq = m.ypr_freq;
  t.ypr_phase = m.ypr_phase;
  return t;
}

}  // namespace

Preset preset(int index) {
  Preset out;
  Motion m{};
  switch (index) {
    case 0:
      out.name = "mug-orbit";
      m = {2.0, {0.3, 0.4, 0.1}, {0.07, 0.05, 0.11}, {0.0, 0.6, 1.2},
           {0.12, 0.05, 0.05}, {0.06, 0.09, 0.13}, {0.3, 0.0, 0.8}};
      out.world.objects = {object_at(0, "mug", {0.0, 0.0, 0.9}, 0.4)};
      break;
    case 1:
      out.name = "table-pair";
      m = {2.5, {0.5, 0.3, 0.15}, {0.05, 0.08, 0.1}, {0.4, 0.0, 0.3},
           {0.1, 0.06, 0.04}, {0.07, 0.05, 0.12}, {0.0, 1.0, 0.2}};
      out.world.objects = {object_at(0, "box", {0.0, -0.3, 0.8}, 0.2),
                           object_at(1, "can", {0.2, 0.35, 0.85}, -0.7)};
      break;
    case 2:
      out.name = "shelf-triple";
      m = {3.0, {0.6, 0.5, 0.2}, {0.04, 0.06, 0.09}, {1.0, 0.2, 0.0},
           {0.15, 0.05, 0.06}, {0.05, 0.1, 0.08}, {0.5, 0.3, 0.0}};
      out.world.objects = {object_at(0, "drill", {0.0, 0.0, 1.1}, 1.0),
                           object_at(1, "bowl", {0.3, -0.5, 0.9}, 0.0, 0.2),
                           object_at(2, "clamp", {-0.2, 0.5, 1.2}, -1.2)};
      break;
    case 3:
      out.name = "close-sweep";
      m = {1.5, {0.2, 0.5, 0.1}, {0.1, 0.06, 0.15}, {0.0, 0.0, 0.5},
           {0.2, 0.08, 0.05}, {0.08, 0.12, 0.1}, {1.5, 0.0, 0.0}};
      out.world.objects = {object_at(0, "mug", {0.0, 0.1, 0.95}, -0.3),
                           object_at(1, "banana", {0.1, -0.25, 0.9}, 0.9)};
      break;
    case 4:
      out.name = "far-drift";
      m = {4.0, {0.8, 0.6, 0.2}, {0.03, 0.05, 0.07}, {0.2, 0.9, 0.0},
           {0.1, 0.04, 0.04}, {0.04, 0.07, 0.09}, {0.0, 0.0, 1.0}};
      out.world.objects = {object_at(0, "cracker", {0.0, 0.0, 1.0}, 0.1),
                           object_at(1, "sugar", {0.2, 0.6, 0.9}, 2.0),
                           object_at(2, "soup", {-0.3, -0.6, 1.1}, -2.2),
                           object_at(3, "mustard", {0.4, 0.0, 0.7}, 0.6)};
      break;
    case 5:
      out.name = "fast-weave";
      m = {2.2, {0.3, 0.4, 0.15}, {0.15, 0.12, 0.2}, {0.0, 0.4, 0.9},
           {0.15, 0.08, 0.08}, {0.15, 0.2, 0.18}, {0.7, 0.2, 0.4}};
      out.world.objects = {object_at(0, "pitcher", {0.0, 0.0, 0.9}, 0.8),
                           object_at(1, "bleach", {0.1, 0.4, 1.0}, -0.4)};
      break;
    case 6:
      out.name = "low-pass";
      m = {2.8, {0.4, 0.6, 0.3}, {0.06, 0.04, 0.08}, {0.3, 0.0, 1.6},
           {0.12, 0.1, 0.05}, {0.05, 0.07, 0.11}, {0.0, 0.5, 0.0}};
      out.world.objects = {object_at(0, "scissors", {0.0, 0.0, 0.7}, 0.0, 0.0, 0.3),
                           object_at(1, "marker", {0.2, -0.4, 0.75}, 1.4),
                           object_at(2, "brick", {-0.2, 0.4, 0.65}, -0.9)};
      break;
    case 7:
      out.name = "wide-arc";
      m = {3.5, {0.5, 0.9, 0.2}, {0.05, 0.035, 0.1}, {0.0, 0.0, 0.0},
           {0.18, 0.05, 0.05}, {0.035, 0.08, 0.1}, {0.0, 0.7, 0.3}};
      out.world.objects = {object_at(0, "gelatin", {0.0, 0.0, 1.0}, 0.3),
                           object_at(1, "meat", {0.0, 0.7, 1.0}, -0.3),
                           object_at(2, "tuna", {0.0, -0.7, 1.0}, 1.8)};
      break;
    case 8:
      out.name = "tilted-bob";
      m = {2.0, {0.25, 0.3, 0.25}, {0.09, 0.07, 0.13}, {0.5, 1.1, 0.0},
           {0.1, 0.15, 0.12}, {0.06, 0.1, 0.14}, {0.2, 0.0, 0.6}};
      out.world.objects = {object_at(0, "wood", {0.0, 0.0, 1.0}, 0.5, 0.3, 0.1),
                           object_at(1, "foam", {0.15, -0.3, 1.1}, -1.0)};
      break;
    case 9:
      out.name = "cluster-five";
      m = {3.2, {0.6, 0.5, 0.2}, {0.045, 0.055, 0.095}, {0.8, 0.3, 0.0},
           {0.14, 0.06, 0.06}, {0.055, 0.085, 0.075}, {0.1, 0.6, 0.2}};
      out.world.objects = {object_at(0, "mug", {0.0, 0.0, 1.0}, 0.0),
                           object_at(1, "bowl", {0.3, 0.3, 0.9}, 1.1),
                           object_at(2, "can", {-0.3, -0.3, 1.1}, -1.1),
                           object_at(3, "box", {0.4, -0.5, 0.8}, 2.5),
                           object_at(4, "drill", {-0.2, 0.5, 1.2}, -2.5)};
      break;
    default:
      throw std::invalid_argument("preset index " + std::to_string(index) + " outside [0, " +
                                  std::to_string(kPresetCount - 1) + "]");
  }
  out.trajectory = trajectory_of(m);
  return out;
}

}  // namespace objrel
