#include "objrel/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

#include "objrel/rng.hpp"

namespace objrel {

namespace {

constexpr double kTimeSlack = 1e-9;
constexpr const char* kReplayHeader = "# objrel-replay";
constexpr const char* kReplayFooter = "# end";

// ---------------------------------------------------------------- config

std::string line_of(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.line >= 0 ? "line " + std::to_string(m.line + 1) + ": " : "";
}

class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap()) throw ConfigError(line_of(node_) + "'" + display() + "' must be a mapping");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return static_cast<bool>(node_[key]);
  }

  YAML::Node require(const std::string& key) {
    if (!has(key)) throw ConfigError("missing required field '" + field(key) + "'");
    return node_[key];
  }

  template <typename T>
  T as(const std::string& key, const YAML::Node& n) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(line_of(n) + "field '" + field(key) + "' has the wrong type");
    }
  }

  template <typename T>
  T get(const std::string& key) {
    return as<T>(key, require(key));
  }

  template <typename T>
  void optional(const std::string& key, T& out) {
    if (has(key)) out = as<T>(key, node_[key]);
  }

  /// Scalar or 3-element sequence.
  void optional_vec3(const std::string& key, Vec3& out) {
    if (has(key)) out = vec3(key, node_[key]);
  }

  Vec3 required_vec3(const std::string& key) { return vec3(key, require(key)); }

  Section child(const std::string& key) { return Section(node_[key], field(key)); }

  void reject_unknown() const {
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(line_of(kv.first) + "unknown field '" + field(key) + "'");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  Vec3 vec3(const std::string& key, const YAML::Node& n) const {
    if (n.IsScalar()) return Vec3::Constant(as<double>(key, n));
    const auto v = as<std::vector<double>>(key, n);
    if (v.size() != 3) throw ConfigError(line_of(n) + "field '" + field(key) + "' needs 1 or 3 values");
    return {v[0], v[1], v[2]};
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

AnchorMode parse_anchor_mode(const std::string& s, const std::string& where) {
  if (s == "consider") return AnchorMode::Consider;
  if (s == "zero") return AnchorMode::ZeroJacobian;
  throw ConfigError(where + "unknown anchor mode '" + s + "' (consider|zero)");
}

template <typename Fn>
auto wrap(const YAML::Node& n, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(line_of(n) + e.what());
  }
}

// ---------------------------------------------------------------- text IO

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_fixed(double v, int digits = 3) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void put(std::ostream& os, const Vec3& v) { os << ',' << fmt(v.x()) << ',' << fmt(v.y()) << ',' << fmt(v.z()); }

void put(std::ostream& os, const UnitQuaternion& q) {
  os << ',' << fmt(q.x()) << ',' << fmt(q.y()) << ',' << fmt(q.z()) << ',' << fmt(q.w());
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  return out;
}

class FieldCursor {
 public:
  FieldCursor(const std::vector<std::string>& f, std::size_t line) : f_(f), line_(line), i_(2) {}

  double num() {
    if (i_ >= f_.size()) fail("too few fields");
    const std::string& s = f_[i_++];
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') fail("bad number '" + s + "'");
    return v;
  }
  Vec3 vec() {
    const double x = num(), y = num(), z = num();
    return {x, y, z};
  }
  UnitQuaternion quat() {
    const double x = num(), y = num(), z = num(), w = num();
    try {
      return UnitQuaternion::from_canonical(x, y, z, w);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  std::string text() {
    if (i_ >= f_.size()) fail("too few fields");
    return f_[i_++];
  }
  void done() const {
    if (i_ != f_.size()) fail("unexpected trailing fields");
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw ReplayError("replay line " + std::to_string(line_) + ": " + why);
  }

 private:
  const std::vector<std::string>& f_;
  std::size_t line_;
  std::size_t i_;
};

// Visits the streams in processing order: each IMU sample, then images and
// truth stamped at or before it.
template <typename OnImu, typename OnFrame, typename OnTruth>
bool walk(const RunInputs& in, OnImu&& on_imu, OnFrame&& on_frame, OnTruth&& on_truth) {
  std::size_t f = 0, g = 0;
  for (const ImuSample& s : in.imu) {
    if (!on_imu(s)) return false;
    while (f < in.frames.size() && in.frames[f].t <= s.t + kTimeSlack) {
      if (!on_frame(in.frames[f++])) return false;
    }
    while (g < in.truth.size() && in.truth[g].t <= s.t + kTimeSlack) {
      if (!on_truth(in.truth[g++])) return false;
    }
  }
  return true;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

CellStats aggregate(const std::vector<RunSummary>& runs) {
  CellStats c;
  c.runs = runs.size();
  std::vector<double> rmse, rot, anees, anees_rot;
  for (const RunSummary& r : runs) {
    if (r.diverged) {
      ++c.diverged;
      continue;
    }
    rmse.push_back(r.rmse_position);
    rot.push_back(r.rmse_orientation);
    anees.push_back(r.anees_position);
    anees_rot.push_back(r.anees_orientation);
  }
  c.mean_rmse = mean(rmse);
  c.std_rmse = stddev(rmse);
  c.mean_rmse_orientation = mean(rot);
  c.mean_anees_position = mean(anees);
  c.mean_anees_orientation = mean(anees_rot);
  return c;
}

std::vector<RunSummary> run_many(const std::vector<Scenario>& cells, int runs, unsigned threads) {
  const std::size_t total = cells.size() * static_cast<std::size_t>(runs);
  std::vector<RunSummary> out(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const Scenario& sc = cells[i / static_cast<std::size_t>(runs)];
      const std::uint64_t seed = sweep_run_seed(sc.seed, i % static_cast<std::size_t>(runs));
      const RunInputs in = simulate(sc, seed);
      out[i] = summarize(run_filter(in, sc.filter, sc.divergence_bound));
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return out;
}

std::string cell_text(const CellStats& c) {
  if (c.runs > 0 && c.diverged == c.runs) return "diverged";
  std::string s = fmt_fixed(c.mean_rmse) + " ± " + fmt_fixed(c.std_rmse);
  if (c.diverged > 0) s += " (" + std::to_string(c.diverged) + " div)";
  return s;
}

}  // namespace

// ---------------------------------------------------------------- scenario

Scenario default_scenario() {
  Scenario s;
  s.filter.match.gate = 10.0;
  return s;
}

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) throw ConfigError("missing required field 'schema_version'");
  Section top(root, "");
  Scenario s = default_scenario();

  const YAML::Node ver = top.require("schema_version");
  if (top.as<int>("schema_version", ver) != kSchemaVersion) {
    throw ConfigError(line_of(ver) + "unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  const YAML::Node pre = top.require("preset");
  s.preset = top.as<int>("preset", pre);
  if (s.preset < 0 || s.preset >= kPresetCount) {
    throw ConfigError(line_of(pre) + "field 'preset' must lie in [0, " + std::to_string(kPresetCount - 1) + "]");
  }
  s.duration = top.get<double>("duration");
  if (!(s.duration > 0.0)) throw ConfigError("field 'duration' must be positive");
  top.optional("seed", s.seed);
  top.optional("initial_error", s.initial_error);
  top.optional("divergence_bound", s.divergence_bound);
  top.optional("runs", s.runs);
  if (s.runs < 1) throw ConfigError("field 'runs' must be at least 1");

  {
    if (!top.has("filter")) throw ConfigError("missing required field 'filter.kind'");
    Section f = top.child("filter");
    const YAML::Node kind = f.require("kind");
    s.filter.kind = wrap(kind, [&] { return parse_filter_kind(f.as<std::string>("kind", kind)); });
    if (f.has("gating")) {
      const YAML::Node g = root["filter"]["gating"];
      s.filter.gating.method = wrap(g, [&] { return parse_gating_method(f.as<std::string>("gating", g)); });
    }
    f.optional("alpha", s.filter.gating.alpha);
    if (f.has("anchor")) {
      const YAML::Node a = root["filter"]["anchor"];
      s.filter.anchor = parse_anchor_mode(f.as<std::string>("anchor", a), line_of(a));
    }
    if (f.has("aor")) {
      const auto v = f.as<std::vector<double>>("aor", root["filter"]["aor"]);
      if (v.size() != 2) throw ConfigError("field 'filter.aor' needs [position, rotation]");
      s.filter.gating.aor_pos = v[0];
      s.filter.gating.aor_rot = v[1];
    }
    if (f.has("aorp")) {
      const auto v = f.as<std::vector<double>>("aorp", root["filter"]["aorp"]);
      if (v.size() != 2) throw ConfigError("field 'filter.aorp' needs [position, rotation]");
      s.filter.gating.aorp_pos = v[0];
      s.filter.gating.aorp_rot = v[1];
    }
    f.optional("match_gate", s.filter.match.gate);
    if (f.has("match_weights")) {
      const auto v = f.as<std::vector<double>>("match_weights", root["filter"]["match_weights"]);
      if (v.size() != 2) throw ConfigError("field 'filter.match_weights' needs [position, rotation]");
      s.filter.match.weight_position = v[0];
      s.filter.match.weight_rotation = v[1];
    }
    f.reject_unknown();
  }

  {
    if (!top.has("measurement")) throw ConfigError("missing required field 'measurement.sigma_p'");
    Section m = top.child("measurement");
    SensorSpec& sn = s.sensor;
    sn.sigma_p = m.required_vec3("sigma_p");
    sn.sigma_theta = m.required_vec3("sigma_theta");
    if (m.has("mode")) {
      const YAML::Node n = root["measurement"]["mode"];
      sn.mode = wrap(n, [&] { return parse_reporting_mode(m.as<std::string>("mode", n)); });
    }
    m.optional("min_reported_sigma", sn.min_reported_sigma);
    m.optional("imu_rate", sn.imu_rate);
    m.optional("camera_rate", sn.camera_rate);
    m.optional("fov_deg", sn.fov_deg);
    m.optional("max_range", sn.max_range);
    if (m.has("episodes")) {
      const YAML::Node eps = root["measurement"]["episodes"];
      const auto v = m.as<std::vector<std::vector<double>>>("episodes", eps);
      for (const auto& e : v) {
        if (e.size() != 3) throw ConfigError(line_of(eps) + "field 'measurement.episodes' needs [start, end, factor] entries");
        sn.episodes.push_back({e[0], e[1], e[2]});
      }
    }
    m.reject_unknown();
  }

  if (top.has("imu")) {
    Section m = top.child("imu");
    m.optional("perfect", s.imu.perfect);
    m.optional("sigma_acc", s.imu.noise.sigma_acc);
    m.optional("sigma_gyro", s.imu.noise.sigma_gyro);
    m.optional("sigma_bias_acc", s.imu.noise.sigma_bias_acc);
    m.optional("sigma_bias_gyro", s.imu.noise.sigma_bias_gyro);
    m.reject_unknown();
  }

  if (top.has("initial")) {
    Section m = top.child("initial");
    m.optional("sigma_p", s.init.sigma_p);
    m.optional("sigma_v", s.init.sigma_v);
    m.optional("sigma_theta", s.init.sigma_theta);
    m.optional("sigma_bias_gyro", s.init.sigma_bias_gyro);
    m.optional("sigma_bias_acc", s.init.sigma_bias_acc);
    m.reject_unknown();
  }

  if (top.has("sweep")) {
    Section m = top.child("sweep");
    m.optional("sigma_p", s.sweep_sigma_p);
    m.optional("sigma_theta", s.sweep_sigma_theta);
    m.reject_unknown();
    if (s.sweep_sigma_p.empty() || s.sweep_sigma_theta.empty()) throw ConfigError("sweep grid must not be empty");
  }
  top.reject_unknown();

  s.imu.rate = s.sensor.imu_rate;
  s.filter.imu = s.imu.noise;
  try {
    validate(s.sensor);
    validate(s.filter);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// ---------------------------------------------------------------- runs

RunInputs simulate(const Scenario& scenario, std::uint64_t seed) {
  Preset pr = preset(scenario.preset);
  TrajectorySpec traj = pr.trajectory;
  traj.duration = scenario.duration;
  const Extrinsics extr = default_extrinsics();

  ImuSimSpec imu = scenario.imu;
  imu.rate = scenario.sensor.imu_rate;
  imu.initial_bias_acc = scenario.init.sigma_bias_acc;
  imu.initial_bias_gyro = scenario.init.sigma_bias_gyro;
  ImuStream stream = gen_imu(traj, imu, seed);
  const std::vector<CameraFrame> frames = gen_measurements(traj, pr.world, scenario.sensor, extr, seed);

  RunInputs in;
  const TrajectoryPoint t0 = evaluate(traj, 0.0);
  in.initial.t = 0.0;
  in.initial.core.p_wi = t0.p;
  in.initial.core.v_wi = t0.v;
  in.initial.core.q_wi = t0.q;
  in.initial.extr = extr;
  const ErrorCovariance p0 = initial_covariance(scenario.init);
  in.prior_variances = p0.matrix().diagonal();
  if (scenario.initial_error) {
    CounterRng rng(make_key({seed, static_cast<std::uint64_t>(Stream::InitialError)}));
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(idx::kCoreDim);
    for (int i = idx::kP; i < idx::kBiasGyro; ++i) dx[i] = std::sqrt(in.prior_variances[i]) * rng.normal();
    in.initial = inject_error(in.initial, dx);
  }

  in.imu = std::move(stream.samples);
  for (const CameraFrame& f : frames) {
    const TrajectoryPoint tp = evaluate(traj, f.t);
    in.truth.push_back({f.t, Pose{tp.p, tp.q}});
    if (!f.measurements.empty()) in.frames.push_back({f.t, f.measurements});
  }
  return in;
}

RunResult run_filter(const RunInputs& inputs, const FilterConfig& filter, double divergence_bound,
                     bool keep_snapshots) {
  if (inputs.prior_variances.size() != idx::kCoreDim) {
    throw std::invalid_argument("run_filter: prior needs " + std::to_string(idx::kCoreDim) + " variances");
  }
  RunResult result;
  Estimator est(filter, inputs.initial, ErrorCovariance(inputs.prior_variances.asDiagonal().toDenseMatrix()));

  auto fail = [&](const std::string& why) {
    result.record.diverged = true;
    result.record.diagnostic = why;
    return false;
  };

  try {
    walk(
        inputs, [&](const ImuSample& s) {
          est.process_imu(s);
          return true;
        },
        [&](const ImageFrame& f) {
          const ImageReport rep = est.process_image(f.measurements);
          RunStats& st = result.stats;
          ++st.images;
          st.initialized += rep.initialized;
          if (rep.outcome.applied) {
            ++st.updates;
          } else if (rep.rows > 0) {
            ++st.skipped_updates;
          }
          for (const GatingDecision& d : rep.decisions) {
            switch (d.verdict) {
              case Verdict::AcceptAll: ++st.accepted; break;
              case Verdict::RejectAll: ++st.rejected_all; break;
              case Verdict::RejectPosition: ++st.rejected_position; break;
              case Verdict::RejectRotation: ++st.rejected_rotation; break;
            }
          }
          return true;
        },
        [&](const TruthSample& truth) {
          const FullState& x = est.state();
          const Eigen::MatrixXd& p = est.covariance().matrix();
          RunTick tick;
          tick.t = truth.t;
          tick.truth = truth.pose;
          tick.estimate = Pose{x.core.p_wi, x.core.q_wi};
          tick.cov_position = p.block<3, 3>(idx::kP, idx::kP);
          tick.cov_theta = p.block<3, 3>(idx::kTheta, idx::kTheta);
          const double err = position_error(tick).norm();
          if (!std::isfinite(err) || !p.allFinite()) return fail("non-finite estimate at t = " + fmt(truth.t));
          result.record.ticks.push_back(tick);
          if (keep_snapshots) result.snapshots.push_back(snapshot(x, est.covariance()));
          if (err > divergence_bound) return fail("position error " + fmt(err) + " m at t = " + fmt(truth.t));
          return true;
        });
  } catch (const std::exception& e) {
    fail(std::string("estimator failure: ") + e.what());
  }
  return result;
}

// ---------------------------------------------------------------- replay

void write_replay(std::ostream& os, const RunInputs& in) {
  std::size_t records = 0;
  os << kReplayHeader << ' ' << kReplayVersion << '\n';
  const CoreState& c = in.initial.core;
  os << fmt(in.initial.t) << ",INIT";
  put(os, c.p_wi);
  put(os, c.v_wi);
  put(os, c.q_wi);
  put(os, c.b_w);
  put(os, c.b_a);
  put(os, in.initial.extr.p_ic);
  put(os, in.initial.extr.q_ic);
  for (Eigen::Index i = 0; i < in.prior_variances.size(); ++i) os << ',' << fmt(in.prior_variances[i]);
  os << '\n';
  ++records;
  walk(
      in, [&](const ImuSample& s) {
        os << fmt(s.t) << ",IMU";
        put(os, s.acc);
        put(os, s.gyro);
        os << '\n';
        ++records;
        return true;
      },
      [&](const ImageFrame& f) {
        for (const PoseMeasurement& m : f.measurements) {
          if (m.object_class.find_first_of(",\n\r") != std::string::npos || m.object_class.empty()) {
            throw ReplayError("object class '" + m.object_class + "' cannot be serialized");
          }
          os << fmt(f.t) << ",MEAS," << m.object_class;
          put(os, m.p_co);
          put(os, m.q_co);
          put(os, m.var_p);
          put(os, m.var_theta);
          os << '\n';
          ++records;
        }
        return true;
      },
      [&](const TruthSample& t) {
        os << fmt(t.t) << ",TRUTH";
        put(os, t.pose.p);
        put(os, t.pose.q);
        os << '\n';
        ++records;
        return true;
      });
  os << kReplayFooter << ' ' << records << '\n';
}

RunInputs read_replay(std::istream& is) {
  RunInputs in;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ReplayError("replay: empty log");
  ++lineno;
  {
    std::istringstream hs(line);
    std::string hash, tag;
    int version = -1;
    hs >> hash >> tag >> version;
    if (hash + " " + tag != kReplayHeader) throw ReplayError("replay: missing '# objrel-replay' header");
    if (version != kReplayVersion) {
      throw ReplayError("replay: version " + std::to_string(version) + " not supported (expected " +
                        std::to_string(kReplayVersion) + ")");
    }
  }

  bool have_init = false;
  bool ended = false;
  std::size_t records = 0;
  double last_t = -std::numeric_limits<double>::infinity();
  double last_imu = -std::numeric_limits<double>::infinity();
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (ended) throw ReplayError("replay line " + std::to_string(lineno) + ": data after end marker");
    if (line[0] == '#') {
      std::istringstream fs(line);
      std::string hash, tag;
      std::size_t n = 0;
      fs >> hash >> tag >> n;
      if (hash + " " + tag != kReplayFooter || !fs) {
        throw ReplayError("replay line " + std::to_string(lineno) + ": unexpected comment");
      }
      if (n != records) {
        throw ReplayError("replay: end marker counts " + std::to_string(n) + " records, found " +
                          std::to_string(records));
      }
      ended = true;
      continue;
    }
    const std::vector<std::string> f = split(line);
    FieldCursor cur(f, lineno);
    if (f.size() < 2) cur.fail("expected 't,KIND,...'");
    char* end = nullptr;
    const double t = std::strtod(f[0].c_str(), &end);
    if (f[0].empty() || *end != '\0' || !std::isfinite(t)) cur.fail("bad timestamp '" + f[0] + "'");
    const std::string& kind = f[1];
    if (t < last_t - kTimeSlack) cur.fail("non-monotone timestamp " + f[0]);
    last_t = t;
    ++records;

    if (kind == "INIT") {
      if (have_init || records != 1) cur.fail("INIT must be the first and only initial record");
      in.initial.t = t;
      in.initial.core.p_wi = cur.vec();
      in.initial.core.v_wi = cur.vec();
      in.initial.core.q_wi = cur.quat();
      in.initial.core.b_w = cur.vec();
      in.initial.core.b_a = cur.vec();
      in.initial.extr.p_ic = cur.vec();
      in.initial.extr.q_ic = cur.quat();
      in.prior_variances.resize(idx::kCoreDim);
      for (int i = 0; i < idx::kCoreDim; ++i) in.prior_variances[i] = cur.num();
      cur.done();
      have_init = true;
      continue;
    }
    if (!have_init) cur.fail("record before INIT");
    if (kind == "IMU") {
      if (!(t > last_imu)) cur.fail("non-monotone IMU timestamp " + f[0]);
      last_imu = t;
      ImuSample s;
      s.t = t;
      s.acc = cur.vec();
      s.gyro = cur.vec();
      cur.done();
      in.imu.push_back(s);
    } else if (kind == "MEAS") {
      PoseMeasurement m;
      m.t = t;
      m.object_class = cur.text();
      m.p_co = cur.vec();
      m.q_co = cur.quat();
      m.var_p = cur.vec();
      m.var_theta = cur.vec();
      cur.done();
      if (in.frames.empty() || in.frames.back().t != t) in.frames.push_back({t, {}});
      in.frames.back().measurements.push_back(std::move(m));
    } else if (kind == "TRUTH") {
      TruthSample s;
      s.t = t;
      s.pose.p = cur.vec();
      s.pose.q = cur.quat();
      cur.done();
      in.truth.push_back(s);
    } else {
      cur.fail("unknown record kind '" + kind + "'");
    }
  }
  if (!ended) throw ReplayError("replay: truncated log (no end marker)");
  if (!have_init) throw ReplayError("replay: no INIT record");
  return in;
}

// ---------------------------------------------------------------- reports

RunSummary summarize(const RunResult& result) {
  RunSummary s;
  s.diverged = result.record.diverged;
  s.ticks = result.record.ticks.size();
  if (s.ticks == 0) return s;
  s.rmse_position = rmse_position(result.record);
  s.rmse_orientation = rmse_orientation(result.record);
  s.max_position_error = max_position_error(result.record);
  s.anees_position = anees_position(result.record).value;
  s.anees_orientation = anees_orientation(result.record).value;
  return s;
}

void write_ticks_csv(std::ostream& os, const RunRecord& record) {
  os << "t,px,py,pz,qx,qy,qz,qw,est_px,est_py,est_pz,est_qx,est_qy,est_qz,est_qw,"
        "sd_px,sd_py,sd_pz,sd_thx,sd_thy,sd_thz,err_pos,err_rot_deg\n";
  for (const RunTick& t : record.ticks) {
    os << fmt(t.t);
    put(os, t.truth.p);
    put(os, t.truth.q);
    put(os, t.estimate.p);
    put(os, t.estimate.q);
    put(os, Vec3(t.cov_position.diagonal().cwiseSqrt()));
    put(os, Vec3(t.cov_theta.diagonal().cwiseSqrt()));
    os << ',' << fmt(position_error(t).norm()) << ',' << fmt(rotation_error(t).norm() * 180.0 / std::numbers::pi)
       << '\n';
  }
}

void write_summary_csv(std::ostream& os, const RunSummary& s, const RunStats& st) {
  os << "metric,value\n";
  os << "diverged," << (s.diverged ? 1 : 0) << '\n';
  os << "ticks," << s.ticks << '\n';
  os << "rmse_position_m," << fmt(s.rmse_position) << '\n';
  os << "rmse_orientation_deg," << fmt(s.rmse_orientation) << '\n';
  os << "max_position_error_m," << fmt(s.max_position_error) << '\n';
  os << "anees_position," << fmt(s.anees_position) << '\n';
  os << "anees_orientation," << fmt(s.anees_orientation) << '\n';
  os << "images," << st.images << '\n';
  os << "updates," << st.updates << '\n';
  os << "skipped_updates," << st.skipped_updates << '\n';
  os << "objects_initialized," << st.initialized << '\n';
  os << "accepted," << st.accepted << '\n';
  os << "rejected_all," << st.rejected_all << '\n';
  os << "rejected_position," << st.rejected_position << '\n';
  os << "rejected_rotation," << st.rejected_rotation << '\n';
}

SweepResult run_sweep(const Scenario& scenario, unsigned threads) {
  SweepResult out;
  out.sigma_p = scenario.sweep_sigma_p;
  out.sigma_theta = scenario.sweep_sigma_theta;
  std::vector<Scenario> cells;
  for (double sp : out.sigma_p) {
    for (double st : out.sigma_theta) {
      Scenario c = scenario;
      c.sensor.sigma_p = Vec3::Constant(sp);
      c.sensor.sigma_theta = Vec3::Constant(st);
      cells.push_back(std::move(c));
    }
  }
  const std::vector<RunSummary> runs = run_many(cells, scenario.runs, threads);
  const auto per = static_cast<std::size_t>(scenario.runs);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<RunSummary> slice(runs.begin() + static_cast<std::ptrdiff_t>(c * per),
                                  runs.begin() + static_cast<std::ptrdiff_t>((c + 1) * per));
    CellStats stats = aggregate(slice);
    stats.sigma_p = cells[c].sensor.sigma_p.x();
    stats.sigma_theta = cells[c].sensor.sigma_theta.x();
    out.cells.push_back(stats);
  }
  return out;
}

CellStats run_batch(const Scenario& scenario, unsigned threads) {
  CellStats stats = aggregate(run_many({scenario}, scenario.runs, threads));
  stats.sigma_p = scenario.sensor.sigma_p.x();
  stats.sigma_theta = scenario.sensor.sigma_theta.x();
  return stats;
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  os << "sigma_p\\sigma_theta";
  for (double st : sweep.sigma_theta) os << ',' << fmt_fixed(st, 4);
  os << '\n';
  for (std::size_t r = 0; r < sweep.sigma_p.size(); ++r) {
    os << fmt_fixed(sweep.sigma_p[r], 2);
    for (std::size_t c = 0; c < sweep.sigma_theta.size(); ++c) os << ',' << cell_text(sweep.at(r, c));
    os << '\n';
  }
}

void write_sweep_markdown(std::ostream& os, const SweepResult& sweep) {
  os << "| σ_p \\ σ_ϑ |";
  for (double st : sweep.sigma_theta) os << ' ' << fmt_fixed(st, 4) << " |";
  os << "\n|---|";
  for (std::size_t c = 0; c < sweep.sigma_theta.size(); ++c) os << "---|";
  os << '\n';
  for (std::size_t r = 0; r < sweep.sigma_p.size(); ++r) {
    os << "| " << fmt_fixed(sweep.sigma_p[r], 2) << " |";
    for (std::size_t c = 0; c < sweep.sigma_theta.size(); ++c) os << ' ' << cell_text(sweep.at(r, c)) << " |";
    os << '\n';
  }
}

}  // namespace objrel
