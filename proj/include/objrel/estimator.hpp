#pragma once

/// \file estimator.hpp
/// Object-relative EKF driver: IMU propagation, per-image association,
/// gating, simultaneous multi-object update and object initialization.

#include <optional>
#include <string_view>
#include <vector>

#include "objrel/gating.hpp"
#include "objrel/matching.hpp"
#include "objrel/propagation.hpp"
#include "objrel/update_direct.hpp"
#include "objrel/update_inverse.hpp"

namespace objrel {

enum class FilterKind { Direct, Inverse };

std::string_view to_string(FilterKind k);
/// Accepts direct, inverse. Throws std::invalid_argument.
FilterKind parse_filter_kind(std::string_view name);

struct FilterConfig {
  FilterKind kind = FilterKind::Direct;
  GatingConfig gating;
  MatchGates match;
  ImuNoise imu;
  AnchorMode anchor = AnchorMode::Consider;
};

/// Throws std::invalid_argument for inconsistent settings, e.g. partial
/// gating on the inverse filter.
void validate(const FilterConfig& cfg);

struct ImageReport {
  std::size_t measurements = 0;
  std::size_t matched = 0;
  std::size_t initialized = 0;
  int rows = 0;
  std::vector<GatingDecision> decisions;  // one per matched measurement
  UpdateOutcome outcome;
};

class Estimator {
 public:
  Estimator(FilterConfig cfg, FullState initial, ErrorCovariance cov);

  /// Propagates from the previous sample to this one using their midpoint.
  /// The first sample only primes the integrator. Throws
  /// std::invalid_argument on non-increasing timestamps.
  void process_imu(const ImuSample& sample);

  /// Associates, gates and fuses all measurements of one image taken at the
  /// current filter time, then initializes unmatched objects.
  ImageReport process_image(const std::vector<PoseMeasurement>& measurements);

  const FullState& state() const { return state_; }
  const ErrorCovariance& covariance() const { return cov_; }
  const FilterConfig& config() const { return cfg_; }

 private:
  GatingDecision gate(const MatchedMeasurement& mm) const;

  FilterConfig cfg_;
  FullState state_;
  ErrorCovariance cov_;
  std::optional<ImuSample> last_imu_;
  int next_object_id_ = 0;
};

}  // namespace objrel
