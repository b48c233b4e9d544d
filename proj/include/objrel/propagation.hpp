#pragma once

/// \file propagation.hpp
/// IMU strapdown propagation of the nominal state and error covariance.

#include "objrel/state.hpp"

namespace objrel {

struct ImuSample {
  double t = 0.0;
  Vec3 acc = Vec3::Zero();   // specific force in I, m/s^2
  Vec3 gyro = Vec3::Zero();  // angular rate in I, rad/s
};

/// Continuous-time noise densities.
struct ImuNoise {
  double sigma_acc = 2e-3;        // m/s^2/sqrt(Hz)
  double sigma_gyro = 2e-4;       // rad/s/sqrt(Hz)
  double sigma_bias_acc = 3e-4;   // m/s^3/sqrt(Hz)
  double sigma_bias_gyro = 2e-5;  // rad/s^2/sqrt(Hz)
  Vec3 gravity{0.0, 0.0, 9.81};   // W z-axis up
};

inline constexpr double kMaxPropagationStep = 0.1;

/// Integrates the state from state.t to state.t + dt holding the sample's
/// acceleration and rate constant over the step, then P <- F P F^T + Q_d.
///
/// Throws std::invalid_argument when dt is outside (0, 0.1] s or the sample
/// time lies before state.t.
void propagate(FullState& state, ErrorCovariance& cov, const ImuSample& sample, double dt,
               const ImuNoise& noise);

/// Midpoint of two consecutive samples, used to drive one step between them.
ImuSample midpoint(const ImuSample& a, const ImuSample& b);

}  // namespace objrel
