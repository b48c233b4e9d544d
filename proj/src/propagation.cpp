#include "objrel/propagation.hpp"

#include <cmath>
#include <stdexcept>

namespace objrel {

namespace {

using Mat15 = Eigen::Matrix<double, idx::kDynamicDim, idx::kDynamicDim>;

constexpr double kTimeSlack = 1e-9;

}  // namespace

void propagate(FullState& state, ErrorCovariance& cov, const ImuSample& sample, double dt,
               const ImuNoise& noise) {
  if (!(dt > 0.0) || dt > kMaxPropagationStep) {
    throw std::invalid_argument("propagate: dt = " + std::to_string(dt) + " outside (0, 0.1] s");
  }
  if (sample.t < state.t - kTimeSlack) {
    throw std::invalid_argument("propagate: non-monotone timestamp (sample " + std::to_string(sample.t) +
                                " before state " + std::to_string(state.t) + ")");
  }
  if (cov.dim() != state.error_dim()) {
    throw std::invalid_argument("propagate: covariance dimension does not match state");
  }

  CoreState& c = state.core;
  const Vec3 omega = sample.gyro - c.b_w;
  const Vec3 acc = sample.acc - c.b_a;
  const Mat3 r0 = rot_of(c.q_wi);
  const Mat3 step_rot = exp_so3(omega * dt);

  // Specific force rotated at the midpoint attitude of the step.
  const Vec3 acc_w = r0 * exp_so3(0.5 * dt * omega) * acc - noise.gravity;
  const Vec3 v1 = c.v_wi + acc_w * dt;
  c.p_wi += 0.5 * (c.v_wi + v1) * dt;
  c.v_wi = v1;
  c.q_wi = quat_mul(c.q_wi, quat_exp(omega * dt));
  state.t += dt;

  // First-order error-state transition of the 15 dynamic states.
  Mat15 f = Mat15::Identity();
  f.block<3, 3>(idx::kP, idx::kV) = Mat3::Identity() * dt;
  f.block<3, 3>(idx::kV, idx::kTheta) = -r0 * skew(acc) * dt;
  f.block<3, 3>(idx::kV, idx::kBiasAcc) = -r0 * dt;
  f.block<3, 3>(idx::kTheta, idx::kTheta) = step_rot.transpose();
  f.block<3, 3>(idx::kTheta, idx::kBiasGyro) = -Mat3::Identity() * dt;

  Eigen::MatrixXd& p = cov.matrix();
  const int n = cov.dim();
  constexpr int d = idx::kDynamicDim;
  const Mat15 pdd = p.topLeftCorner<d, d>();
  p.topLeftCorner<d, d>() = f * pdd * f.transpose();
  if (n > d) {
    const Eigen::MatrixXd cross = f * p.topRightCorner(d, n - d);
    p.topRightCorner(d, n - d) = cross;
    p.bottomLeftCorner(n - d, d) = cross.transpose();
  }

  const double qa = noise.sigma_acc * noise.sigma_acc * dt;
  const double qg = noise.sigma_gyro * noise.sigma_gyro * dt;
  const double qbg = noise.sigma_bias_gyro * noise.sigma_bias_gyro * dt;
  const double qba = noise.sigma_bias_acc * noise.sigma_bias_acc * dt;
  for (int i = 0; i < 3; ++i) {
    p(idx::kV + i, idx::kV + i) += qa;
    p(idx::kTheta + i, idx::kTheta + i) += qg;
    p(idx::kBiasGyro + i, idx::kBiasGyro + i) += qbg;
    p(idx::kBiasAcc + i, idx::kBiasAcc + i) += qba;
  }
  auto block = p.topLeftCorner<d, d>();
  block = 0.5 * (block + block.transpose()).eval();
}

ImuSample midpoint(const ImuSample& a, const ImuSample& b) {
  return {0.5 * (a.t + b.t), 0.5 * (a.acc + b.acc), 0.5 * (a.gyro + b.gyro)};
}

}  // namespace objrel
