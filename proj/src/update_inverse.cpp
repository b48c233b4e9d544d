#include "objrel/update_inverse.hpp"

#include <stdexcept>

namespace objrel {

namespace {

InvertedMeasurement invert_pose(double t, const std::string& cls, const Vec3& p, const UnitQuaternion& q,
                                const Mat3& cov_p, const Mat3& cov_theta) {
  InvertedMeasurement out;
  out.t = t;
  out.object_class = cls;
  const Mat3 r = rot_of(q);
  out.p = inverse_position(p, r);
  out.q = quat_conj(q);
  const Mat3 r_inv = r.transpose();
  out.cov_p = r_inv * cov_p * r_inv.transpose();
  out.cov_theta = r_inv * cov_theta * r_inv.transpose();
  return out;
}

}  // namespace

InvertedMeasurement invert_measurement(const PoseMeasurement& meas) {
  return invert_pose(meas.t, meas.object_class, meas.p_co, meas.q_co, meas.var_p.asDiagonal(),
                     meas.var_theta.asDiagonal());
}

InvertedMeasurement invert_measurement(const InvertedMeasurement& meas) {
  return invert_pose(meas.t, meas.object_class, meas.p, meas.q, meas.cov_p, meas.cov_theta);
}

Pose predict_inverse(const FullState& state, std::size_t obj) {
  const ObjectState& o = state.objects.at(obj);
  const Mat3 r_wi = rot_of(state.core.q_wi);
  const Mat3 r_wo = rot_of(o.q_wo);
  Pose pred;
  pred.p = r_wo.transpose() * (state.core.p_wi + r_wi * state.extr.p_ic - o.p_wo);
  pred.q = quat_mul(quat_mul(quat_conj(o.q_wo), state.core.q_wi), state.extr.q_ic);
  return pred;
}

Vec3 inverse_residual_position(const FullState& state, std::size_t obj, const InvertedMeasurement& meas) {
  return meas.p - predict_inverse(state, obj).p;
}

Vec3 inverse_residual_rotation(const FullState& state, std::size_t obj, const InvertedMeasurement& meas) {
  return small_angle_residual(quat_mul(quat_conj(predict_inverse(state, obj).q), meas.q));
}

MeasurementJacobians inverse_jacobians(const FullState& state, std::size_t obj) {
  const int n = state.error_dim();
  const ObjectState& o = state.objects.at(obj);
  const Mat3 r_wi = rot_of(state.core.q_wi);
  const Mat3 r_ic = rot_of(state.extr.q_ic);
  const Mat3 r_wo = rot_of(o.q_wo);
  const Vec3& p_ic = state.extr.p_ic;
  const int po = idx::object_pos(obj);

  MeasurementJacobians j{RowBlock::Zero(3, n), RowBlock::Zero(3, n)};

  // h_p = R_WO^T (p_WI + R_WI p_IC - p_WO)
  j.h_p.block<3, 3>(0, idx::kP) = r_wo.transpose();
  j.h_p.block<3, 3>(0, idx::kTheta) = -r_wo.transpose() * r_wi * skew(p_ic);
  j.h_p.block<3, 3>(0, idx::kPosIC) = r_wo.transpose() * r_wi;
  j.h_p.block<3, 3>(0, po) = -r_wo.transpose();
  j.h_p.block<3, 3>(0, po + 3) =
      dR_transpose_vector(Mat3::Identity(), r_wo, state.core.p_wi + r_wi * p_ic - o.p_wo);

  // h_R = R_WO^T R_WI R_IC
  j.h_r.block<3, 3>(0, idx::kTheta) = r_ic.transpose();
  j.h_r.block<3, 3>(0, idx::kThetaIC) = Mat3::Identity();
  j.h_r.block<3, 3>(0, po + 3) = dR_transpose_sandwich(Mat3::Identity(), r_wo, r_wi * r_ic);
  return j;
}

StackedUpdate build_stacked_inverse(const FullState& state, const std::vector<MatchedMeasurement>& matches,
                                    const std::vector<GatingDecision>& decisions) {
  if (matches.size() != decisions.size()) {
    throw std::invalid_argument("build_stacked_inverse: one gating decision per match required");
  }
  StackedUpdate out;
  for (std::size_t k = 0; k < matches.size(); ++k) {
    const Verdict v = decisions[k].verdict;
    if (v == Verdict::RejectPosition || v == Verdict::RejectRotation) {
      throw std::invalid_argument("inverse measurement does not support partial rejection");
    }
    if (v == Verdict::RejectAll) continue;
    const std::size_t obj = matches[k].object_index;
    const InvertedMeasurement inv = invert_measurement(matches[k].meas);
    Vec3 z_r;
    try {
      z_r = inverse_residual_rotation(state, obj, inv);
    } catch (const DegenerateResidual&) {
      continue;
    }
    const MeasurementJacobians j = inverse_jacobians(state, obj);
    append_rows(out, inverse_residual_position(state, obj, inv), j.h_p, inv.cov_p);
    append_rows(out, z_r, j.h_r, inv.cov_theta);
  }
  return out;
}

UpdateOutcome inverse_update(FullState& state, ErrorCovariance& cov, const std::vector<MatchedMeasurement>& matches,
                             const std::vector<GatingDecision>& decisions, AnchorMode mode) {
  StackedUpdate stacked = build_stacked_inverse(state, matches, decisions);
  if (stacked.empty()) {
    return {false, 0.0, "all measurements rejected"};
  }
  return anchored_update(state, cov, std::move(stacked), mode);
}

}  // namespace objrel
