#include "objrel/update_direct.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace objrel {

void validate(const PoseMeasurement& m) {
  const bool ok = m.var_p.allFinite() && m.var_theta.allFinite() && (m.var_p.array() > 0.0).all() &&
                  (m.var_theta.array() > 0.0).all() && m.p_co.allFinite();
  if (!ok) {
    throw std::invalid_argument("PoseMeasurement: variances must be positive and finite");
  }
}

Pose predict_direct(const FullState& state, std::size_t obj) {
  const ObjectState& o = state.objects.at(obj);
  const Mat3 r_wi = rot_of(state.core.q_wi);
  const Mat3 r_ic = rot_of(state.extr.q_ic);
  Pose pred;
  pred.p = r_ic.transpose() * (-state.extr.p_ic + r_wi.transpose() * (o.p_wo - state.core.p_wi));
  pred.q = quat_mul(quat_mul(quat_conj(state.extr.q_ic), quat_conj(state.core.q_wi)), o.q_wo);
  return pred;
}

Vec3 residual_position(const FullState& state, std::size_t obj, const PoseMeasurement& meas) {
  return meas.p_co - predict_direct(state, obj).p;
}

Vec3 small_angle_residual(const UnitQuaternion& residual) {
  if (residual.w() < kMinResidualQw) {
    throw DegenerateResidual("rotation residual within 1e-6 of pi");
  }
  return 2.0 * residual.vec() / residual.w();
}

Vec3 residual_rotation(const FullState& state, std::size_t obj, const PoseMeasurement& meas) {
  const UnitQuaternion pred = predict_direct(state, obj).q;
  return small_angle_residual(quat_mul(quat_conj(pred), meas.q_co));
}

MeasurementJacobians jacobians(const FullState& state, std::size_t obj) {
  const int n = state.error_dim();
  const ObjectState& o = state.objects.at(obj);
  const Mat3 r_wi = rot_of(state.core.q_wi);
  const Mat3 r_ic = rot_of(state.extr.q_ic);
  const Mat3 r_wo = rot_of(o.q_wo);
  const Vec3& p_ic = state.extr.p_ic;
  const Vec3 rel_w = o.p_wo - state.core.p_wi;
  const int po = idx::object_pos(obj);

  MeasurementJacobians j{RowBlock::Zero(3, n), RowBlock::Zero(3, n)};

  j.h_p.block<3, 3>(0, idx::kP) = -r_ic.transpose() * r_wi.transpose();
  j.h_p.block<3, 3>(0, idx::kTheta) = dR_transpose_vector(r_ic.transpose(), r_wi, rel_w);
  j.h_p.block<3, 3>(0, idx::kPosIC) = -r_ic.transpose();
  j.h_p.block<3, 3>(0, idx::kThetaIC) =
      dR_transpose_vector(Mat3::Identity(), r_ic, -p_ic + r_wi.transpose() * rel_w);
  j.h_p.block<3, 3>(0, po) = r_ic.transpose() * r_wi.transpose();

  // h_R = R_IC^T R_WI^T R_WO
  j.h_r.block<3, 3>(0, idx::kTheta) = dR_transpose_sandwich(r_ic.transpose(), r_wi, r_wo);
  j.h_r.block<3, 3>(0, idx::kThetaIC) = dR_transpose_sandwich(Mat3::Identity(), r_ic, r_wi.transpose() * r_wo);
  j.h_r.block<3, 3>(0, po + 3) = Mat3::Identity();
  return j;
}

void append_rows(StackedUpdate& stacked, const Eigen::Vector3d& residual, const RowBlock& h, const Mat3& noise) {
  const int m = stacked.rows();
  const int n = static_cast<int>(h.cols());
  if (m > 0 && stacked.h.cols() != n) {
    throw std::invalid_argument("append_rows: column count mismatch");
  }
  stacked.residual.conservativeResize(m + 3);
  stacked.residual.tail<3>() = residual;
  Eigen::MatrixXd hh(m + 3, n);
  if (m > 0) hh.topRows(m) = stacked.h;
  hh.bottomRows(3) = h;
  stacked.h = std::move(hh);
  Eigen::MatrixXd nn = Eigen::MatrixXd::Zero(m + 3, m + 3);
  if (m > 0) nn.topLeftCorner(m, m) = stacked.noise;
  nn.bottomRightCorner<3, 3>() = noise;
  stacked.noise = std::move(nn);
}

StackedUpdate build_stacked(const FullState& state, const std::vector<MatchedMeasurement>& matches,
                            const std::vector<GatingDecision>& decisions) {
  if (matches.size() != decisions.size()) {
    throw std::invalid_argument("build_stacked: one gating decision per match required");
  }
  StackedUpdate out;
  for (std::size_t k = 0; k < matches.size(); ++k) {
    const MatchedMeasurement& mm = matches[k];
    const GatingDecision& d = decisions[k];
    if (!d.keeps_position() && !d.keeps_rotation()) continue;
    const MeasurementJacobians j = jacobians(state, mm.object_index);
    if (d.keeps_position()) {
      append_rows(out, residual_position(state, mm.object_index, mm.meas), j.h_p, mm.meas.var_p.asDiagonal());
    }
    if (d.keeps_rotation()) {
      try {
        append_rows(out, residual_rotation(state, mm.object_index, mm.meas), j.h_r,
                    mm.meas.var_theta.asDiagonal());
      } catch (const DegenerateResidual&) {
        // Treated as a rejection of the rotation block.
      }
    }
  }
  return out;
}

void zero_columns(Eigen::MatrixXd& h, const ErrorMask& mask) {
  for (std::size_t c = 0; c < mask.size() && c < static_cast<std::size_t>(h.cols()); ++c) {
    if (mask[c]) h.col(static_cast<Eigen::Index>(c)).setZero();
  }
}

UpdateOutcome ekf_update(FullState& state, ErrorCovariance& cov, const StackedUpdate& stacked,
                         const ErrorMask& frozen) {
  UpdateOutcome out;
  if (stacked.empty()) {
    out.diagnostic = "empty update";
    return out;
  }
  const int n = state.error_dim();
  if (stacked.h.cols() != n || cov.dim() != n || stacked.noise.rows() != stacked.rows()) {
    throw std::invalid_argument("ekf_update: dimension mismatch");
  }
  const Eigen::MatrixXd& p = cov.matrix();
  const Eigen::MatrixXd pht = p * stacked.h.transpose();
  Eigen::MatrixXd s = stacked.h * pht + stacked.noise;
  s = 0.5 * (s + s.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  out.condition_number = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(lmin > 0.0) || out.condition_number > kMaxInnovationCondition || !std::isfinite(lmax)) {
    std::ostringstream msg;
    msg << "innovation covariance ill-conditioned (cond = " << out.condition_number << "), update skipped";
    out.diagnostic = msg.str();
    return out;
  }

  Eigen::MatrixXd k = Eigen::LLT<Eigen::MatrixXd>(s).solve(pht.transpose()).transpose();
  for (std::size_t r = 0; r < frozen.size() && r < static_cast<std::size_t>(n); ++r) {
    if (frozen[r]) k.row(static_cast<Eigen::Index>(r)).setZero();
  }

  const Eigen::VectorXd dx = k * stacked.residual;
  FullState next = inject_error(state, dx);
  // quat_mul renormalizes, so frozen poses are copied back to stay bit-exact.
  for (std::size_t i = 0; i < state.objects.size(); ++i) {
    const std::size_t base = static_cast<std::size_t>(idx::object_pos(i));
    if (base < frozen.size() && frozen[base]) {
      next.objects[i].p_wo = state.objects[i].p_wo;
      next.objects[i].q_wo = state.objects[i].q_wo;
    }
  }
  state = std::move(next);

  Eigen::MatrixXd ikh = -k * stacked.h;
  ikh.diagonal().array() += 1.0;
  Eigen::MatrixXd updated = ikh * p * ikh.transpose() + k * stacked.noise * k.transpose();
  cov.matrix() = std::move(updated);
  cov.symmetrize();
  out.applied = true;
  return out;
}

UpdateOutcome anchored_update(FullState& state, ErrorCovariance& cov, StackedUpdate stacked, AnchorMode mode) {
  ErrorMask frozen;
  if (!state.objects.empty()) {
    frozen = anchor_mask(state);
    if (mode == AnchorMode::ZeroJacobian) zero_columns(stacked.h, frozen);
  }
  return ekf_update(state, cov, stacked, frozen);
}

}  // namespace objrel
