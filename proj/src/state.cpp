#include "objrel/state.hpp"

#include <stdexcept>

namespace objrel {

int FullState::find_object(int id) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int FullState::anchor_index() const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].anchor) return static_cast<int>(i);
  }
  return -1;
}

ErrorCovariance::ErrorCovariance(Eigen::MatrixXd p) : p_(std::move(p)) {
  if (p_.rows() != p_.cols()) {
    throw std::invalid_argument("ErrorCovariance: matrix must be square");
  }
}

void ErrorCovariance::symmetrize() { p_ = 0.5 * (p_ + p_.transpose()).eval(); }

double ErrorCovariance::asymmetry() const {
  if (p_.size() == 0) return 0.0;
  return (p_ - p_.transpose()).cwiseAbs().maxCoeff();
}

ErrorCovariance initial_covariance(const InitialUncertainty& init) {
  Eigen::VectorXd d(idx::kCoreDim);
  d.segment<3>(idx::kP).setConstant(init.sigma_p * init.sigma_p);
  d.segment<3>(idx::kV).setConstant(init.sigma_v * init.sigma_v);
  d.segment<3>(idx::kTheta).setConstant(init.sigma_theta * init.sigma_theta);
  d.segment<3>(idx::kBiasGyro).setConstant(init.sigma_bias_gyro * init.sigma_bias_gyro);
  d.segment<3>(idx::kBiasAcc).setConstant(init.sigma_bias_acc * init.sigma_bias_acc);
  d.segment<6>(idx::kPosIC).setConstant(init.sigma_extrinsic * init.sigma_extrinsic);
  return ErrorCovariance(d.asDiagonal().toDenseMatrix());
}

namespace {

// An exactly zero increment leaves the stored quaternion bits untouched.
UnitQuaternion rotate_right(const UnitQuaternion& q, const Vec3& dtheta) {
  if (dtheta.isZero(0.0)) return q;
  return quat_mul(q, quat_exp(dtheta));
}

}  // namespace

FullState inject_error(const FullState& state, const Eigen::VectorXd& dx) {
  if (dx.size() != state.error_dim()) {
    throw std::invalid_argument("inject_error: error vector has dimension " + std::to_string(dx.size()) +
                                ", state expects " + std::to_string(state.error_dim()));
  }
  FullState out = state;
  CoreState& c = out.core;
  c.p_wi += dx.segment<3>(idx::kP);
  c.v_wi += dx.segment<3>(idx::kV);
  c.q_wi = rotate_right(c.q_wi, dx.segment<3>(idx::kTheta));
  c.b_w += dx.segment<3>(idx::kBiasGyro);
  c.b_a += dx.segment<3>(idx::kBiasAcc);
  out.extr.p_ic += dx.segment<3>(idx::kPosIC);
  out.extr.q_ic = rotate_right(out.extr.q_ic, dx.segment<3>(idx::kThetaIC));
  for (std::size_t i = 0; i < out.objects.size(); ++i) {
    ObjectState& o = out.objects[i];
    o.p_wo += dx.segment<3>(idx::object_pos(i));
    o.q_wo = rotate_right(o.q_wo, dx.segment<3>(idx::object_theta(i)));
  }
  return out;
}

void add_object(FullState& state, ErrorCovariance& cov, ObjectState obj, const Mat6& noise_cov,
                const Eigen::MatrixXd& init_jacobian) {
  const int n = state.error_dim();
  if (cov.dim() != n) {
    throw std::invalid_argument("add_object: covariance dimension does not match state");
  }
  if (init_jacobian.rows() != 6 || init_jacobian.cols() != n) {
    throw std::invalid_argument("add_object: initialization Jacobian must be 6 x " + std::to_string(n));
  }
  if (state.find_object(obj.id) >= 0) {
    throw std::invalid_argument("add_object: duplicate object id " + std::to_string(obj.id));
  }
  obj.anchor = state.objects.empty();

  const Eigen::MatrixXd& p = cov.matrix();
  const Eigen::MatrixXd cross = init_jacobian * p;  // 6 x n
  Eigen::MatrixXd grown(n + 6, n + 6);
  grown.topLeftCorner(n, n) = p;
  grown.bottomLeftCorner(6, n) = cross;
  grown.topRightCorner(n, 6) = cross.transpose();
  grown.bottomRightCorner<6, 6>() = cross * init_jacobian.transpose() + noise_cov;
  cov = ErrorCovariance(std::move(grown));
  cov.symmetrize();
  state.objects.push_back(std::move(obj));
}

ErrorMask anchor_mask(const FullState& state) {
  const int a = state.anchor_index();
  if (a < 0) {
    throw std::logic_error("anchor_mask: no object registered");
  }
  ErrorMask mask(static_cast<std::size_t>(state.error_dim()), false);
  for (int k = 0; k < idx::kObjectDim; ++k) {
    mask[static_cast<std::size_t>(idx::object_pos(static_cast<std::size_t>(a)) + k)] = true;
  }
  return mask;
}

StateSnapshot snapshot(const FullState& state, const ErrorCovariance& cov) {
  StateSnapshot s;
  auto put = [&s](const std::string& name, double v) {
    s.names.push_back(name);
    s.values.push_back(v);
  };
  auto put3 = [&put](const std::string& name, const Vec3& v) {
    put(name + "_x", v.x());
    put(name + "_y", v.y());
    put(name + "_z", v.z());
  };
  auto putq = [&put](const std::string& name, const UnitQuaternion& q) {
    put(name + "_qx", q.x());
    put(name + "_qy", q.y());
    put(name + "_qz", q.z());
    put(name + "_qw", q.w());
  };
  put("t", state.t);
  put3("p_wi", state.core.p_wi);
  put3("v_wi", state.core.v_wi);
  putq("q_wi", state.core.q_wi);
  put3("b_w", state.core.b_w);
  put3("b_a", state.core.b_a);
  put3("p_ic", state.extr.p_ic);
  putq("q_ic", state.extr.q_ic);
  for (const ObjectState& o : state.objects) {
    const std::string tag = "obj" + std::to_string(o.id);
    put3(tag + "_p", o.p_wo);
    putq(tag + "_q", o.q_wo);
  }
  for (int i = 0; i < cov.dim(); ++i) {
    put("P" + std::to_string(i), cov.matrix()(i, i));
  }
  return s;
}

}  // namespace objrel
