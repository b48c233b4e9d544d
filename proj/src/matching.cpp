#include "objrel/matching.hpp"

#include <limits>
#include <stdexcept>

namespace objrel {

Pose project_measurement(const FullState& state, const PoseMeasurement& meas) {
  const Mat3 r_wi = rot_of(state.core.q_wi);
  const Mat3 r_ic = rot_of(state.extr.q_ic);
  Pose out;
  out.p = state.core.p_wi + r_wi * (state.extr.p_ic + r_ic * meas.p_co);
  out.q = quat_mul(quat_mul(state.core.q_wi, state.extr.q_ic), meas.q_co);
  return out;
}

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows == 0 || cols == 0) return std::vector<int>(static_cast<std::size_t>(rows), -1);
  if (rows > cols) {
    const std::vector<int> t = hungarian(cost.transpose());
    std::vector<int> out(static_cast<std::size_t>(rows), -1);
    for (int c = 0; c < cols; ++c) {
      if (t[static_cast<std::size_t>(c)] >= 0) out[static_cast<std::size_t>(t[static_cast<std::size_t>(c)])] = c;
    }
    return out;
  }

  // Shortest augmenting path with row/column potentials, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(rows + 1), 0.0);
  std::vector<double> v(static_cast<std::size_t>(cols + 1), 0.0);
  std::vector<int> owner(static_cast<std::size_t>(cols + 1), 0);  // column -> row
  std::vector<int> way(static_cast<std::size_t>(cols + 1), 0);
  for (int i = 1; i <= rows; ++i) {
    owner[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(cols + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(cols + 1), false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = owner[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (used[sj]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[sj];
        if (cur < minv[sj]) {
          minv[sj] = cur;
          way[sj] = j0;
        }
        if (minv[sj] < delta) {
          delta = minv[sj];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (used[sj]) {
          u[static_cast<std::size_t>(owner[sj])] += delta;
          v[sj] -= delta;
        } else {
          minv[sj] -= delta;
        }
      }
      j0 = j1;
    } while (owner[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      owner[static_cast<std::size_t>(j0)] = owner[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> out(static_cast<std::size_t>(rows), -1);
  for (int j = 1; j <= cols; ++j) {
    const int r = owner[static_cast<std::size_t>(j)];
    if (r > 0) out[static_cast<std::size_t>(r - 1)] = j - 1;
  }
  return out;
}

MatchResult match(const std::vector<ProjectedObject>& projected, const std::vector<ObjectState>& estimated,
                  const MatchGates& gates) {
  MatchResult result;
  const std::size_t m = projected.size();
  const std::size_t n = estimated.size();
  std::vector<bool> object_used(n, false);
  if (m > 0 && n > 0) {
    // Infeasible pairs get a cost that dominates any feasible assignment.
    const double infeasible = 1e6 * (1.0 + gates.gate) * static_cast<double>(m + n);
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const ObjectState& o = estimated[j];
        double c = infeasible;
        if (projected[i].object_class == o.object_class) {
          const double dp = (projected[i].pose.p - o.p_wo).norm();
          const double dr = geodesic_distance(projected[i].pose.q, o.q_wo);
          const double combined = gates.weight_position * dp + gates.weight_rotation * dr;
          if (combined <= gates.gate) c = combined;
        }
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
      }
    }
    const std::vector<int> assignment = hungarian(cost);
    for (std::size_t i = 0; i < m; ++i) {
      const int j = assignment[i];
      if (j >= 0 && cost(static_cast<Eigen::Index>(i), j) < infeasible) {
        result.pairs.emplace_back(i, static_cast<std::size_t>(j));
        object_used[static_cast<std::size_t>(j)] = true;
      } else {
        result.unmatched_measurements.push_back(i);
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) result.unmatched_measurements.push_back(i);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!object_used[j]) result.unmatched_objects.push_back(j);
  }
  return result;
}

ObjectInitialization object_initialization(const FullState& state, const PoseMeasurement& meas, int id) {
  const Pose proj = project_measurement(state, meas);
  const Mat3 r_wi = rot_of(state.core.q_wi);
  const Mat3 r_ic = rot_of(state.extr.q_ic);
  const Mat3 r_co = rot_of(meas.q_co);
  const Vec3 lever = state.extr.p_ic + r_ic * meas.p_co;

  ObjectInitialization init;
  init.object.id = id;
  init.object.object_class = meas.object_class;
  init.object.p_wo = proj.p;
  init.object.q_wo = proj.q;

  init.jacobian = Eigen::MatrixXd::Zero(6, state.error_dim());
  init.jacobian.block<3, 3>(0, idx::kP) = Mat3::Identity();
  init.jacobian.block<3, 3>(0, idx::kTheta) = -r_wi * skew(lever);
  init.jacobian.block<3, 3>(0, idx::kPosIC) = r_wi;
  init.jacobian.block<3, 3>(0, idx::kThetaIC) = -r_wi * r_ic * skew(meas.p_co);
  init.jacobian.block<3, 3>(3, idx::kTheta) = (r_ic * r_co).transpose();
  init.jacobian.block<3, 3>(3, idx::kThetaIC) = r_co.transpose();

  const Mat3 r_wc = r_wi * r_ic;
  init.noise = Mat6::Zero();
  init.noise.topLeftCorner<3, 3>() = r_wc * meas.var_p.asDiagonal() * r_wc.transpose();
  init.noise.bottomRightCorner<3, 3>() = meas.var_theta.asDiagonal();
  return init;
}

void initialize_object(FullState& state, ErrorCovariance& cov, const PoseMeasurement& meas, int id) {
  ObjectInitialization init = object_initialization(state, meas, id);
  add_object(state, cov, std::move(init.object), init.noise, init.jacobian);
}

}  // namespace objrel
