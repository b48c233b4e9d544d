#include "objrel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace objrel {

namespace {

void require_ticks(const RunRecord& run, const char* what) {
  if (run.ticks.empty()) throw std::invalid_argument(std::string(what) + ": empty run");
}

}  // namespace

Vec3 position_error(const RunTick& tick) { return tick.estimate.p - tick.truth.p; }

Vec3 rotation_error(const RunTick& tick) {
  return log_so3(rot_of(tick.estimate.q).transpose() * rot_of(tick.truth.q));
}

double rmse_position(const RunRecord& run) {
  require_ticks(run, "rmse_position");
  double sum = 0.0;
  for (const RunTick& t : run.ticks) sum += position_error(t).squaredNorm();
  return std::sqrt(sum / static_cast<double>(run.ticks.size()));
}

double rmse_orientation(const RunRecord& run) {
  require_ticks(run, "rmse_orientation");
  double sum = 0.0;
  for (const RunTick& t : run.ticks) sum += rotation_error(t).squaredNorm();
  return std::sqrt(sum / static_cast<double>(run.ticks.size())) * 180.0 / std::numbers::pi;
}

double max_position_error(const RunRecord& run) {
  require_ticks(run, "max_position_error");
  double worst = 0.0;
  for (const RunTick& t : run.ticks) worst = std::max(worst, position_error(t).norm());
  return worst;
}

AneesResult anees(const std::vector<Vec3>& errors, const std::vector<Mat3>& covariances) {
  if (errors.size() != covariances.size()) {
    throw std::invalid_argument("anees: error and covariance counts differ");
  }
  AneesResult out;
  double sum = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const Eigen::LLT<Mat3> llt(covariances[i]);
    if (llt.info() != Eigen::Success || !errors[i].allFinite()) {
      ++out.skipped;
      continue;
    }
    sum += errors[i].dot(llt.solve(errors[i])) / 3.0;
    ++out.used;
  }
  out.value = out.used > 0 ? sum / static_cast<double>(out.used) : 0.0;
  return out;
}

AneesResult anees_position(const RunRecord& run) {
  std::vector<Vec3> e;
  std::vector<Mat3> p;
  for (const RunTick& t : run.ticks) {
    e.push_back(position_error(t));
    p.push_back(t.cov_position);
  }
  return anees(e, p);
}

AneesResult anees_orientation(const RunRecord& run) {
  std::vector<Vec3> e;
  std::vector<Mat3> p;
  for (const RunTick& t : run.ticks) {
    e.push_back(rotation_error(t));
    p.push_back(t.cov_theta);
  }
  return anees(e, p);
}

}  // namespace objrel
