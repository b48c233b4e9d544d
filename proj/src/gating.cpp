#include "objrel/gating.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

#include <Eigen/Cholesky>
#include <boost/math/special_functions/gamma.hpp>

namespace objrel {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::AcceptAll: return "accept";
    case Verdict::RejectAll: return "reject_all";
    case Verdict::RejectPosition: return "reject_position";
    case Verdict::RejectRotation: return "reject_rotation";
  }
  return "?";
}

std::string_view to_string(GatingMethod m) {
  switch (m) {
    case GatingMethod::None: return "none";
    case GatingMethod::Chi2: return "chi2";
    case GatingMethod::Chi2Partial: return "chi2p";
    case GatingMethod::Aor: return "aor";
    case GatingMethod::Aorp: return "aorp";
  }
  return "?";
}

GatingMethod parse_gating_method(std::string_view name) {
  for (GatingMethod m : {GatingMethod::None, GatingMethod::Chi2, GatingMethod::Chi2Partial, GatingMethod::Aor,
                         GatingMethod::Aorp}) {
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown gating method '" + std::string(name) + "' (none|chi2|chi2p|aor|aorp)");
}

void validate(const GatingConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw std::invalid_argument("gating: alpha must lie in (0, 1)");
  }
  for (double t : {cfg.aor_pos, cfg.aor_rot, cfg.aorp_pos, cfg.aorp_rot}) {
    if (!(t > 0.0)) throw std::invalid_argument("gating: thresholds must be positive");
  }
}

double regularized_gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(a, x);
}

double chi2_quantile(int dof, double p) {
  if (dof < 1 || !(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("chi2_quantile: need dof >= 1 and p in (0, 1)");
  }
  static std::mutex mutex;
  static std::map<std::pair<int, double>, double> memo;
  {
    std::lock_guard lock(mutex);
    if (auto it = memo.find({dof, p}); it != memo.end()) return it->second;
  }
  const double k = 0.5 * dof;
  auto cdf = [k](double x) { return regularized_gamma_p(k, 0.5 * x); };
  double lo = 0.0;
  double hi = static_cast<double>(dof);
  while (cdf(hi) < p) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  const double q = 0.5 * (lo + hi);
  std::lock_guard lock(mutex);
  memo.emplace(std::make_pair(dof, p), q);
  return q;
}

Verdict compose(bool reject_position, bool reject_rotation) {
  if (reject_position && reject_rotation) return Verdict::RejectAll;
  if (reject_position) return Verdict::RejectPosition;
  if (reject_rotation) return Verdict::RejectRotation;
  return Verdict::AcceptAll;
}

namespace {

// Returns d^2, or nullopt-like negative when S is not positive definite.
double mahalanobis(const Eigen::VectorXd& z, const Eigen::MatrixXd& s) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || (ldlt.vectorD().array() <= 0.0).any()) {
    return -1.0;
  }
  return z.dot(ldlt.solve(z));
}

}  // namespace

GatingDecision chi2_full(const Eigen::VectorXd& z, const Eigen::MatrixXd& h, const Eigen::MatrixXd& p,
                         const Eigen::MatrixXd& sigma, double alpha) {
  if (h.rows() != z.size() || h.cols() != p.rows() || sigma.rows() != z.size()) {
    throw std::invalid_argument("chi2_full: dimension mismatch");
  }
  GatingDecision d;
  d.method = GatingMethod::Chi2;
  const Eigen::MatrixXd s = h * p * h.transpose() + sigma;
  const double d2 = mahalanobis(z, s);
  if (d2 < 0.0 || !std::isfinite(d2)) {
    d.verdict = Verdict::RejectAll;
    d.diagnostic = "singular innovation covariance";
    return d;
  }
  d.statistic = d2;
  d.verdict = d2 <= chi2_quantile(static_cast<int>(z.size()), 1.0 - alpha) ? Verdict::AcceptAll : Verdict::RejectAll;
  return d;
}

GatingDecision chi2_partial(const Eigen::Vector3d& z_p, const Eigen::Vector3d& z_r, const Eigen::MatrixXd& h_p,
                            const Eigen::MatrixXd& h_r, const Eigen::MatrixXd& p, const Eigen::Matrix3d& sigma_p,
                            const Eigen::Matrix3d& sigma_r, double alpha) {
  if (h_p.rows() != 3 || h_r.rows() != 3 || h_p.cols() != p.rows() || h_r.cols() != p.rows()) {
    throw std::invalid_argument("chi2_partial: dimension mismatch");
  }
  GatingDecision d;
  d.method = GatingMethod::Chi2Partial;
  const double crit = chi2_quantile(3, 1.0 - alpha);
  const double d2_p = mahalanobis(z_p, h_p * p * h_p.transpose() + sigma_p);
  const double d2_r = mahalanobis(z_r, h_r * p * h_r.transpose() + sigma_r);
  const bool bad_p = d2_p < 0.0 || !std::isfinite(d2_p);
  const bool bad_r = d2_r < 0.0 || !std::isfinite(d2_r);
  if (bad_p || bad_r) d.diagnostic = "singular innovation covariance";
  d.statistic = std::max(bad_p ? 0.0 : d2_p, bad_r ? 0.0 : d2_r);
  d.verdict = compose(bad_p || d2_p > crit, bad_r || d2_r > crit);
  return d;
}

GatingDecision aor(const PoseMeasurement& meas, const GatingConfig& cfg) {
  const double sp = std::sqrt(meas.var_p.maxCoeff());
  const double sr = std::sqrt(meas.var_theta.maxCoeff());
  GatingDecision d;
  d.method = GatingMethod::Aor;
  d.statistic = std::max(sp / cfg.aor_pos, sr / cfg.aor_rot);
  d.verdict = (sp > cfg.aor_pos || sr > cfg.aor_rot) ? Verdict::RejectAll : Verdict::AcceptAll;
  return d;
}

GatingDecision aorp(const PoseMeasurement& meas, const GatingConfig& cfg) {
  const double sp = std::sqrt(meas.var_p.maxCoeff());
  const double sr = std::sqrt(meas.var_theta.maxCoeff());
  GatingDecision d;
  d.method = GatingMethod::Aorp;
  d.statistic = std::max(sp / cfg.aorp_pos, sr / cfg.aorp_rot);
  d.verdict = compose(sp > cfg.aorp_pos, sr > cfg.aorp_rot);
  return d;
}

}  // namespace objrel
