#pragma once

/// \file gating.hpp
/// Outlier rejection for pose measurements: chi-square innovation tests on
/// the full 6-DoF measurement or on its position and rotation blocks, and
/// thresholding of the reported aleatoric uncertainty (AOR, AORP).

#include <string>
#include <string_view>

#include <Eigen/Core>

#include "objrel/measurement.hpp"

namespace objrel {

enum class Verdict { AcceptAll, RejectAll, RejectPosition, RejectRotation };

enum class GatingMethod { None, Chi2, Chi2Partial, Aor, Aorp };

/// True for methods that may reject a single block.
constexpr bool is_partial(GatingMethod m) { return m == GatingMethod::Chi2Partial || m == GatingMethod::Aorp; }

std::string_view to_string(Verdict v);
std::string_view to_string(GatingMethod m);
/// Accepts none, chi2, chi2p, aor, aorp. Throws std::invalid_argument.
GatingMethod parse_gating_method(std::string_view name);

struct GatingDecision {
  Verdict verdict = Verdict::AcceptAll;
  /// chi-square value (max of both blocks for the partial test) or, for
  /// AOR(P), the largest ratio of reported std dev to its threshold.
  double statistic = 0.0;
  GatingMethod method = GatingMethod::None;
  std::string diagnostic;

  bool keeps_position() const { return verdict == Verdict::AcceptAll || verdict == Verdict::RejectRotation; }
  bool keeps_rotation() const { return verdict == Verdict::AcceptAll || verdict == Verdict::RejectPosition; }
};

struct GatingConfig {
  GatingMethod method = GatingMethod::None;
  double alpha = 0.05;
  double aor_pos = 0.15;    // m
  double aor_rot = 0.35;    // rad
  double aorp_pos = 0.1;    // m
  double aorp_rot = 0.175;  // rad
};

/// Throws std::invalid_argument on non-positive thresholds or alpha outside (0, 1).
void validate(const GatingConfig& cfg);

/// Regularized lower incomplete gamma P(a, x), the chi-square CDF core.
double regularized_gamma_p(double a, double x);

/// Chi-square quantile with `dof` degrees of freedom at probability `p`,
/// by bracketing and bisection on the CDF. Memoized per (dof, p).
double chi2_quantile(int dof, double p);

/// Compose block verdicts into one.
Verdict compose(bool reject_position, bool reject_rotation);

/// Full-measurement test: S = H P H^T + Sigma, d^2 = z^T S^-1 z against the
/// (1 - alpha) quantile with dim(z) degrees of freedom.
GatingDecision chi2_full(const Eigen::VectorXd& z, const Eigen::MatrixXd& h, const Eigen::MatrixXd& p,
                         const Eigen::MatrixXd& sigma, double alpha);

/// Two marginal 3-DoF tests on the position and rotation blocks.
GatingDecision chi2_partial(const Eigen::Vector3d& z_p, const Eigen::Vector3d& z_r, const Eigen::MatrixXd& h_p,
                            const Eigen::MatrixXd& h_r, const Eigen::MatrixXd& p, const Eigen::Matrix3d& sigma_p,
                            const Eigen::Matrix3d& sigma_r, double alpha);

/// Rejects the whole measurement if any reported std dev exceeds its threshold.
GatingDecision aor(const PoseMeasurement& meas, const GatingConfig& cfg);

/// Rejects the position and/or rotation block whose largest reported std
/// dev exceeds its threshold.
GatingDecision aorp(const PoseMeasurement& meas, const GatingConfig& cfg);

}  // namespace objrel
