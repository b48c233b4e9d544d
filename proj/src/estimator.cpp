#include "objrel/estimator.hpp"

#include <stdexcept>

namespace objrel {

std::string_view to_string(FilterKind k) { return k == FilterKind::Direct ? "direct" : "inverse"; }

FilterKind parse_filter_kind(std::string_view name) {
  if (name == "direct") return FilterKind::Direct;
  if (name == "inverse") return FilterKind::Inverse;
  throw std::invalid_argument("unknown filter '" + std::string(name) + "' (direct|inverse)");
}

void validate(const FilterConfig& cfg) {
  validate(cfg.gating);
  if (cfg.kind == FilterKind::Inverse && is_partial(cfg.gating.method)) {
    throw std::invalid_argument("inverse filter supports only full-measurement gating (none|chi2|aor)");
  }
  if (!(cfg.match.gate > 0.0) || cfg.match.weight_position < 0.0 || cfg.match.weight_rotation < 0.0) {
    throw std::invalid_argument("matching gate must be positive and weights non-negative");
  }
}

Estimator::Estimator(FilterConfig cfg, FullState initial, ErrorCovariance cov)
    : cfg_(std::move(cfg)), state_(std::move(initial)), cov_(std::move(cov)) {
  validate(cfg_);
  if (cov_.dim() != state_.error_dim()) {
    throw std::invalid_argument("Estimator: covariance dimension does not match state");
  }
  for (const ObjectState& o : state_.objects) next_object_id_ = std::max(next_object_id_, o.id + 1);
}

void Estimator::process_imu(const ImuSample& sample) {
  if (!last_imu_) {
    last_imu_ = sample;
    return;
  }
  const double dt = sample.t - last_imu_->t;
  if (!(dt > 0.0)) {
    throw std::invalid_argument("Estimator: non-monotone IMU timestamp " + std::to_string(sample.t));
  }
  propagate(state_, cov_, midpoint(*last_imu_, sample), dt, cfg_.imu);
  last_imu_ = sample;
}

GatingDecision Estimator::gate(const MatchedMeasurement& mm) const {
  const GatingConfig& g = cfg_.gating;
  switch (g.method) {
    case GatingMethod::None: return {};
    case GatingMethod::Aor: return aor(mm.meas, g);
    case GatingMethod::Aorp: return aorp(mm.meas, g);
    case GatingMethod::Chi2:
    case GatingMethod::Chi2Partial: break;
  }

  const std::size_t obj = mm.object_index;
  bool degenerate = false;
  MeasurementJacobians j;
  Vec3 z_p, z_r = Vec3::Zero();
  Mat3 s_p, s_r;
  if (cfg_.kind == FilterKind::Direct) {
    j = jacobians(state_, obj);
    z_p = residual_position(state_, obj, mm.meas);
    try {
      z_r = residual_rotation(state_, obj, mm.meas);
    } catch (const DegenerateResidual&) {
      degenerate = true;
    }
    s_p = mm.meas.var_p.asDiagonal();
    s_r = mm.meas.var_theta.asDiagonal();
  } else {
    const InvertedMeasurement inv = invert_measurement(mm.meas);
    j = inverse_jacobians(state_, obj);
    z_p = inverse_residual_position(state_, obj, inv);
    try {
      z_r = inverse_residual_rotation(state_, obj, inv);
    } catch (const DegenerateResidual&) {
      degenerate = true;
    }
    s_p = inv.cov_p;
    s_r = inv.cov_theta;
  }
  Eigen::MatrixXd h_p = j.h_p;
  Eigen::MatrixXd h_r = j.h_r;
  if (cfg_.anchor == AnchorMode::ZeroJacobian && !state_.objects.empty()) {
    const ErrorMask mask = anchor_mask(state_);
    zero_columns(h_p, mask);
    zero_columns(h_r, mask);
  }
  const double alpha = g.alpha;

  if (g.method == GatingMethod::Chi2Partial) {
    GatingDecision d = chi2_partial(z_p, z_r, h_p, h_r, cov_.matrix(), s_p, s_r, alpha);
    if (degenerate) {
      d.verdict = compose(!d.keeps_position(), true);
      d.diagnostic = "degenerate rotation residual";
    }
    return d;
  }
  if (degenerate) {
    return {Verdict::RejectAll, 0.0, GatingMethod::Chi2, "degenerate rotation residual"};
  }
  Eigen::VectorXd z(6);
  z << z_p, z_r;
  Eigen::MatrixXd h(6, h_p.cols());
  h << h_p, h_r;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(6, 6);
  sigma.topLeftCorner<3, 3>() = s_p;
  sigma.bottomRightCorner<3, 3>() = s_r;
  return chi2_full(z, h, cov_.matrix(), sigma, alpha);
}

ImageReport Estimator::process_image(const std::vector<PoseMeasurement>& measurements) {
  ImageReport report;
  report.measurements = measurements.size();
  if (measurements.empty()) return report;
  for (const PoseMeasurement& m : measurements) validate(m);

  std::vector<ProjectedObject> projected;
  projected.reserve(measurements.size());
  for (const PoseMeasurement& m : measurements) {
    projected.push_back({project_measurement(state_, m), m.object_class});
  }
  const MatchResult assoc = match(projected, state_.objects, cfg_.match);

  std::vector<MatchedMeasurement> matched;
  matched.reserve(assoc.pairs.size());
  for (const auto& [mi, oi] : assoc.pairs) matched.push_back({oi, measurements[mi]});
  report.matched = matched.size();

  if (!matched.empty()) {
    report.decisions.reserve(matched.size());
    for (const MatchedMeasurement& mm : matched) report.decisions.push_back(gate(mm));
    StackedUpdate stacked = cfg_.kind == FilterKind::Direct ? build_stacked(state_, matched, report.decisions)
                                                            : build_stacked_inverse(state_, matched, report.decisions);
    report.rows = stacked.rows();
    if (!stacked.empty()) {
      report.outcome = anchored_update(state_, cov_, std::move(stacked), cfg_.anchor);
    } else {
      report.outcome.diagnostic = "all rows rejected";
    }
  }

  for (std::size_t mi : assoc.unmatched_measurements) {
    initialize_object(state_, cov_, measurements[mi], next_object_id_++);
    ++report.initialized;
  }
  return report;
}

}  // namespace objrel
