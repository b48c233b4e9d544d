#pragma once

#include <string>

#include "objrel/geom3.hpp"

namespace objrel {

/// One object-relative pose observation (object O in camera C) with its
/// per-axis aleatoric variances. Rotation variances live in the tangent
/// space of the measured rotation (right perturbation).
struct PoseMeasurement {
  double t = 0.0;
  std::string object_class;
  Vec3 p_co = Vec3::Zero();
  UnitQuaternion q_co;
  Vec3 var_p = Vec3::Constant(1e-4);      // m^2
  Vec3 var_theta = Vec3::Constant(1e-4);  // rad^2
};

/// Throws std::invalid_argument unless all variances are positive and finite.
void validate(const PoseMeasurement& m);

}  // namespace objrel
