#pragma once

#include <Eigen/Dense>
#include <string>

#include "tdbem/assembly.hpp"

namespace tdbem {

/// Built-in excitation of one experiment driver. exact_density is set when
/// the experiment has a known closed-form density (used for L^2 errors).
struct RhsPreset {
  std::string name;
  SpaceTimeFn f;
  SpaceTimeFn exact_density;  // empty when unknown
  Eigen::Vector3d k_f = Eigen::Vector3d::Zero();
  double omega_f = 0.0;
  bool has_exact = false;
};

/// Presets:
///   example1: f = sin(2t)^5 (spatially constant), exact density
///             10 cos(2t) sin(2t)^4
///   example2: f = exp(-25/t^2) cos(w t - k.x), k = (1.5, 3, 8.5)
///   example3: f = exp(-4/t^2)  cos(w t - k.x), k = (2, 2, 2)
///   example4: f = exp(-25/t^2) cos(w t - k.x), k = (8.5, 3, 0.5)
/// The exponential gates are defined as 0 at t <= 0 (removable limit).
/// k may be overridden; w always equals |k|_2.
RhsPreset make_rhs_preset(const std::string& name, const Eigen::Vector3d* k_override = nullptr);

}  // namespace tdbem
