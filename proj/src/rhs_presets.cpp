#include "tdbem/rhs_presets.hpp"

#include <cmath>
#include <stdexcept>

namespace tdbem {

namespace {

double gate(double t, double a) {
  // exp(-a/t^2), continued by 0 through t = 0
  return t > 0.0 ? std::exp(-a / (t * t)) : 0.0;
}

RhsPreset plane_wave_preset(const std::string& name, double gate_a, Eigen::Vector3d k) {
  RhsPreset p;
  p.name = name;
  p.k_f = k;
  p.omega_f = k.norm();
  const double w = p.omega_f;
  p.f = [gate_a, k, w](double t, const Eigen::Vector3d& x) {
    return gate(t, gate_a) * std::cos(w * t - k.dot(x));
  };
  return p;
}

}  // namespace

RhsPreset make_rhs_preset(const std::string& name, const Eigen::Vector3d* k_override) {
  if (name == "example1") {
    RhsPreset p;
    p.name = name;
    p.f = [](double t, const Eigen::Vector3d&) { return std::pow(std::sin(2.0 * t), 5); };
    p.exact_density = [](double t, const Eigen::Vector3d&) {
      double s = std::sin(2.0 * t);
      return 10.0 * std::cos(2.0 * t) * s * s * s * s;
    };
    p.has_exact = true;
    return p;
  }
  Eigen::Vector3d k;
  double a = 0.0;
  if (name == "example2") {
    k = Eigen::Vector3d(1.5, 3.0, 8.5);
    a = 25.0;
  } else if (name == "example3") {
    k = Eigen::Vector3d(2.0, 2.0, 2.0);
    a = 4.0;
  } else if (name == "example4") {
    k = Eigen::Vector3d(8.5, 3.0, 0.5);
    a = 25.0;
  } else {
    throw std::invalid_argument("make_rhs_preset: unknown preset '" + name + "'");
  }
  if (k_override) k = *k_override;
  return plane_wave_preset(name, a, k);
}

}  // namespace tdbem
