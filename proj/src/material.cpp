#include "fedbht/material.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace fedbht {

PropertyTable::PropertyTable(double constant) : points_{{0.0, constant}} {}

PropertyTable::PropertyTable(std::vector<Breakpoint> breakpoints) : points_(std::move(breakpoints)) {
  if (points_.empty()) throw Error("property table needs at least one breakpoint");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].first) || !std::isfinite(points_[i].second))
      throw Error("property table has a non-finite breakpoint");
    if (i > 0 && !(points_[i].first > points_[i - 1].first))
      throw Error("property table temperatures must be strictly increasing");
  }
}

double PropertyTable::operator()(double temperature) const {
  if (points_.size() == 1) return points_.front().second;
  // Segment [i-1, i] containing T, clamped to the terminal segments.
  auto it = std::upper_bound(points_.begin(), points_.end(), temperature,
                             [](double t, const Breakpoint& p) { return t < p.first; });
  std::size_t i = static_cast<std::size_t>(it - points_.begin());
  i = std::clamp<std::size_t>(i, 1, points_.size() - 1);
  const auto& [t0, v0] = points_[i - 1];
  const auto& [t1, v1] = points_[i];
  if (temperature == t1) return v1;
  return v0 + (v1 - v0) * ((temperature - t0) / (t1 - t0));
}

double MaterialModel::scalar_conductivity(double temperature) const {
  const auto* iso = std::get_if<IsotropicConductivity>(&conductivity);
  if (!iso) throw Error("scalar conductivity requested from an anisotropic material");
  return iso->k(temperature);
}

namespace {

Mat3 tensor_from(const AnisotropicConductivity& aniso, double temperature) {
  const auto& c = aniso.components;
  const double xx = c[0](temperature), yy = c[1](temperature), zz = c[2](temperature);
  const double xy = c[3](temperature), xz = c[4](temperature), yz = c[5](temperature);
  Mat3 d;
  d << xx, xy, xz,
       xy, yy, yz,
       xz, yz, zz;
  return d;
}

// Sylvester's criterion on the leading principal minors.
bool positive_definite(const Mat3& d) {
  const double m1 = d(0, 0);
  const double m2 = d(0, 0) * d(1, 1) - d(0, 1) * d(1, 0);
  return m1 > 0 && m2 > 0 && d.determinant() > 0;
}

}  // namespace

Mat3 conductivity_matrix(const MaterialModel& model, double temperature) {
  if (const auto* iso = std::get_if<IsotropicConductivity>(&model.conductivity)) {
    const double k = iso->k(temperature);
    if (!(k > 0)) throw NotSpdError("isotropic conductivity " + std::to_string(k) + " is not positive");
    return k * Mat3::Identity();
  }
  const Mat3 d = tensor_from(std::get<AnisotropicConductivity>(model.conductivity), temperature);
  if (!positive_definite(d))
    throw NotSpdError("conductivity tensor is not positive definite at " + std::to_string(temperature) + " C");
  return d;
}

void MaterialModel::validate() const {
  std::set<double> probes{kOperatingMinC, kOperatingMaxC};
  auto add = [&](const PropertyTable& t) {
    for (const auto& [temp, value] : t.breakpoints()) {
      (void)value;
      if (temp > kOperatingMinC && temp < kOperatingMaxC) probes.insert(temp);
    }
  };
  add(density);
  add(specific_heat);
  if (const auto* iso = std::get_if<IsotropicConductivity>(&conductivity)) {
    add(iso->k);
  } else {
    for (const auto& c : std::get<AnisotropicConductivity>(conductivity).components) add(c);
  }
  // Piecewise-linear functions attain their extremes at probe points.
  for (double t : probes) {
    if (!(density(t) > 0)) throw Error("density is not positive at " + std::to_string(t) + " C");
    if (!(specific_heat(t) > 0)) throw Error("specific heat is not positive at " + std::to_string(t) + " C");
    conductivity_matrix(*this, t);
  }
}

void PerfusionParams::validate() const {
  if (!(blood_perfusion >= 0)) throw Error("blood perfusion rate must be non-negative");
  if (!(blood_specific_heat > 0)) throw Error("blood specific heat must be positive");
  if (!(metabolic_rate >= 0)) throw Error("metabolic heat generation must be non-negative");
  if (!std::isfinite(arterial_temperature)) throw Error("arterial temperature must be finite");
}

}  // namespace fedbht
