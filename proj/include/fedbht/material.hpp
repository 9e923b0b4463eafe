#pragma once

#include <array>
#include <utility>
#include <variant>
#include <vector>

#include "fedbht/errors.hpp"
#include "fedbht/types.hpp"

namespace fedbht {

/// Piecewise-linear property in temperature (deg C). Beyond the first and last
/// breakpoints the terminal segment is extended; one breakpoint means constant.
class PropertyTable {
 public:
  using Breakpoint = std::pair<double, double>;

  PropertyTable() : PropertyTable(0.0) {}
  explicit PropertyTable(double constant);
  explicit PropertyTable(std::vector<Breakpoint> breakpoints);

  double operator()(double temperature) const;

  const std::vector<Breakpoint>& breakpoints() const { return points_; }
  bool is_constant() const { return points_.size() == 1; }

 private:
  std::vector<Breakpoint> points_;
};

inline double evaluate(const PropertyTable& table, double temperature) { return table(temperature); }

struct IsotropicConductivity {
  PropertyTable k;
};

/// Symmetric tensor of tables, components ordered xx, yy, zz, xy, xz, yz.
struct AnisotropicConductivity {
  std::array<PropertyTable, 6> components;
};

/// Operating range over which density and specific heat must stay positive.
inline constexpr double kOperatingMinC = 0.0;
inline constexpr double kOperatingMaxC = 120.0;

struct MaterialModel {
  PropertyTable density{1060.0};
  PropertyTable specific_heat{3600.0};
  std::variant<IsotropicConductivity, AnisotropicConductivity> conductivity{IsotropicConductivity{PropertyTable(0.53)}};

  bool isotropic() const { return std::holds_alternative<IsotropicConductivity>(conductivity); }

  /// k(T) of an isotropic model; throws Error for anisotropic models.
  double scalar_conductivity(double temperature) const;

  double heat_capacity(double temperature) const { return density(temperature) * specific_heat(temperature); }

  bool capacity_depends_on_temperature() const {
    return !density.is_constant() || !specific_heat.is_constant();
  }

  /// Checks positivity of rho and c over the operating range and SPD
  /// conductivity at the range ends and at every breakpoint.
  void validate() const;
};

/// k(T) I for isotropic models, the interpolated tensor otherwise.
/// Throws NotSpdError when the tensor is not positive definite.
Mat3 conductivity_matrix(const MaterialModel& model, double temperature);

struct PerfusionParams {
  double blood_perfusion = 0.0;       // w_b, kg/(m^3 s)
  double blood_specific_heat = 3617;  // c_b, J/(kg K)
  double arterial_temperature = 37.0; // T_a, deg C
  double metabolic_rate = 0.0;        // Q_met, W/m^3

  void validate() const;
};

}  // namespace fedbht
