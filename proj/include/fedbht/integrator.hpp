#pragma once

#include <functional>
#include <limits>
#include <string>

#include "fedbht/conduction.hpp"
#include "fedbht/deformation.hpp"

namespace fedbht {

struct DirichletRegion {
  std::string name;
  std::vector<Index> nodes;
  double temperature = 37.0;
};

/// Concentrated heat flow applied to every node of the set while
/// on_time <= t < off_time.
struct FluxRegion {
  std::string name;
  std::vector<Index> nodes;
  double watts_per_node = 0.0;
  bool metabolic = false;
  double on_time = -std::numeric_limits<double>::infinity();
  double off_time = std::numeric_limits<double>::infinity();

  bool active_at(double time, double dt) const;
};

/// Concentrated film h A (T - T_sink) per node.
struct FilmRegion {
  std::string name;
  std::vector<Index> nodes;
  double coefficient = 0.0;  // W/(m^2 K)
  double area = 1.0;         // m^2 per node
  double sink_temperature = 37.0;
};

struct BoundaryConditions {
  std::vector<DirichletRegion> dirichlet;
  std::vector<FluxRegion> fluxes;
  std::vector<FilmRegion> films;

  /// Throws BoundaryConflictError when a node is both fixed and flux-loaded,
  /// Error on out-of-range nodes.
  void validate(Index node_count) const;
};

/// Nodal quantities of the lumped explicit system.
struct ThermalState {
  VectorX temperature;
  VectorX lumped_mass;       // J/K
  VectorX perfusion_diag;    // W/K
  VectorX perfusion_source;  // W
  VectorX metabolic;         // W
  VectorX external_heat;     // W

  std::vector<Index> dirichlet_nodes;  // sorted, unique
  VectorX dirichlet_values;            // aligned with dirichlet_nodes
  std::vector<unsigned char> fixed;    // per node flag

  Index node_count() const { return temperature.size(); }
};

/// Row-sum lumping: each element's rho c V is split equally among its nodes,
/// with rho and c evaluated at the element mean of `temperatures`.
VectorX lumped_thermal_mass(const Mesh& mesh, const ElementPrecomp& precomp, const MaterialModel& material,
                            const VectorX& temperatures);

/// Element volume split equally among nodes.
VectorX lumped_nodal_volume(const Mesh& mesh, const ElementPrecomp& precomp);

ThermalState build_thermal_state(const Mesh& mesh, const ElementPrecomp& precomp, const MaterialModel& material,
                                 const PerfusionParams& perfusion, const BoundaryConditions& bc,
                                 const VectorX& initial_temperature);

/// Recomputes metabolic and external heat vectors for the sources active at `time`.
void apply_sources(ThermalState& state, const Mesh& mesh, const ElementPrecomp& precomp,
                   const PerfusionParams& perfusion, const BoundaryConditions& bc, double time, double dt);

/// Forward-Euler nodal update
///   T_i += dt / C_i (-f_i - Kb_i T_i + Gb_i + Q_i + H_i)
/// for free nodes, then resets fixed nodes. `conduction_loads` is K T.
/// Throws DivergenceError (state untouched) if any result is non-finite.
void step(ThermalState& state, const VectorX& conduction_loads, double dt, Index step_index = 0);

/// Piecewise-linear scale applied to the provider's displacements; an empty
/// ramp means scale 1 at all times.
struct DeformationRamp {
  std::vector<std::pair<double, double>> keyframes;  // (time, scale)
  double operator()(double time) const;
};

struct Schedule {
  double dt = 1e-3;
  double total_time = 1.0;
  std::vector<double> snapshot_times;
  DeformationRamp ramp;
  bool update_thermal_mass = false;
  Index probe_interval = 1;

  Index step_count() const;
  /// Step index whose end time is nearest to `time`.
  Index step_of(double time) const;
};

struct Snapshot {
  double time = 0.0;
  VectorX temperature;
  std::vector<Vec3> displacements;
};

struct PhaseTimings {
  double deformation_ms = 0.0;  // displacement interpolation
  double conduction_ms = 0.0;   // element loads
  double update_ms = 0.0;       // mass update, sources, nodal update
  double output_ms = 0.0;
  double total_ms = 0.0;
  Index steps = 0;

  double thermal_ms() const { return conduction_ms + update_ms; }
};

struct RunRecord {
  std::vector<Snapshot> snapshots;
  std::vector<Index> probe_nodes;
  std::vector<double> probe_times;
  std::vector<std::vector<double>> probe_values;  // [time][probe]
  PhaseTimings timings;
  ThermalState final_state;
};

struct RunInputs {
  const Mesh& mesh;
  const ElementPrecomp& precomp;
  const MaterialModel& material;
  const PerfusionParams& perfusion;
  const BoundaryConditions& bc;
  const DeformationProvider& provider;
};

struct RunOptions {
  FormulationVariant variant = FormulationVariant::DeformedAnisoTempDep;
  double reference_temperature = 37.0;
  std::vector<Index> probe_nodes;
  /// Called for each snapshot as soon as it is produced. On divergence it is
  /// called once more with the last finite state before the error propagates.
  std::function<void(const Snapshot&)> on_snapshot;
};

DeformationState scaled_displacements(const DeformationProvider& provider, const DeformationRamp& ramp, double time,
                                      const Mesh& mesh);

/// Time loop: displacements -> conduction loads -> nodal update -> events
/// and output. Throws DivergenceError on non-finite temperatures.
RunRecord run(const RunInputs& inputs, const Schedule& schedule, const VectorX& initial_temperature,
              const RunOptions& options);

}  // namespace fedbht
