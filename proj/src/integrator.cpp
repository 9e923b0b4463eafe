#include "fedbht/integrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <span>

#include "fedbht/parallel.hpp"

namespace fedbht {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

template <typename Fn>
void for_each_element(const Mesh& mesh, const ElementPrecomp& precomp, Fn&& fn) {
  for (std::size_t e = 0; e < mesh.tets.size(); ++e)
    fn(std::span<const Index>(mesh.tets[e]), precomp.tet_volumes[e]);
  for (std::size_t h = 0; h < mesh.hexes.size(); ++h)
    fn(std::span<const Index>(mesh.hexes[h]), precomp.hex_weight(static_cast<Index>(h)));
}

void check_nodes(const std::vector<Index>& nodes, Index node_count, const std::string& region) {
  for (Index v : nodes)
    if (v < 0 || v >= node_count)
      throw Error("region '" + region + "' references node " + std::to_string(v) + " out of range");
}

}  // namespace

bool FluxRegion::active_at(double time, double dt) const {
  const double eps = 1e-9 * dt;
  return time >= on_time - eps && time < off_time - eps;
}

void BoundaryConditions::validate(Index node_count) const {
  std::vector<unsigned char> fixed(static_cast<std::size_t>(node_count), 0);
  for (const auto& d : dirichlet) {
    check_nodes(d.nodes, node_count, d.name);
    for (Index v : d.nodes) fixed[static_cast<std::size_t>(v)] = 1;
  }
  for (const auto& f : fluxes) {
    check_nodes(f.nodes, node_count, f.name);
    for (Index v : f.nodes)
      if (fixed[static_cast<std::size_t>(v)])
        throw BoundaryConflictError("node " + std::to_string(v) + " is both fixed-temperature and loaded by flux '" +
                                    f.name + "'");
  }
  for (const auto& f : films) {
    check_nodes(f.nodes, node_count, f.name);
    if (!(f.coefficient >= 0) || !(f.area > 0)) throw Error("film '" + f.name + "' needs h >= 0 and area > 0");
  }
}

VectorX lumped_thermal_mass(const Mesh& mesh, const ElementPrecomp& precomp, const MaterialModel& material,
                            const VectorX& temperatures) {
  VectorX mass = VectorX::Zero(mesh.node_count());
  const bool constant = !material.capacity_depends_on_temperature();
  const double constant_capacity = constant ? material.heat_capacity(0.0) : 0.0;
  for_each_element(mesh, precomp, [&](std::span<const Index> conn, double volume) {
    double capacity = constant_capacity;
    if (!constant) {
      double mean = 0;
      for (Index v : conn) mean += temperatures[v];
      capacity = material.heat_capacity(mean / static_cast<double>(conn.size()));
    }
    const double share = capacity * volume / static_cast<double>(conn.size());
    for (Index v : conn) mass[v] += share;
  });
  return mass;
}

VectorX lumped_nodal_volume(const Mesh& mesh, const ElementPrecomp& precomp) {
  VectorX volume = VectorX::Zero(mesh.node_count());
  for_each_element(mesh, precomp, [&](std::span<const Index> conn, double v) {
    for (Index n : conn) volume[n] += v / static_cast<double>(conn.size());
  });
  return volume;
}

void apply_sources(ThermalState& state, const Mesh& mesh, const ElementPrecomp& precomp,
                   const PerfusionParams& perfusion, const BoundaryConditions& bc, double time, double dt) {
  const Index n = mesh.node_count();
  if (perfusion.metabolic_rate > 0) {
    state.metabolic = perfusion.metabolic_rate * lumped_nodal_volume(mesh, precomp);
  } else {
    state.metabolic = VectorX::Zero(n);
  }
  state.external_heat = VectorX::Zero(n);
  for (const auto& f : bc.fluxes) {
    if (!f.active_at(time, dt)) continue;
    VectorX& target = f.metabolic ? state.metabolic : state.external_heat;
    for (Index v : f.nodes) target[v] += f.watts_per_node;
  }
}

ThermalState build_thermal_state(const Mesh& mesh, const ElementPrecomp& precomp, const MaterialModel& material,
                                 const PerfusionParams& perfusion, const BoundaryConditions& bc,
                                 const VectorX& initial_temperature) {
  const Index n = mesh.node_count();
  if (initial_temperature.size() != n) throw Error("initial temperature size does not match node count");
  perfusion.validate();
  bc.validate(n);

  ThermalState state;
  state.temperature = initial_temperature;
  state.fixed.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> fixed_value(static_cast<std::size_t>(n), 0.0);
  for (const auto& d : bc.dirichlet)
    for (Index v : d.nodes) {
      state.fixed[static_cast<std::size_t>(v)] = 1;
      fixed_value[static_cast<std::size_t>(v)] = d.temperature;
    }
  for (Index v = 0; v < n; ++v)
    if (state.fixed[static_cast<std::size_t>(v)]) state.dirichlet_nodes.push_back(v);
  state.dirichlet_values.resize(static_cast<Index>(state.dirichlet_nodes.size()));
  for (std::size_t i = 0; i < state.dirichlet_nodes.size(); ++i) {
    const Index v = state.dirichlet_nodes[i];
    state.dirichlet_values[static_cast<Index>(i)] = fixed_value[static_cast<std::size_t>(v)];
    state.temperature[v] = fixed_value[static_cast<std::size_t>(v)];
  }

  state.lumped_mass = lumped_thermal_mass(mesh, precomp, material, state.temperature);
  const VectorX volume = lumped_nodal_volume(mesh, precomp);
  state.perfusion_diag = (perfusion.blood_perfusion * perfusion.blood_specific_heat) * volume;
  state.perfusion_source = perfusion.arterial_temperature * state.perfusion_diag;
  for (const auto& f : bc.films)
    for (Index v : f.nodes) {
      const double ha = f.coefficient * f.area;
      state.perfusion_diag[v] += ha;
      state.perfusion_source[v] += ha * f.sink_temperature;
    }
  apply_sources(state, mesh, precomp, perfusion, bc, 0.0, 1.0);
  return state;
}

void step(ThermalState& state, const VectorX& conduction_loads, double dt, Index step_index) {
  if (!(dt > 0)) throw Error("time step must be positive");
  const Index n = state.node_count();
  if (conduction_loads.size() != n) throw Error("load vector size does not match node count");
  VectorX next(n);
  const int threads = thread_count();
  bool finite = true;
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1) reduction(&& : finite)
  for (Index i = 0; i < n; ++i) {
    if (state.fixed[static_cast<std::size_t>(i)]) {
      next[i] = state.temperature[i];
      continue;
    }
    const double ti = state.temperature[i];
    const double heat = -conduction_loads[i] - state.perfusion_diag[i] * ti + state.perfusion_source[i] +
                        state.metabolic[i] + state.external_heat[i];
    next[i] = ti + dt * heat / state.lumped_mass[i];
    finite = finite && std::isfinite(next[i]);
  }
  if (!finite) throw DivergenceError("non-finite temperature at step " + std::to_string(step_index), step_index);
  for (std::size_t k = 0; k < state.dirichlet_nodes.size(); ++k)
    next[state.dirichlet_nodes[k]] = state.dirichlet_values[static_cast<Index>(k)];
  state.temperature = std::move(next);
}

double DeformationRamp::operator()(double time) const {
  if (keyframes.empty()) return 1.0;
  if (time <= keyframes.front().first) return keyframes.front().second;
  if (time >= keyframes.back().first) return keyframes.back().second;
  for (std::size_t i = 1; i < keyframes.size(); ++i) {
    const auto& [t1, s1] = keyframes[i];
    if (time <= t1) {
      const auto& [t0, s0] = keyframes[i - 1];
      return s0 + (s1 - s0) * (time - t0) / (t1 - t0);
    }
  }
  return keyframes.back().second;
}

Index Schedule::step_count() const { return static_cast<Index>(std::llround(total_time / dt)); }

Index Schedule::step_of(double time) const { return static_cast<Index>(std::llround(time / dt)); }

DeformationState scaled_displacements(const DeformationProvider& provider, const DeformationRamp& ramp, double time,
                                      const Mesh& mesh) {
  DeformationState state = displacements_at(provider, time, mesh);
  const double scale = ramp(time);
  if (scale != 1.0)
    for (auto& u : state.displacements) u *= scale;
  return state;
}

RunRecord run(const RunInputs& in, const Schedule& schedule, const VectorX& initial_temperature,
              const RunOptions& options) {
  const auto start = Clock::now();
  if (!(schedule.dt > 0)) throw Error("time step must be positive");
  RunRecord record;
  record.probe_nodes = options.probe_nodes;
  for (Index p : record.probe_nodes)
    if (p < 0 || p >= in.mesh.node_count()) throw Error("probe node " + std::to_string(p) + " out of range");

  ThermalState state = build_thermal_state(in.mesh, in.precomp, in.material, in.perfusion, in.bc, initial_temperature);
  const ConductionOperator conduction(in.mesh, in.precomp, in.material, options.variant,
                                      options.reference_temperature);
  const bool deformed = options.variant == FormulationVariant::DeformedAnisoTempDep &&
                        !std::holds_alternative<IdentityDeformation>(in.provider);
  const bool update_mass = schedule.update_thermal_mass && in.material.capacity_depends_on_temperature();

  const Index steps = schedule.step_count();
  std::vector<Index> snapshot_steps;
  for (double t : schedule.snapshot_times) snapshot_steps.push_back(schedule.step_of(t));
  std::sort(snapshot_steps.begin(), snapshot_steps.end());
  snapshot_steps.erase(std::unique(snapshot_steps.begin(), snapshot_steps.end()), snapshot_steps.end());
  auto next_snapshot = snapshot_steps.begin();

  auto time_of = [&](Index n) { return static_cast<double>(n) * schedule.dt; };
  auto displacements_for = [&](Index n) {
    return deformed ? scaled_displacements(in.provider, schedule.ramp, time_of(n), in.mesh)
                    : DeformationState::zero(in.mesh.node_count());
  };
  auto emit = [&](Index n, const DeformationState* current) {
    const auto t0 = Clock::now();
    Snapshot snap{time_of(n), state.temperature, current ? current->displacements : displacements_for(n).displacements};
    if (options.on_snapshot) options.on_snapshot(snap);
    record.snapshots.push_back(std::move(snap));
    record.timings.output_ms += elapsed_ms(t0);
  };
  auto record_probes = [&](Index n) {
    if (record.probe_nodes.empty() || n % std::max<Index>(schedule.probe_interval, 1) != 0) return;
    record.probe_times.push_back(time_of(n));
    std::vector<double> row;
    for (Index p : record.probe_nodes) row.push_back(state.temperature[p]);
    record.probe_values.push_back(std::move(row));
  };

  record_probes(0);
  DeformationState current = DeformationState::zero(in.mesh.node_count());
  for (Index n = 0; n < steps; ++n) {
    const double t = time_of(n);
    auto phase = Clock::now();
    if (deformed) current = scaled_displacements(in.provider, schedule.ramp, t, in.mesh);
    record.timings.deformation_ms += elapsed_ms(phase);
    if (next_snapshot != snapshot_steps.end() && *next_snapshot == n) {
      emit(n, &current);
      ++next_snapshot;
    }

    phase = Clock::now();
    const VectorX loads = conduction.loads(state.temperature, deformed ? &current : nullptr);
    record.timings.conduction_ms += elapsed_ms(phase);

    phase = Clock::now();
    if (update_mass) state.lumped_mass = lumped_thermal_mass(in.mesh, in.precomp, in.material, state.temperature);
    apply_sources(state, in.mesh, in.precomp, in.perfusion, in.bc, t, schedule.dt);
    try {
      step(state, loads, schedule.dt, n);
    } catch (const DivergenceError&) {
      const Snapshot last{t, state.temperature, current.displacements};
      if (options.on_snapshot) options.on_snapshot(last);
      throw;
    }
    record.timings.update_ms += elapsed_ms(phase);
    ++record.timings.steps;
    record_probes(n + 1);
  }
  while (next_snapshot != snapshot_steps.end() && *next_snapshot <= steps) {
    // Final snapshot(s): geometry at the end time.
    emit(*next_snapshot, nullptr);
    ++next_snapshot;
  }
  record.final_state = std::move(state);
  record.timings.total_ms = elapsed_ms(start);
  return record;
}

}  // namespace fedbht
