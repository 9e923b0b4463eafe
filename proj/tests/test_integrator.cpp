#include <doctest.h>

#include <cmath>

#include "fedbht/oracle.hpp"
#include "fedbht/stability.hpp"
#include "support.hpp"

using namespace fedbht;
using namespace fedbht::testing;

namespace {

ThermalState single_node(double t, double c, double kb, double gb) {
  ThermalState s;
  s.temperature = VectorX::Constant(1, t);
  s.lumped_mass = VectorX::Constant(1, c);
  s.perfusion_diag = VectorX::Constant(1, kb);
  s.perfusion_source = VectorX::Constant(1, gb);
  s.metabolic = VectorX::Zero(1);
  s.external_heat = VectorX::Zero(1);
  s.fixed = {0};
  return s;
}

MaterialModel liver_material() {
  MaterialModel m;
  m.specific_heat = PropertyTable({{37.0, 3600.0}, {65.0, 3800.0}});
  m.conductivity = IsotropicConductivity{PropertyTable({{37.0, 0.53}, {65.0, 0.57}})};
  return m;
}

struct SmallProblem {
  BlockSpec spec;
  Mesh mesh;
  ElementPrecomp precomp;
  MaterialModel material = liver_material();
  PerfusionParams perfusion;
  BoundaryConditions bc;
  DeformationProvider provider = IdentityDeformation{};

  explicit SmallProblem(int cells = 4, bool jitter = true) {
    spec.cells = {cells, cells, cells};
    spec.size = Vec3::Constant(0.02);
    mesh = make_block_tets(spec);
    if (jitter) jitter_interior_nodes(mesh, spec, 0.2, 5);
    precomp = precompute(mesh);
  }
  RunInputs inputs() const { return {mesh, precomp, material, perfusion, bc, provider}; }
};

}  // namespace

TEST_CASE("lumped mass of the unit tet") {
  const Mesh m = unit_tet_mesh();
  const ElementPrecomp p = precompute(m);
  MaterialModel mat;
  const VectorX c = lumped_thermal_mass(m, p, mat, VectorX::Constant(4, 37.0));
  for (Index i = 0; i < 4; ++i) CHECK(c[i] == doctest::Approx(159000.0).epsilon(1e-14));
}

TEST_CASE("lumped mass total equals the integral of rho c") {
  SmallProblem prob;
  const VectorX t = random_field(prob.mesh.node_count(), 2, 37, 65);
  const VectorX c = lumped_thermal_mass(prob.mesh, prob.precomp, prob.material, t);
  double expected = 0;
  for (std::size_t e = 0; e < prob.mesh.tets.size(); ++e) {
    double mean = 0;
    for (Index v : prob.mesh.tets[e]) mean += t[v];
    expected += prob.material.heat_capacity(mean / 4) * prob.precomp.tet_volumes[e];
  }
  CHECK(std::abs(c.sum() - expected) <= 1e-10 * expected);
  CHECK(c.minCoeff() > 0);
}

TEST_CASE("perfusion and film folding") {
  const Mesh m = unit_tet_mesh();
  const ElementPrecomp p = precompute(m);
  BoundaryConditions bc;
  const ThermalState none = build_thermal_state(m, p, MaterialModel{}, PerfusionParams{}, bc, VectorX::Constant(4, 37));
  CHECK(none.perfusion_diag.isZero(0));
  CHECK(none.perfusion_source.isZero(0));

  bc.films.push_back({"E", {2}, 0.003595, 1.0, 37.0});
  const ThermalState s = build_thermal_state(m, p, MaterialModel{}, PerfusionParams{}, bc, VectorX::Constant(4, 37));
  CHECK(s.perfusion_diag[2] == doctest::Approx(0.003595).epsilon(1e-15));
  CHECK(s.perfusion_source[2] == doctest::Approx(0.003595 * 37).epsilon(1e-15));
  CHECK(s.perfusion_diag[1] == 0.0);

  PerfusionParams perf;
  perf.blood_perfusion = 0.5;
  perf.arterial_temperature = 36.5;
  const ThermalState q = build_thermal_state(m, p, MaterialModel{}, perf, {}, VectorX::Constant(4, 37));
  for (Index i = 0; i < 4; ++i) {
    CHECK(q.perfusion_diag[i] == doctest::Approx(0.5 * 3617 / 24.0).epsilon(1e-14));
    CHECK(q.perfusion_source[i] == doctest::Approx(q.perfusion_diag[i] * 36.5).epsilon(1e-14));
  }
}

TEST_CASE("Dirichlet and flux on the same node conflict") {
  const Mesh m = unit_tet_mesh();
  const ElementPrecomp p = precompute(m);
  BoundaryConditions bc;
  bc.dirichlet.push_back({"D", {1}, 37.0});
  bc.fluxes.push_back({"C", {1, 2}, 0.2});
  CHECK_THROWS_AS(build_thermal_state(m, p, MaterialModel{}, {}, bc, VectorX::Constant(4, 37)),
                  BoundaryConflictError);
  bc.fluxes[0].nodes = {7};
  CHECK_THROWS_AS(bc.validate(4), Error);
}

TEST_CASE("single-node perfusion relaxation step") {
  ThermalState s = single_node(38.0, 1.0, 0.5, 0.5 * 37.0);
  step(s, VectorX::Zero(1), 0.1);
  CHECK(s.temperature[0] == doctest::Approx(37.95).epsilon(1e-15));
}

TEST_CASE("equilibrium is a fixed point") {
  ThermalState s = single_node(37.0, 1.0, 0.5, 0.5 * 37.0);
  for (int i = 0; i < 100; ++i) step(s, VectorX::Zero(1), 0.1);
  CHECK(s.temperature[0] == 37.0);

  SmallProblem prob;
  prob.perfusion.blood_perfusion = 0.6;
  prob.bc.dirichlet.push_back({"D", select_nodes(prob.mesh, [](const Vec3& x) { return x.z() < 1e-9; }), 37.0});
  Schedule sched;
  sched.dt = 0.5;
  sched.total_time = 50;
  sched.snapshot_times = {50};
  const RunRecord r = run(prob.inputs(), sched, VectorX::Constant(prob.mesh.node_count(), 37.0), {});
  CHECK(r.snapshots.back().temperature == VectorX::Constant(prob.mesh.node_count(), 37.0));
}

TEST_CASE("Dirichlet nodes stay exact under heavy flux nearby") {
  SmallProblem prob;
  const auto bottom = select_nodes(prob.mesh, [](const Vec3& x) { return x.z() < 1e-9; });
  const auto above = select_nodes(prob.mesh, [](const Vec3& x) { return x.z() > 0.004 && x.z() < 0.006; });
  prob.bc.dirichlet.push_back({"D", bottom, 37.0});
  prob.bc.fluxes.push_back({"C", above, 5.0});
  Schedule sched;
  sched.dt = 0.05;
  sched.total_time = 5;
  sched.snapshot_times = {1, 2.5, 5};
  const RunRecord r = run(prob.inputs(), sched, VectorX::Constant(prob.mesh.node_count(), 20.0), {});
  REQUIRE(r.snapshots.size() == 3);
  for (const auto& snap : r.snapshots) {
    for (Index v : bottom) CHECK(snap.temperature[v] == 37.0);
    CHECK(snap.temperature.maxCoeff() > 37.0);
  }
}

TEST_CASE("step reports divergence with the step index and leaves the state untouched") {
  ThermalState s = single_node(37.0, 1.0, 0.0, 0.0);
  s.external_heat[0] = std::numeric_limits<double>::infinity();
  try {
    step(s, VectorX::Zero(1), 0.1, 17);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() == 17);
  }
  CHECK(s.temperature[0] == 37.0);
}

TEST_CASE("uniform field without sources stays uniform") {
  SmallProblem prob;
  Schedule sched;
  sched.dt = 0.5;
  sched.total_time = 100;
  sched.snapshot_times = {0, 25, 100};
  const RunRecord r = run(prob.inputs(), sched, VectorX::Constant(prob.mesh.node_count(), 42.0), {});
  REQUIRE(r.snapshots.size() == 3);
  for (const auto& s : r.snapshots) CHECK((s.temperature.array() - 42.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("snapshots at the configured times; flux switches off on schedule") {
  SmallProblem prob;
  const Index centre = block_node(prob.spec, 2, 2, 2);
  FluxRegion source{"C", {centre}, 0.2};
  source.on_time = 0.0;
  source.off_time = 5.0;
  prob.bc.fluxes.push_back(source);
  Schedule sched;
  sched.dt = 0.01;
  sched.total_time = 20;
  sched.snapshot_times = {5, 10, 15, 20};
  sched.probe_interval = 50;
  RunOptions opts;
  opts.probe_nodes = {centre};
  std::vector<double> seen;
  opts.on_snapshot = [&](const Snapshot& s) { seen.push_back(s.time); };
  const RunRecord r = run(prob.inputs(), sched, VectorX::Constant(prob.mesh.node_count(), 37.0), opts);
  REQUIRE(r.snapshots.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(r.snapshots[std::size_t(i)].time == doctest::Approx(5.0 * (i + 1)));
  CHECK(seen.size() == 4);
  CHECK(r.timings.steps == 2000);
  CHECK(r.probe_times.size() == 41);
  // Heating while on, cooling afterwards.
  const auto& hist = r.probe_values;
  CHECK(hist[10][0] > hist[0][0]);
  CHECK(hist[40][0] < hist[10][0]);
  // Energy balance: no losses, so the heat input stays in the block.
  const VectorX& c = r.final_state.lumped_mass;
  const double gained = c.dot(r.snapshots.back().temperature - VectorX::Constant(c.size(), 37.0));
  CHECK(gained == doctest::Approx(0.2 * 5.0).epsilon(2e-3));
}

TEST_CASE("identity provider run equals variant (ii)") {
  SmallProblem prob;
  prob.bc.fluxes.push_back({"C", {block_node(prob.spec, 2, 2, 2)}, 0.5});
  Schedule sched;
  sched.dt = 0.05;
  sched.total_time = 10;
  sched.snapshot_times = {10};
  RunOptions a, b;
  a.variant = FormulationVariant::DeformedAnisoTempDep;
  b.variant = FormulationVariant::ClassicalAnisoTempDep;
  const VectorX t0 = random_field(prob.mesh.node_count(), 3, 36, 40);
  const auto ra = run(prob.inputs(), sched, t0, a);
  const auto rb = run(prob.inputs(), sched, t0, b);
  CHECK(relative_error(ra.snapshots.back().temperature, rb.snapshots.back().temperature) <= 1e-12);
}

TEST_CASE("forward-Euler oracle reproduces the production loop") {
  SmallProblem prob;
  prob.perfusion.blood_perfusion = 0.5;
  prob.perfusion.metabolic_rate = 400;
  prob.bc.fluxes.push_back({"C", {block_node(prob.spec, 2, 2, 2)}, 0.3, false, 0.0, 2.0});
  prob.bc.dirichlet.push_back({"D", {block_node(prob.spec, 0, 0, 0)}, 37.0});
  prob.bc.films.push_back({"E", {block_node(prob.spec, 4, 4, 4)}, 0.01, 1.0, 30.0});
  Mat3 a = Mat3::Identity();
  a(2, 2) = 0.8;
  a(0, 1) = 0.1;
  TrajectoryDeformation traj;
  traj.times = {0.0, 2.0};
  traj.frames = {std::vector<Vec3>(prob.mesh.nodes.size(), Vec3::Zero()), affine_state(prob.mesh, a).displacements};
  prob.provider = traj;
  Schedule sched;
  sched.dt = 0.02;
  sched.total_time = 4;
  sched.snapshot_times = {1, 2, 3, 4};
  sched.update_thermal_mass = true;
  const VectorX t0 = random_field(prob.mesh.node_count(), 9, 37, 45);
  const auto prod = run(prob.inputs(), sched, t0, {});
  const auto ref = oracle::reference_transient(prob.inputs(), sched, t0, oracle::TimeScheme::ForwardEuler);
  REQUIRE(prod.snapshots.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(prod.snapshots[i].time == doctest::Approx(ref[i].time));
    CHECK(relative_error(prod.snapshots[i].temperature, ref[i].temperature) <= 1e-10);
  }
}

TEST_CASE("pure conduction respects the maximum principle") {
  // Right-angled Kuhn tets give non-positive off-diagonal couplings.
  SmallProblem prob(4, false);
  const VectorX t0 = random_field(prob.mesh.node_count(), 4, 30, 60);
  const auto est = estimate_critical_dt(prob.mesh, prob.precomp, prob.material, prob.perfusion, prob.bc, t0, nullptr,
                                        FormulationVariant::DeformedAnisoTempDep);
  Schedule sched;
  sched.dt = 0.5 * est.dt_critical;
  sched.total_time = 200 * sched.dt;
  sched.snapshot_times = {20 * sched.dt, 100 * sched.dt, 200 * sched.dt};
  const auto r = run(prob.inputs(), sched, t0, {});
  for (const auto& s : r.snapshots) {
    CHECK(s.temperature.minCoeff() >= t0.minCoeff() - 1e-9);
    CHECK(s.temperature.maxCoeff() <= t0.maxCoeff() + 1e-9);
  }
}

TEST_CASE("deformation ramp scales displacements") {
  DeformationRamp ramp{{{0.0, 0.0}, {10.0, 1.0}, {20.0, 0.0}}};
  CHECK(ramp(5.0) == doctest::Approx(0.5));
  CHECK(ramp(10.0) == 1.0);
  CHECK(ramp(15.0) == doctest::Approx(0.5));
  CHECK(ramp(30.0) == 0.0);
  CHECK(DeformationRamp{}(3.0) == 1.0);
  const Mesh m = unit_tet_mesh();
  const auto s = scaled_displacements(AffineDeformation{2.0 * Mat3::Identity(), Vec3::Zero()}, ramp, 5.0, m);
  CHECK((s.displacements[1] - Vec3(0.5, 0, 0)).norm() < 1e-15);
}

TEST_CASE("flux activation window") {
  FluxRegion f{"C", {0}, 1.0, false, 0.0, 5.0};
  CHECK(f.active_at(0.0, 0.01));
  CHECK(f.active_at(4.99, 0.01));
  CHECK_FALSE(f.active_at(5.0, 0.01));
  CHECK_FALSE(f.active_at(-0.01, 0.01));
  // Accumulated step times land within the tolerance of the event.
  CHECK_FALSE(f.active_at(500 * 0.01, 0.01));
}
