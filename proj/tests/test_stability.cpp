#include <doctest.h>

#include "fedbht/oracle.hpp"
#include "fedbht/stability.hpp"
#include "support.hpp"

using namespace fedbht;
using namespace fedbht::testing;

namespace {

struct Block {
  Mesh mesh;
  ElementPrecomp precomp;
  MaterialModel material;
};

Block small_block(int cells, std::uint64_t seed) {
  Block b{jittered_block(cells, seed, 0.01), {}, {}};
  b.precomp = precompute(b.mesh);
  b.material.conductivity = IsotropicConductivity{PropertyTable({{37.0, 0.53}, {65.0, 0.57}})};
  return b;
}

double dense(const Block& b, const PerfusionParams& perf, const BoundaryConditions& bc, const VectorX& t,
             const std::vector<Vec3>* u) {
  const ThermalState s = build_thermal_state(b.mesh, b.precomp, b.material, perf, bc, t);
  return oracle::dense_lambda_max(oracle::assemble(b.mesh, u, b.material, perf, bc, s.temperature), s.fixed);
}

}  // namespace

TEST_CASE("single node: C = 1, Kb = 2 gives lambda = 2") {
  Mesh m;
  m.nodes = {Vec3::Zero()};
  const ElementPrecomp p = precompute(m);
  const MaterialModel mat;
  ThermalState s;
  s.temperature = VectorX::Constant(1, 37.0);
  s.lumped_mass = VectorX::Ones(1);
  s.perfusion_diag = VectorX::Constant(1, 2.0);
  s.perfusion_source = VectorX::Zero(1);
  s.metabolic = s.external_heat = VectorX::Zero(1);
  s.fixed = {0};
  const ConductionOperator op(m, p, mat, FormulationVariant::DeformedAnisoTempDep);
  const StabilityEstimate e = estimate_critical_dt(op, s, s.temperature, nullptr);
  CHECK(e.converged);
  CHECK(e.lambda_max == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(e.dt_critical == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("power iteration matches the dense eigen-oracle on small meshes") {
  for (std::uint64_t seed : {1u, 2u}) {
    const Block b = small_block(4, seed);  // 125 nodes
    PerfusionParams perf;
    perf.blood_perfusion = 0.8;
    BoundaryConditions bc;
    bc.dirichlet.push_back({"D", select_nodes(b.mesh, [](const Vec3& x) { return x.x() < 1e-12; }), 37.0});
    const VectorX t = random_field(b.mesh.node_count(), seed, 37, 60);
    const StabilityEstimate e = estimate_critical_dt(b.mesh, b.precomp, b.material, perf, bc, t, nullptr,
                                                     FormulationVariant::DeformedAnisoTempDep);
    const double ref = dense(b, perf, bc, t, nullptr);
    CHECK(e.converged);
    CHECK(e.lambda_max <= ref * (1 + 1e-12));
    CHECK(e.lambda_max >= 0.99 * ref);
    CHECK(std::abs(e.lambda_max - ref) <= 1e-4 * ref);
    CHECK(e.dt_critical == doctest::Approx(2.0 / e.lambda_max));
  }
}

TEST_CASE("frozen dense eigenvalue of the reference block") {
  // Unjittered 3x3x3 Kuhn block of side 0.01 m, k = 0.53, rho c = 1060 * 3600.
  BlockSpec spec;
  spec.cells = {3, 3, 3};
  spec.size = Vec3::Constant(0.01);
  const Mesh m = make_block_tets(spec);
  const ElementPrecomp p = precompute(m);
  const MaterialModel mat;
  const VectorX t = VectorX::Constant(m.node_count(), 37.0);
  const ThermalState s = build_thermal_state(m, p, mat, {}, {}, t);
  const double ref = oracle::dense_lambda_max(oracle::assemble(m, nullptr, mat, {}, {}, t), s.fixed);
  CHECK(ref == doctest::Approx(0.159916146341).epsilon(1e-10));
  const StabilityEstimate e = estimate_critical_dt(m, p, mat, {}, {}, t, nullptr, FormulationVariant::ClassicalIsoTempIndep);
  CHECK(e.lambda_max == doctest::Approx(0.159916146341).epsilon(1e-4));
}

TEST_CASE("uniform compression F = 0.5 I halves lambda with conserved mass") {
  const Block b = small_block(3, 4);
  const VectorX t = VectorX::Constant(b.mesh.node_count(), 37.0);
  const auto compressed = affine_state(b.mesh, 0.5 * Mat3::Identity());
  const auto base = estimate_critical_dt(b.mesh, b.precomp, b.material, {}, {}, t, nullptr,
                                         FormulationVariant::DeformedAnisoTempDep);
  const auto squeezed = estimate_critical_dt(b.mesh, b.precomp, b.material, {}, {}, t, &compressed,
                                             FormulationVariant::DeformedAnisoTempDep);
  const double ref_base = dense(b, {}, {}, t, nullptr);
  const double ref_squeezed = dense(b, {}, {}, t, &compressed.displacements);
  CHECK(ref_squeezed == doctest::Approx(0.5 * ref_base).epsilon(1e-10));
  CHECK(std::abs(squeezed.lambda_max - ref_squeezed) <= 1e-4 * ref_squeezed);
  CHECK(squeezed.lambda_max < base.lambda_max);
}

TEST_CASE("fixed nodes are excluded") {
  const Block b = small_block(3, 5);
  const VectorX t = VectorX::Constant(b.mesh.node_count(), 37.0);
  BoundaryConditions bc;
  std::vector<Index> all(static_cast<std::size_t>(b.mesh.node_count()));
  for (Index v = 0; v < b.mesh.node_count(); ++v) all[std::size_t(v)] = v;
  bc.dirichlet.push_back({"all", all, 37.0});
  const auto e = estimate_critical_dt(b.mesh, b.precomp, b.material, {}, bc, t, nullptr,
                                      FormulationVariant::DeformedAnisoTempDep);
  CHECK(e.converged);
  CHECK(e.lambda_max == 0.0);
  CHECK(std::isinf(e.dt_critical));
}

TEST_CASE("iteration cap reports non-convergence with the best estimate") {
  const Block b = small_block(4, 6);
  const VectorX t = VectorX::Constant(b.mesh.node_count(), 37.0);
  PowerIterationOptions opts;
  opts.max_iterations = 3;
  const auto e = estimate_critical_dt(b.mesh, b.precomp, b.material, {}, {}, t, nullptr,
                                      FormulationVariant::DeformedAnisoTempDep, opts);
  CHECK_FALSE(e.converged);
  CHECK(e.iterations == 3);
  CHECK(e.lambda_max > 0);
}

TEST_CASE("estimates are reproducible") {
  const Block b = small_block(3, 7);
  const VectorX t = random_field(b.mesh.node_count(), 2, 37, 60);
  const auto a = estimate_critical_dt(b.mesh, b.precomp, b.material, {}, {}, t, nullptr,
                                      FormulationVariant::DeformedAnisoTempDep);
  const auto c = estimate_critical_dt(b.mesh, b.precomp, b.material, {}, {}, t, nullptr,
                                      FormulationVariant::DeformedAnisoTempDep);
  CHECK(a.lambda_max == c.lambda_max);
  CHECK(a.iterations == c.iterations);
}
