#include "fedbht/stability.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace fedbht {

StabilityEstimate estimate_critical_dt(const ConductionOperator& conduction, const ThermalState& state,
                                       const VectorX& property_field, const DeformationState* deformation,
                                       const PowerIterationOptions& options) {
  const Index n = state.node_count();
  const VectorX& mass = state.lumped_mass;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  VectorX v(n);
  for (Index i = 0; i < n; ++i) v[i] = state.fixed[static_cast<std::size_t>(i)] ? 0.0 : unit(rng);

  auto mass_norm = [&](const VectorX& x) { return std::sqrt(x.dot(mass.cwiseProduct(x))); };
  StabilityEstimate est;
  const double norm0 = mass_norm(v);
  if (norm0 == 0.0) {
    est.converged = true;
    est.dt_critical = std::numeric_limits<double>::infinity();
    return est;
  }
  v /= norm0;

  VectorX kv;
  double previous = 0.0;
  for (Index it = 1; it <= options.max_iterations; ++it) {
    conduction.apply(v, property_field, deformation, kv);
    kv += state.perfusion_diag.cwiseProduct(v);
    for (Index i : state.dirichlet_nodes) kv[i] = 0.0;

    // v is C-normalized, so the Rayleigh quotient is v^T A v.
    const double rayleigh = v.dot(kv);
    est.lambda_max = std::max(rayleigh, 0.0);
    est.iterations = it;

    VectorX next = kv.cwiseQuotient(mass);
    const double norm = mass_norm(next);
    if (norm == 0.0) {
      est.converged = true;
      break;
    }
    if (it > 1 && std::abs(rayleigh - previous) < options.tolerance * std::abs(rayleigh)) {
      est.converged = true;
      break;
    }
    previous = rayleigh;
    v = next / norm;
  }
  est.dt_critical = est.lambda_max > 0 ? 2.0 / est.lambda_max : std::numeric_limits<double>::infinity();
  return est;
}

StabilityEstimate estimate_critical_dt(const Mesh& mesh, const ElementPrecomp& precomp, const MaterialModel& material,
                                       const PerfusionParams& perfusion, const BoundaryConditions& bc,
                                       const VectorX& temperatures, const DeformationState* deformation,
                                       FormulationVariant variant, const PowerIterationOptions& options) {
  const ThermalState state = build_thermal_state(mesh, precomp, material, perfusion, bc, temperatures);
  const ConductionOperator conduction(mesh, precomp, material, variant);
  return estimate_critical_dt(conduction, state, state.temperature, deformation, options);
}

}  // namespace fedbht
