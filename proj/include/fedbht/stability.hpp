#pragma once

#include <cstdint>

#include "fedbht/integrator.hpp"

namespace fedbht {

struct StabilityEstimate {
  double lambda_max = 0.0;   // 1/s
  double dt_critical = 0.0;  // s, 2 / lambda_max
  Index iterations = 0;
  bool converged = false;
};

struct PowerIterationOptions {
  double tolerance = 1e-6;  // relative change of successive Rayleigh quotients
  Index max_iterations = 10000;
  std::uint64_t seed = 42;
};

/// Largest eigenvalue of C^-1 (K + Kb) by power iteration on the matrix-free
/// operator, with fixed-temperature nodes removed. K is evaluated with
/// properties at `property_field`. Non-convergence returns the best estimate
/// with converged = false.
StabilityEstimate estimate_critical_dt(const ConductionOperator& conduction, const ThermalState& state,
                                       const VectorX& property_field, const DeformationState* deformation,
                                       const PowerIterationOptions& options = {});

StabilityEstimate estimate_critical_dt(const Mesh& mesh, const ElementPrecomp& precomp, const MaterialModel& material,
                                       const PerfusionParams& perfusion, const BoundaryConditions& bc,
                                       const VectorX& temperatures, const DeformationState* deformation,
                                       FormulationVariant variant, const PowerIterationOptions& options = {});

}  // namespace fedbht
