#pragma once

// Reference implementations kept independent of the production kernels:
// conduction is assembled into a sparse matrix on explicitly moved node
// positions, with shape functions rebuilt from those positions.

#include <Eigen/SparseCore>

#include "fedbht/integrator.hpp"

namespace fedbht::oracle {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct AssembledSystem {
  SparseMatrix conduction;  // K, W/K
  VectorX lumped_mass;      // C, J/K
  VectorX perfusion_diag;   // Kb, W/K
  VectorX perfusion_source; // Gb, W
};

/// Assembles K on node positions x0 + u (u = nullptr for the reference
/// configuration). Conductivity is evaluated per element at the mean of
/// `property_field`. Capacity and perfusion use reference volumes, which
/// conserve mass under deformation.
AssembledSystem assemble(const Mesh& mesh, const std::vector<Vec3>* displacements, const MaterialModel& material,
                         const PerfusionParams& perfusion, const BoundaryConditions& bc,
                         const VectorX& property_field);

/// Element conduction loads by numerical quadrature over the element with
/// nodal coordinates `coords` (one column per node). Tets accept 1, 2 or 4
/// points, hexes 1, 8 or 27.
Eigen::VectorXd brute_force_element_load(const Eigen::Matrix<double, 3, Eigen::Dynamic>& coords, const Mat3& d,
                                         const Eigen::VectorXd& temperatures, int points);

/// Volume by the same quadrature rules.
double brute_force_element_volume(const Eigen::Matrix<double, 3, Eigen::Dynamic>& coords, int points);

enum class TimeScheme { ForwardEuler, BackwardEuler };

/// Assembled-matrix time integration with the same boundary, source and
/// schedule semantics as the production loop. Temperature-dependent
/// properties and time-varying geometry are handled by re-assembly every
/// step with properties lagged at the current field. Returns the requested
/// snapshots.
std::vector<Snapshot> reference_transient(const RunInputs& inputs, const Schedule& schedule,
                                          const VectorX& initial_temperature, TimeScheme scheme);

/// Largest eigenvalue of C^-1 (K + Kb) restricted to free nodes, by a dense
/// symmetric eigensolve.
double dense_lambda_max(const AssembledSystem& system, const std::vector<unsigned char>& fixed);

}  // namespace fedbht::oracle
