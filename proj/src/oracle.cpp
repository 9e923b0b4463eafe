#include "fedbht/oracle.hpp"

#include <cmath>
#include <span>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>

namespace fedbht::oracle {

namespace {

using Coords = Eigen::Matrix<double, 3, Eigen::Dynamic>;
using Gradients = Eigen::Matrix<double, 3, Eigen::Dynamic>;

// Linear tet: solve [1 x y z] c = e_a for each node's barycentric coefficients.
Gradients tet_gradients(const Coords& x, double& volume) {
  Eigen::Matrix4d m;
  for (int a = 0; a < 4; ++a) m.row(a) << 1.0, x(0, a), x(1, a), x(2, a);
  volume = m.determinant() / 6.0;
  const Eigen::Matrix4d coeffs = m.inverse();  // column a = coefficients of N_a
  return coeffs.bottomRows<3>();
}

struct QuadPoint {
  Eigen::Vector3d xi;
  double weight;
};

std::vector<QuadPoint> hex_rule(int points) {
  std::vector<double> abscissae, weights;
  switch (points) {
    case 1: abscissae = {0.0}; weights = {2.0}; break;
    case 8: abscissae = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)}; weights = {1.0, 1.0}; break;
    case 27:
      abscissae = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
      weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    default: throw Error("hex quadrature supports 1, 8 or 27 points");
  }
  std::vector<QuadPoint> rule;
  for (std::size_t i = 0; i < abscissae.size(); ++i)
    for (std::size_t j = 0; j < abscissae.size(); ++j)
      for (std::size_t k = 0; k < abscissae.size(); ++k)
        rule.push_back({Eigen::Vector3d(abscissae[i], abscissae[j], abscissae[k]), weights[i] * weights[j] * weights[k]});
  return rule;
}

// Trilinear shape derivatives d N_a / d xi, node a at corner signs s_a.
Eigen::Matrix<double, 3, 8> hex_shape_derivatives(const Eigen::Vector3d& p) {
  static const int signs[8][3] = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                                  {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};
  Eigen::Matrix<double, 3, 8> d;
  for (int a = 0; a < 8; ++a) {
    const double l0 = 1 + signs[a][0] * p[0], l1 = 1 + signs[a][1] * p[1], l2 = 1 + signs[a][2] * p[2];
    d(0, a) = signs[a][0] * l1 * l2 / 8.0;
    d(1, a) = l0 * signs[a][1] * l2 / 8.0;
    d(2, a) = l0 * l1 * signs[a][2] / 8.0;
  }
  return d;
}

// Physical gradients and |J| at a hex parametric point.
Gradients hex_gradients_at(const Coords& x, const Eigen::Vector3d& p, double& det) {
  const Eigen::Matrix<double, 3, 8> dxi = hex_shape_derivatives(p);
  Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();  // jac(i, j) = d x_i / d xi_j
  for (int a = 0; a < 8; ++a) jac += x.col(a) * dxi.col(a).transpose();
  det = jac.determinant();
  return jac.transpose().fullPivLu().solve(dxi);
}

Coords element_coords(const std::vector<Vec3>& positions, std::span<const Index> conn) {
  Coords x(3, static_cast<Index>(conn.size()));
  for (std::size_t a = 0; a < conn.size(); ++a) x.col(static_cast<Index>(a)) = positions[static_cast<std::size_t>(conn[a])];
  return x;
}

double element_mean(const VectorX& field, std::span<const Index> conn) {
  double s = 0;
  for (Index v : conn) s += field[v];
  return s / static_cast<double>(conn.size());
}

// Stiffness of one element on given coordinates with its production-equivalent
// one-point rule (exact for tets).
Eigen::MatrixXd element_stiffness(const Coords& x, const Mat3& d) {
  if (x.cols() == 4) {
    double volume = 0;
    const Gradients g = tet_gradients(x, volume);
    if (!(volume > 0)) throw MeshError(MeshError::Kind::Geometry, "inverted tet in oracle assembly");
    return volume * g.transpose() * d * g;
  }
  double det = 0;
  const Gradients g = hex_gradients_at(x, Eigen::Vector3d::Zero(), det);
  if (!(det > 0)) throw MeshError(MeshError::Kind::Geometry, "inverted hex in oracle assembly");
  return 8.0 * det * g.transpose() * d * g;
}

double reference_volume(const Coords& x) {
  if (x.cols() == 4) {
    double v = 0;
    tet_gradients(x, v);
    return v;
  }
  double det = 0;
  hex_gradients_at(x, Eigen::Vector3d::Zero(), det);
  return 8.0 * det;
}

template <typename Fn>
void for_each_element(const Mesh& mesh, Fn&& fn) {
  for (const auto& t : mesh.tets) fn(std::span<const Index>(t));
  for (const auto& h : mesh.hexes) fn(std::span<const Index>(h));
}

}  // namespace

AssembledSystem assemble(const Mesh& mesh, const std::vector<Vec3>* displacements, const MaterialModel& material,
                         const PerfusionParams& perfusion, const BoundaryConditions& bc,
                         const VectorX& property_field) {
  const Index n = mesh.node_count();
  std::vector<Vec3> moved = mesh.nodes;
  if (displacements)
    for (std::size_t v = 0; v < moved.size(); ++v) moved[v] += (*displacements)[v];

  AssembledSystem sys;
  sys.lumped_mass = VectorX::Zero(n);
  sys.perfusion_diag = VectorX::Zero(n);
  std::vector<Eigen::Triplet<double>> triplets;
  const double wc = perfusion.blood_perfusion * perfusion.blood_specific_heat;

  for_each_element(mesh, [&](std::span<const Index> conn) {
    const double mean_t = element_mean(property_field, conn);
    const Eigen::MatrixXd ke = element_stiffness(element_coords(moved, conn), conductivity_matrix(material, mean_t));
    for (std::size_t a = 0; a < conn.size(); ++a)
      for (std::size_t b = 0; b < conn.size(); ++b)
        triplets.emplace_back(conn[a], conn[b], ke(static_cast<Index>(a), static_cast<Index>(b)));

    const double volume0 = reference_volume(element_coords(mesh.nodes, conn));
    const double nodes = static_cast<double>(conn.size());
    for (Index v : conn) {
      sys.lumped_mass[v] += material.heat_capacity(mean_t) * volume0 / nodes;
      sys.perfusion_diag[v] += wc * volume0 / nodes;
    }
  });
  sys.conduction.resize(n, n);
  sys.conduction.setFromTriplets(triplets.begin(), triplets.end());

  sys.perfusion_source = perfusion.arterial_temperature * sys.perfusion_diag;
  for (const auto& film : bc.films)
    for (Index v : film.nodes) {
      sys.perfusion_diag[v] += film.coefficient * film.area;
      sys.perfusion_source[v] += film.coefficient * film.area * film.sink_temperature;
    }
  return sys;
}

Eigen::VectorXd brute_force_element_load(const Coords& coords, const Mat3& d, const Eigen::VectorXd& temperatures,
                                         int points) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(coords.cols(), coords.cols());
  if (coords.cols() == 4) {
    // Rules on the reference tet (volume 1/6), in barycentric form.
    std::vector<std::pair<Eigen::Vector4d, double>> rule;
    switch (points) {
      case 1: rule = {{Eigen::Vector4d::Constant(0.25), 1.0}}; break;
      case 2:
        rule = {{Eigen::Vector4d(0.35, 0.15, 0.25, 0.25), 0.5}, {Eigen::Vector4d(0.15, 0.35, 0.25, 0.25), 0.5}};
        break;
      case 4: {
        const double a = 0.5854101966249685, b = 0.1381966011250105;
        for (int i = 0; i < 4; ++i) {
          Eigen::Vector4d l = Eigen::Vector4d::Constant(b);
          l[i] = a;
          rule.emplace_back(l, 0.25);
        }
        break;
      }
      default: throw Error("tet quadrature supports 1, 2 or 4 points");
    }
    // Linear shape functions have constant gradients; the sum still runs over
    // every point so that the weights are exercised.
    for (const auto& [bary, w] : rule) {
      (void)bary;
      double volume = 0;
      const Gradients g = tet_gradients(coords, volume);
      k += w * volume * g.transpose() * d * g;
    }
  } else if (coords.cols() == 8) {
    for (const auto& q : hex_rule(points)) {
      double det = 0;
      const Gradients g = hex_gradients_at(coords, q.xi, det);
      k += q.weight * det * g.transpose() * d * g;
    }
  } else {
    throw Error("brute-force loads support 4-node tets and 8-node hexes");
  }
  return k * temperatures;
}

double brute_force_element_volume(const Coords& coords, int points) {
  if (coords.cols() == 4) {
    double volume = 0;
    tet_gradients(coords, volume);
    return volume;
  }
  double total = 0;
  for (const auto& q : hex_rule(points)) {
    double det = 0;
    hex_gradients_at(coords, q.xi, det);
    total += q.weight * det;
  }
  return total;
}

std::vector<Snapshot> reference_transient(const RunInputs& in, const Schedule& schedule,
                                          const VectorX& initial_temperature, TimeScheme scheme) {
  const Index n = in.mesh.node_count();
  // Reuse the production state only for the boundary bookkeeping (fixed
  // nodes and source vectors); all matrices come from assemble().
  ThermalState bookkeeping =
      build_thermal_state(in.mesh, in.precomp, in.material, in.perfusion, in.bc, initial_temperature);
  VectorX temperature = bookkeeping.temperature;
  const auto& fixed = bookkeeping.fixed;

  std::vector<Index> free_index(static_cast<std::size_t>(n), -1);
  Index n_free = 0;
  for (Index v = 0; v < n; ++v)
    if (!fixed[static_cast<std::size_t>(v)]) free_index[static_cast<std::size_t>(v)] = n_free++;

  const bool moving = !std::holds_alternative<IdentityDeformation>(in.provider);
  auto geometry_at = [&](double t) {
    return moving ? scaled_displacements(in.provider, schedule.ramp, t, in.mesh) : DeformationState::zero(n);
  };

  const Index steps = schedule.step_count();
  std::vector<Index> snapshot_steps;
  for (double t : schedule.snapshot_times) snapshot_steps.push_back(schedule.step_of(t));
  std::vector<Snapshot> out;
  auto maybe_snapshot = [&](Index k) {
    for (Index s : snapshot_steps)
      if (s == k) {
        out.push_back({static_cast<double>(k) * schedule.dt, temperature,
                       geometry_at(static_cast<double>(k) * schedule.dt).displacements});
        break;
      }
  };

  const VectorX initial_mass =
      assemble(in.mesh, nullptr, in.material, in.perfusion, in.bc, temperature).lumped_mass;
  const double dt = schedule.dt;
  for (Index k = 0; k < steps; ++k) {
    maybe_snapshot(k);
    const double t = static_cast<double>(k) * dt;
    apply_sources(bookkeeping, in.mesh, in.precomp, in.perfusion, in.bc, t, dt);
    const VectorX sources = bookkeeping.metabolic + bookkeeping.external_heat;

    if (scheme == TimeScheme::ForwardEuler) {
      const DeformationState g = geometry_at(t);
      const AssembledSystem sys =
          assemble(in.mesh, moving ? &g.displacements : nullptr, in.material, in.perfusion, in.bc, temperature);
      const VectorX& mass = schedule.update_thermal_mass ? sys.lumped_mass : initial_mass;
      const VectorX rate = -(sys.conduction * temperature) - sys.perfusion_diag.cwiseProduct(temperature) +
                           sys.perfusion_source + sources;
      VectorX next = temperature + dt * rate.cwiseQuotient(mass);
      for (Index v = 0; v < n; ++v)
        if (fixed[static_cast<std::size_t>(v)]) next[v] = temperature[v];
      temperature = std::move(next);
    } else {
      const DeformationState g = geometry_at(t + dt);
      const AssembledSystem sys =
          assemble(in.mesh, moving ? &g.displacements : nullptr, in.material, in.perfusion, in.bc, temperature);
      const VectorX& mass = schedule.update_thermal_mass ? sys.lumped_mass : initial_mass;
      // (C/dt + K + Kb)_ff T_f = C/dt T_f + Gb_f + s_f - K_fd T_d
      std::vector<Eigen::Triplet<double>> triplets;
      VectorX rhs(n_free);
      for (Index v = 0; v < n; ++v) {
        const Index r = free_index[static_cast<std::size_t>(v)];
        if (r < 0) continue;
        rhs[r] = mass[v] / dt * temperature[v] + sys.perfusion_source[v] + sources[v];
        triplets.emplace_back(r, r, mass[v] / dt + sys.perfusion_diag[v]);
      }
      for (Index col = 0; col < sys.conduction.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(sys.conduction, col); it; ++it) {
          const Index r = free_index[static_cast<std::size_t>(it.row())];
          if (r < 0) continue;
          const Index c = free_index[static_cast<std::size_t>(it.col())];
          if (c < 0) {
            rhs[r] -= it.value() * temperature[it.col()];
          } else {
            triplets.emplace_back(r, c, it.value());
          }
        }
      SparseMatrix a(n_free, n_free);
      a.setFromTriplets(triplets.begin(), triplets.end());
      Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
      cg.setTolerance(1e-13);
      cg.setMaxIterations(10 * n_free + 100);
      cg.compute(a);
      VectorX guess(n_free);
      for (Index v = 0; v < n; ++v)
        if (free_index[static_cast<std::size_t>(v)] >= 0) guess[free_index[static_cast<std::size_t>(v)]] = temperature[v];
      const VectorX solution = cg.solveWithGuess(rhs, guess);
      const double residual = (a * solution - rhs).norm() / std::max(rhs.norm(), 1e-300);
      if (cg.info() != Eigen::Success || !(residual < 1e-10))
        throw LinearSolveError("backward-Euler solve failed at step " + std::to_string(k) +
                               " (relative residual " + std::to_string(residual) + ")");
      for (Index v = 0; v < n; ++v)
        if (free_index[static_cast<std::size_t>(v)] >= 0) temperature[v] = solution[free_index[static_cast<std::size_t>(v)]];
    }
    if (!temperature.allFinite()) throw DivergenceError("oracle diverged at step " + std::to_string(k), k);
  }
  maybe_snapshot(steps);
  return out;
}

double dense_lambda_max(const AssembledSystem& system, const std::vector<unsigned char>& fixed) {
  std::vector<Index> free;
  for (std::size_t v = 0; v < fixed.size(); ++v)
    if (!fixed[v]) free.push_back(static_cast<Index>(v));
  const auto m = static_cast<Index>(free.size());
  if (m == 0) return 0.0;
  const Eigen::MatrixXd k_full = Eigen::MatrixXd(system.conduction);
  Eigen::MatrixXd a(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      const Index vi = free[static_cast<std::size_t>(i)], vj = free[static_cast<std::size_t>(j)];
      a(i, j) = k_full(vi, vj) + (vi == vj ? system.perfusion_diag[vi] : 0.0);
    }
  // Symmetric similarity transform C^-1/2 A C^-1/2 of the generalized problem.
  VectorX scale(m);
  for (Index i = 0; i < m; ++i) scale[i] = 1.0 / std::sqrt(system.lumped_mass[free[static_cast<std::size_t>(i)]]);
  const Eigen::MatrixXd s = scale.asDiagonal() * a * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace fedbht::oracle
