#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "fedbht/mesh.hpp"

namespace fedbht {

/// det(F) at or below this value is treated as singular or inverted.
inline constexpr double kDeformationDetFloor = 1e-9;

/// Nodal displacements u = x_t - x_0 at one instant.
struct DeformationState {
  std::vector<Vec3> displacements;

  static DeformationState zero(Index node_count) {
    return {std::vector<Vec3>(static_cast<std::size_t>(node_count), Vec3::Zero())};
  }
};

struct IdentityDeformation {};

/// u(x0) = (A - I) x0 + b
struct AffineDeformation {
  Mat3 A = Mat3::Identity();
  Vec3 b = Vec3::Zero();
};

/// Keyframed nodal displacements, linearly interpolated in time and clamped
/// to the end keyframes outside [times.front(), times.back()].
struct TrajectoryDeformation {
  std::vector<double> times;
  std::vector<std::vector<Vec3>> frames;

  void validate(Index node_count) const;
};

using DeformationProvider = std::variant<IdentityDeformation, AffineDeformation, TrajectoryDeformation>;

DeformationState displacements_at(const DeformationProvider& provider, double time, const Mesh& mesh);

/// F = I + sum_a u_a (grad0 N_a)^T for one element.
template <typename Scalar, int N>
Matrix3<Scalar> deformation_gradient(const std::vector<Vec3>& displacements, const std::array<Index, N>& conn,
                                     const ShapeGradient<Scalar, N>& grad) {
  Eigen::Matrix<Scalar, 3, N> u;
  for (int a = 0; a < N; ++a) u.col(a) = displacements[static_cast<std::size_t>(conn[a])].template cast<Scalar>();
  return u * grad.transpose() + Matrix3<Scalar>::Identity();
}

/// Deformation gradient of global element `element` (tets first, then hexes).
Mat3 deformation_gradient(const DeformationState& state, const Mesh& mesh, const ElementPrecomp& precomp,
                          Index element);

template <typename Scalar>
struct InverseAndDet {
  Matrix3<Scalar> inverse;
  Scalar det;
};

/// Adjugate inverse and determinant of a 3x3 matrix. Throws
/// SingularDeformationError when det <= kDeformationDetFloor.
template <typename Scalar>
InverseAndDet<Scalar> inverse_and_det(const Matrix3<Scalar>& f) {
  Matrix3<Scalar> adj;
  adj(0, 0) = f(1, 1) * f(2, 2) - f(1, 2) * f(2, 1);
  adj(0, 1) = f(0, 2) * f(2, 1) - f(0, 1) * f(2, 2);
  adj(0, 2) = f(0, 1) * f(1, 2) - f(0, 2) * f(1, 1);
  adj(1, 0) = f(1, 2) * f(2, 0) - f(1, 0) * f(2, 2);
  adj(1, 1) = f(0, 0) * f(2, 2) - f(0, 2) * f(2, 0);
  adj(1, 2) = f(0, 2) * f(1, 0) - f(0, 0) * f(1, 2);
  adj(2, 0) = f(1, 0) * f(2, 1) - f(1, 1) * f(2, 0);
  adj(2, 1) = f(0, 1) * f(2, 0) - f(0, 0) * f(2, 1);
  adj(2, 2) = f(0, 0) * f(1, 1) - f(0, 1) * f(1, 0);
  const Scalar det = f(0, 0) * adj(0, 0) + f(0, 1) * adj(1, 0) + f(0, 2) * adj(2, 0);
  if (!(det > Scalar(kDeformationDetFloor))) {
    throw SingularDeformationError("deformation gradient is singular or inverted (det F = " +
                                   std::to_string(static_cast<double>(det)) + ")");
  }
  return {adj / det, det};
}

/// Trajectory text format: "KEYFRAME <t>" then one "ux uy uz" line per node.
TrajectoryDeformation parse_trajectory(std::istream& in, Index node_count);
TrajectoryDeformation load_trajectory(const std::filesystem::path& path, Index node_count);
void write_trajectory(std::ostream& out, const TrajectoryDeformation& trajectory);

}  // namespace fedbht
