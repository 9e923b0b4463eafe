#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "fedbht/errors.hpp"
#include "fedbht/types.hpp"

namespace fedbht {

/// Elements whose volume or center Jacobian determinant falls below this
/// floor (m^3) are rejected as degenerate.
inline constexpr double kDegenerateVolumeFloor = 1e-18;

/// Reference-configuration mesh. Tets and hexes may be mixed; global element
/// numbering puts all tets first.
struct Mesh {
  std::vector<Vec3> nodes;
  std::vector<Tet4> tets;
  std::vector<Hex8> hexes;

  Index node_count() const { return static_cast<Index>(nodes.size()); }
  Index element_count() const { return static_cast<Index>(tets.size() + hexes.size()); }

  /// Throws MeshError on out-of-range indices or inverted/degenerate elements.
  void validate() const;
};

/// Reference quantities computed once per mesh. Hex gradients are taken at
/// the element center (one-point reduced integration).
struct ElementPrecomp {
  std::vector<ShapeGradient<double, 4>> tet_gradients;
  std::vector<double> tet_volumes;
  std::vector<ShapeGradient<double, 8>> hex_gradients;
  std::vector<double> hex_jacobian_dets;

  /// Integration weight of the one-point rule: V for tets, 8 det(J0) for hexes.
  double tet_weight(Index e) const { return tet_volumes[static_cast<std::size_t>(e)]; }
  double hex_weight(Index e) const { return 8.0 * hex_jacobian_dets[static_cast<std::size_t>(e)]; }
};

// Reference-element derivatives. Hex nodes follow the trilinear convention:
// bottom face (zeta = -1) counter-clockwise from (-1,-1), then the top face.
inline const Eigen::Matrix<double, 3, 4>& tet_reference_derivatives() {
  static const Eigen::Matrix<double, 3, 4> d = [] {
    Eigen::Matrix<double, 3, 4> m;
    m << -1, 1, 0, 0,
         -1, 0, 1, 0,
         -1, 0, 0, 1;
    return m;
  }();
  return d;
}

inline constexpr std::array<std::array<double, 3>, 8> kHexNodeSigns{{
    {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
    {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1},
}};

/// d N_a / d(xi, eta, zeta) of the trilinear hex at a parametric point.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 8> hex_reference_derivatives(Scalar xi, Scalar eta, Scalar zeta) {
  Eigen::Matrix<Scalar, 3, 8> d;
  for (int a = 0; a < 8; ++a) {
    const Scalar sx = kHexNodeSigns[a][0], sy = kHexNodeSigns[a][1], sz = kHexNodeSigns[a][2];
    d(0, a) = Scalar(0.125) * sx * (1 + eta * sy) * (1 + zeta * sz);
    d(1, a) = Scalar(0.125) * sy * (1 + xi * sx) * (1 + zeta * sz);
    d(2, a) = Scalar(0.125) * sz * (1 + xi * sx) * (1 + eta * sy);
  }
  return d;
}

/// Gradients with respect to physical coordinates from nodal coordinates
/// (one column per node) and reference derivatives. Returns det(J).
template <typename Scalar, int N>
Scalar physical_gradients(const Eigen::Matrix<Scalar, 3, N>& coords,
                          const Eigen::Matrix<Scalar, 3, N>& ref_derivs,
                          ShapeGradient<Scalar, N>& out) {
  // J(i, j) = d x_i / d xi_j
  const Matrix3<Scalar> jac = coords * ref_derivs.transpose();
  const Scalar det = jac.determinant();
  out = jac.transpose().inverse() * ref_derivs;
  return det;
}

template <int N>
Eigen::Matrix<double, 3, N> gather_coordinates(const std::vector<Vec3>& nodes,
                                               const std::array<Index, N>& conn) {
  Eigen::Matrix<double, 3, N> x;
  for (int a = 0; a < N; ++a) x.col(a) = nodes[static_cast<std::size_t>(conn[a])];
  return x;
}

double signed_tet_volume(const Mesh& mesh, Index tet);
double hex_center_jacobian_det(const Mesh& mesh, Index hex);

ElementPrecomp precompute(const Mesh& mesh);

Mesh parse_mesh(std::istream& in);
Mesh load_mesh(const std::filesystem::path& path);
void write_mesh(std::ostream& out, const Mesh& mesh);

/// One zero-based node index per line; '#' comments and blank lines skipped.
std::vector<Index> load_node_set(const std::filesystem::path& path, Index node_count);
void write_node_set(const std::filesystem::path& path, const std::vector<Index>& nodes);

}  // namespace fedbht
