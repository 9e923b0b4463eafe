#pragma once

#include <random>
#include <sstream>

#include "fedbht/mesh_generation.hpp"

namespace fedbht::testing {

inline Mesh unit_tet_mesh() {
  Mesh m;
  m.nodes = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  m.tets = {Tet4{0, 1, 2, 3}};
  return m;
}

inline Mesh unit_cube_hex_mesh() {
  BlockSpec spec;
  return make_block_hexes(spec);
}

/// Two tets sharing the face (1, 2, 3).
inline Mesh two_tet_mesh() {
  Mesh m = unit_tet_mesh();
  m.nodes.push_back(Vec3(1, 1, 1));
  m.tets.push_back(Tet4{1, 2, 3, 4});
  if (signed_tet_volume(m, 1) < 0) std::swap(m.tets[1][2], m.tets[1][3]);
  return m;
}

inline Mesh jittered_block(int cells, std::uint64_t seed, double size = 1.0) {
  BlockSpec spec;
  spec.cells = {cells, cells, cells};
  spec.size = Vec3::Constant(size);
  Mesh m = make_block_tets(spec);
  jitter_interior_nodes(m, spec, 0.25, seed);
  return m;
}

inline VectorX random_field(Index n, std::uint64_t seed, double lo = 30.0, double hi = 70.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  VectorX v(n);
  for (Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

/// Random matrix near the identity with det well away from zero.
inline Mat3 random_affine(std::uint64_t seed, double spread = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  Mat3 a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = (i == j ? 1.0 : 0.0) + u(rng);
  return a;
}

inline Mat3 rotation(double ax, double ay, double az) {
  return (Eigen::AngleAxisd(az, Vec3::UnitZ()) * Eigen::AngleAxisd(ay, Vec3::UnitY()) *
          Eigen::AngleAxisd(ax, Vec3::UnitX()))
      .toRotationMatrix();
}

inline double relative_error(const VectorX& a, const VectorX& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline Mesh parse(const std::string& text) {
  std::istringstream in(text);
  return parse_mesh(in);
}

inline DeformationState affine_state(const Mesh& mesh, const Mat3& a, const Vec3& b = Vec3::Zero()) {
  return displacements_at(AffineDeformation{a, b}, 0.0, mesh);
}

}  // namespace fedbht::testing
