#pragma once

#include <cstdint>
#include <functional>

#include "fedbht/mesh.hpp"

namespace fedbht {

/// Axis-aligned block split into cells[0] x cells[1] x cells[2] cubes.
struct BlockSpec {
  std::array<int, 3> cells{1, 1, 1};
  Vec3 origin = Vec3::Zero();
  Vec3 size = Vec3::Ones();
};

/// Each cell is cut into six tets around its main diagonal, so neighbouring
/// cells share conforming faces. All tets are positively oriented.
Mesh make_block_tets(const BlockSpec& spec);

Mesh make_block_hexes(const BlockSpec& spec);

/// Node index of grid point (i, j, k) in meshes produced by the block builders.
Index block_node(const BlockSpec& spec, int i, int j, int k);

/// Randomly moves interior nodes by up to `fraction` of the local cell size,
/// retrying per node so that no element inverts.
void jitter_interior_nodes(Mesh& mesh, const BlockSpec& spec, double fraction, std::uint64_t seed);

std::vector<Index> select_nodes(const Mesh& mesh, const std::function<bool(const Vec3&)>& keep);

}  // namespace fedbht
