#include "fedbht/mesh_generation.hpp"

#include <algorithm>
#include <random>

namespace fedbht {

Index block_node(const BlockSpec& spec, int i, int j, int k) {
  const Index nx = spec.cells[0] + 1, ny = spec.cells[1] + 1;
  return static_cast<Index>(i) + nx * (static_cast<Index>(j) + ny * static_cast<Index>(k));
}

namespace {

std::vector<Vec3> block_nodes(const BlockSpec& spec) {
  std::vector<Vec3> nodes;
  const auto& c = spec.cells;
  nodes.reserve(static_cast<std::size_t>((c[0] + 1) * (c[1] + 1) * (c[2] + 1)));
  for (int k = 0; k <= c[2]; ++k)
    for (int j = 0; j <= c[1]; ++j)
      for (int i = 0; i <= c[0]; ++i) {
        const Vec3 frac(double(i) / c[0], double(j) / c[1], double(k) / c[2]);
        nodes.push_back(spec.origin + spec.size.cwiseProduct(frac));
      }
  return nodes;
}

double tet_volume(const std::vector<Vec3>& nodes, const Tet4& t) {
  const auto& p = [&](int a) -> const Vec3& { return nodes[static_cast<std::size_t>(t[a])]; };
  return (p(1) - p(0)).dot((p(2) - p(0)).cross(p(3) - p(0))) / 6.0;
}

}  // namespace

Mesh make_block_tets(const BlockSpec& spec) {
  Mesh mesh;
  mesh.nodes = block_nodes(spec);
  static constexpr std::array<std::array<int, 3>, 6> kPaths{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (int k = 0; k < spec.cells[2]; ++k)
    for (int j = 0; j < spec.cells[1]; ++j)
      for (int i = 0; i < spec.cells[0]; ++i) {
        for (const auto& path : kPaths) {
          std::array<int, 3> at{i, j, k};
          Tet4 tet;
          tet[0] = block_node(spec, at[0], at[1], at[2]);
          for (int s = 0; s < 3; ++s) {
            ++at[static_cast<std::size_t>(path[static_cast<std::size_t>(s)])];
            tet[static_cast<std::size_t>(s + 1)] = block_node(spec, at[0], at[1], at[2]);
          }
          if (tet_volume(mesh.nodes, tet) < 0) std::swap(tet[2], tet[3]);
          mesh.tets.push_back(tet);
        }
      }
  return mesh;
}

Mesh make_block_hexes(const BlockSpec& spec) {
  Mesh mesh;
  mesh.nodes = block_nodes(spec);
  for (int k = 0; k < spec.cells[2]; ++k)
    for (int j = 0; j < spec.cells[1]; ++j)
      for (int i = 0; i < spec.cells[0]; ++i) {
        Hex8 hex;
        for (std::size_t a = 0; a < 8; ++a) {
          const int di = kHexNodeSigns[a][0] > 0, dj = kHexNodeSigns[a][1] > 0, dk = kHexNodeSigns[a][2] > 0;
          hex[a] = block_node(spec, i + di, j + dj, k + dk);
        }
        mesh.hexes.push_back(hex);
      }
  return mesh;
}

void jitter_interior_nodes(Mesh& mesh, const BlockSpec& spec, double fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Vec3 h = spec.size.cwiseQuotient(Vec3(spec.cells[0], spec.cells[1], spec.cells[2]));

  std::vector<std::vector<std::size_t>> node_tets(mesh.nodes.size());
  for (std::size_t e = 0; e < mesh.tets.size(); ++e)
    for (Index v : mesh.tets[e]) node_tets[static_cast<std::size_t>(v)].push_back(e);
  std::vector<std::vector<std::size_t>> node_hexes(mesh.nodes.size());
  for (std::size_t e = 0; e < mesh.hexes.size(); ++e)
    for (Index v : mesh.hexes[e]) node_hexes[static_cast<std::size_t>(v)].push_back(e);

  for (int k = 1; k < spec.cells[2]; ++k)
    for (int j = 1; j < spec.cells[1]; ++j)
      for (int i = 1; i < spec.cells[0]; ++i) {
        const auto v = static_cast<std::size_t>(block_node(spec, i, j, k));
        const Vec3 original = mesh.nodes[v];
        for (int attempt = 0; attempt < 20; ++attempt) {
          const Vec3 shift(unit(rng), unit(rng), unit(rng));
          mesh.nodes[v] = original + fraction * shift.cwiseProduct(h);
          const double min_vol = 0.05 * h.prod() / 6.0;
          bool ok = std::all_of(node_tets[v].begin(), node_tets[v].end(), [&](std::size_t e) {
            return tet_volume(mesh.nodes, mesh.tets[e]) > min_vol;
          });
          ok = ok && std::all_of(node_hexes[v].begin(), node_hexes[v].end(), [&](std::size_t e) {
                 return hex_center_jacobian_det(mesh, static_cast<Index>(e)) > 0.05 * h.prod() / 8.0;
               });
          if (ok) break;
          mesh.nodes[v] = original;
        }
      }
}

std::vector<Index> select_nodes(const Mesh& mesh, const std::function<bool(const Vec3&)>& keep) {
  std::vector<Index> out;
  for (Index v = 0; v < mesh.node_count(); ++v)
    if (keep(mesh.nodes[static_cast<std::size_t>(v)])) out.push_back(v);
  return out;
}

}  // namespace fedbht
