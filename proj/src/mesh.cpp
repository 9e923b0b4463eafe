#include "fedbht/mesh.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace fedbht {

namespace {

// Yields whitespace-separated tokens, skipping '#' comment lines.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  bool next(std::string& token) {
    while (!(line_ >> token)) {
      std::string raw;
      if (!std::getline(in_, raw)) return false;
      ++line_number_;
      const auto first = raw.find_first_not_of(" \t\r");
      if (first == std::string::npos || raw[first] == '#') raw.clear();
      line_.clear();
      line_.str(raw);
    }
    return true;
  }

  std::string require(const char* what) {
    std::string token;
    if (!next(token)) fail(std::string("unexpected end of file, expected ") + what);
    return token;
  }

  double require_double(const char* what) {
    const std::string token = require(what);
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return v;
    } catch (const std::exception&) {
      fail("malformed " + std::string(what) + " '" + token + "'");
    }
  }

  Index require_index(const char* what) {
    const std::string token = require(what);
    try {
      std::size_t used = 0;
      const long long v = std::stoll(token, &used);
      if (used != token.size() || v < 0) throw std::invalid_argument(token);
      return static_cast<Index>(v);
    } catch (const std::exception&) {
      fail("malformed " + std::string(what) + " '" + token + "'");
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw MeshError(MeshError::Kind::Parse, "line " + std::to_string(line_number_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::istringstream line_;
  long line_number_ = 0;
};

}  // namespace

double signed_tet_volume(const Mesh& mesh, Index tet) {
  const auto x = gather_coordinates<4>(mesh.nodes, mesh.tets[static_cast<std::size_t>(tet)]);
  const Mat3 edges = (Mat3() << x.col(1) - x.col(0), x.col(2) - x.col(0), x.col(3) - x.col(0)).finished();
  return edges.determinant() / 6.0;
}

double hex_center_jacobian_det(const Mesh& mesh, Index hex) {
  const auto x = gather_coordinates<8>(mesh.nodes, mesh.hexes[static_cast<std::size_t>(hex)]);
  const Mat3 jac = x * hex_reference_derivatives<double>(0.0, 0.0, 0.0).transpose();
  return jac.determinant();
}

void Mesh::validate() const {
  const Index n = node_count();
  const Index n_tets = static_cast<Index>(tets.size());
  auto check_indices = [&](const auto& conn, Index element) {
    for (Index v : conn) {
      if (v < 0 || v >= n) {
        throw MeshError(MeshError::Kind::Topology,
                        "element " + std::to_string(element) + " references node " +
                            std::to_string(v) + " but mesh has " + std::to_string(n) + " nodes",
                        element);
      }
    }
  };
  for (Index e = 0; e < n_tets; ++e) check_indices(tets[static_cast<std::size_t>(e)], e);
  for (Index h = 0; h < static_cast<Index>(hexes.size()); ++h)
    check_indices(hexes[static_cast<std::size_t>(h)], n_tets + h);

  for (Index e = 0; e < n_tets; ++e) {
    const double v = signed_tet_volume(*this, e);
    if (!(v > kDegenerateVolumeFloor)) {
      throw MeshError(MeshError::Kind::Geometry,
                      "tet element " + std::to_string(e) + " has non-positive volume " + std::to_string(v), e);
    }
  }
  for (Index h = 0; h < static_cast<Index>(hexes.size()); ++h) {
    const double det = hex_center_jacobian_det(*this, h);
    if (!(det > kDegenerateVolumeFloor)) {
      throw MeshError(MeshError::Kind::Geometry,
                      "hex element " + std::to_string(n_tets + h) + " has non-positive Jacobian " +
                          std::to_string(det),
                      n_tets + h);
    }
  }
}

ElementPrecomp precompute(const Mesh& mesh) {
  ElementPrecomp pre;
  const auto n_tets = static_cast<Index>(mesh.tets.size());
  const auto n_hexes = static_cast<Index>(mesh.hexes.size());
  pre.tet_gradients.resize(mesh.tets.size());
  pre.tet_volumes.resize(mesh.tets.size());
  pre.hex_gradients.resize(mesh.hexes.size());
  pre.hex_jacobian_dets.resize(mesh.hexes.size());

  const Eigen::Matrix<double, 3, 4>& dtet = tet_reference_derivatives();
  for (Index e = 0; e < n_tets; ++e) {
    const auto x = gather_coordinates<4>(mesh.nodes, mesh.tets[static_cast<std::size_t>(e)]);
    const double det = physical_gradients<double, 4>(x, dtet, pre.tet_gradients[static_cast<std::size_t>(e)]);
    const double volume = det / 6.0;
    if (!(volume > kDegenerateVolumeFloor)) {
      throw MeshError(MeshError::Kind::Geometry, "degenerate tet element " + std::to_string(e), e);
    }
    pre.tet_volumes[static_cast<std::size_t>(e)] = volume;
  }

  const Eigen::Matrix<double, 3, 8> dhex = hex_reference_derivatives<double>(0.0, 0.0, 0.0);
  for (Index h = 0; h < n_hexes; ++h) {
    const auto x = gather_coordinates<8>(mesh.nodes, mesh.hexes[static_cast<std::size_t>(h)]);
    const double det = physical_gradients<double, 8>(x, dhex, pre.hex_gradients[static_cast<std::size_t>(h)]);
    if (!(det > kDegenerateVolumeFloor)) {
      throw MeshError(MeshError::Kind::Geometry, "degenerate hex element " + std::to_string(n_tets + h),
                      n_tets + h);
    }
    pre.hex_jacobian_dets[static_cast<std::size_t>(h)] = det;
  }
  return pre;
}

Mesh parse_mesh(std::istream& in) {
  TokenReader reader(in);
  Mesh mesh;
  std::string token;
  if (!reader.next(token) || token != "NODES") reader.fail("expected 'NODES <n>' header");
  const Index n = reader.require_index("node count");
  mesh.nodes.resize(static_cast<std::size_t>(n));
  for (auto& p : mesh.nodes) {
    p.x() = reader.require_double("x coordinate");
    p.y() = reader.require_double("y coordinate");
    p.z() = reader.require_double("z coordinate");
  }

  bool seen_tets = false, seen_hexes = false;
  while (reader.next(token)) {
    if (token == "TET4" && !seen_tets) {
      seen_tets = true;
      mesh.tets.resize(static_cast<std::size_t>(reader.require_index("tet count")));
      for (auto& t : mesh.tets)
        for (auto& v : t) v = reader.require_index("tet node index");
    } else if (token == "HEX8" && !seen_hexes) {
      seen_hexes = true;
      mesh.hexes.resize(static_cast<std::size_t>(reader.require_index("hex count")));
      for (auto& h : mesh.hexes)
        for (auto& v : h) v = reader.require_index("hex node index");
    } else {
      reader.fail("unexpected token '" + token + "'");
    }
  }
  mesh.validate();
  return mesh;
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshError::Kind::Parse, "cannot open mesh file " + path.string());
  return parse_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out.precision(17);
  out << "NODES " << mesh.nodes.size() << '\n';
  for (const auto& p : mesh.nodes) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  if (!mesh.tets.empty()) {
    out << "TET4 " << mesh.tets.size() << '\n';
    for (const auto& t : mesh.tets) out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  }
  if (!mesh.hexes.empty()) {
    out << "HEX8 " << mesh.hexes.size() << '\n';
    for (const auto& h : mesh.hexes) {
      for (int a = 0; a < 8; ++a) out << h[static_cast<std::size_t>(a)] << (a == 7 ? '\n' : ' ');
    }
  }
}

std::vector<Index> load_node_set(const std::filesystem::path& path, Index node_count) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshError::Kind::Parse, "cannot open node set " + path.string());
  TokenReader reader(in);
  std::vector<Index> nodes;
  std::string token;
  while (reader.next(token)) {
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || v < 0) reader.fail("malformed node index '" + token + "'");
    if (v >= node_count) {
      throw MeshError(MeshError::Kind::Topology,
                      "node set " + path.string() + " references node " + token + " out of range");
    }
    nodes.push_back(static_cast<Index>(v));
  }
  return nodes;
}

void write_node_set(const std::filesystem::path& path, const std::vector<Index>& nodes) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write node set " + path.string());
  for (Index v : nodes) out << v << '\n';
}

}  // namespace fedbht
