#include "fedbht/deformation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

namespace fedbht {

void TrajectoryDeformation::validate(Index node_count) const {
  if (times.empty() || times.size() != frames.size()) throw Error("trajectory needs matching keyframe times and frames");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw Error("trajectory keyframe times must be strictly increasing");
  for (const auto& f : frames)
    if (static_cast<Index>(f.size()) != node_count) throw Error("trajectory frame size does not match node count");
}

namespace {

struct DisplacementVisitor {
  double time;
  const Mesh& mesh;

  DeformationState operator()(const IdentityDeformation&) const { return DeformationState::zero(mesh.node_count()); }

  DeformationState operator()(const AffineDeformation& affine) const {
    DeformationState s;
    s.displacements.reserve(mesh.nodes.size());
    const Mat3 grad = affine.A - Mat3::Identity();
    for (const auto& x : mesh.nodes) s.displacements.push_back(grad * x + affine.b);
    return s;
  }

  DeformationState operator()(const TrajectoryDeformation& traj) const {
    const auto& t = traj.times;
    if (time <= t.front()) return {traj.frames.front()};
    if (time >= t.back()) return {traj.frames.back()};
    const auto hi = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), time) - t.begin());
    const std::size_t lo = hi - 1;
    if (time == t[lo]) return {traj.frames[lo]};
    const double w = (time - t[lo]) / (t[hi] - t[lo]);
    DeformationState s;
    s.displacements.resize(traj.frames[lo].size());
    for (std::size_t v = 0; v < s.displacements.size(); ++v)
      s.displacements[v] = (1.0 - w) * traj.frames[lo][v] + w * traj.frames[hi][v];
    return s;
  }
};

}  // namespace

DeformationState displacements_at(const DeformationProvider& provider, double time, const Mesh& mesh) {
  return std::visit(DisplacementVisitor{time, mesh}, provider);
}

Mat3 deformation_gradient(const DeformationState& state, const Mesh& mesh, const ElementPrecomp& precomp,
                          Index element) {
  const auto n_tets = static_cast<Index>(mesh.tets.size());
  if (element < n_tets) {
    const auto e = static_cast<std::size_t>(element);
    return deformation_gradient<double, 4>(state.displacements, mesh.tets[e], precomp.tet_gradients[e]);
  }
  const auto h = static_cast<std::size_t>(element - n_tets);
  return deformation_gradient<double, 8>(state.displacements, mesh.hexes[h], precomp.hex_gradients[h]);
}

TrajectoryDeformation parse_trajectory(std::istream& in, Index node_count) {
  TrajectoryDeformation traj;
  std::string line;
  long line_no = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw Error("trajectory line " + std::to_string(line_no) + ": " + msg);
  };
  std::vector<Vec3>* current = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (line.compare(first, 8, "KEYFRAME") == 0) {
      std::string tag;
      double t = 0;
      if (!(ls >> tag >> t)) fail("malformed KEYFRAME header");
      if (current && static_cast<Index>(current->size()) != node_count) fail("keyframe has wrong node count");
      traj.times.push_back(t);
      traj.frames.emplace_back();
      current = &traj.frames.back();
      current->reserve(static_cast<std::size_t>(node_count));
      continue;
    }
    if (!current) fail("displacement before first KEYFRAME");
    Vec3 u;
    if (!(ls >> u.x() >> u.y() >> u.z())) fail("expected 'ux uy uz'");
    current->push_back(u);
  }
  traj.validate(node_count);
  return traj;
}

TrajectoryDeformation load_trajectory(const std::filesystem::path& path, Index node_count) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trajectory file " + path.string());
  return parse_trajectory(in, node_count);
}

void write_trajectory(std::ostream& out, const TrajectoryDeformation& trajectory) {
  out.precision(17);
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    out << "KEYFRAME " << trajectory.times[k] << '\n';
    for (const auto& u : trajectory.frames[k]) out << u.x() << ' ' << u.y() << ' ' << u.z() << '\n';
  }
}

}  // namespace fedbht
