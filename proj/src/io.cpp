#include "fedbht/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

namespace fedbht {

std::string snapshot_stem(double time) { return "snapshot_" + std::to_string(std::llround(time * 1000.0)); }

void write_snapshot_csv(std::ostream& out, const Mesh& mesh, const Snapshot& snapshot) {
  out.precision(17);
  out << "node_index,x,y,z,T\n";
  for (Index v = 0; v < mesh.node_count(); ++v) {
    Vec3 x = mesh.nodes[static_cast<std::size_t>(v)];
    if (!snapshot.displacements.empty()) x += snapshot.displacements[static_cast<std::size_t>(v)];
    out << v << ',' << x.x() << ',' << x.y() << ',' << x.z() << ',' << snapshot.temperature[v] << '\n';
  }
}

void write_snapshot_vtk(std::ostream& out, const Mesh& mesh, const Snapshot& snapshot) {
  out.precision(17);
  const auto n = static_cast<std::size_t>(mesh.node_count());
  out << "# vtk DataFile Version 3.0\n"
      << "fedbht temperature t=" << snapshot.time << " s\n"
      << "ASCII\nDATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << n << " double\n";
  for (std::size_t v = 0; v < n; ++v) {
    Vec3 x = mesh.nodes[v];
    if (!snapshot.displacements.empty()) x += snapshot.displacements[v];
    out << x.x() << ' ' << x.y() << ' ' << x.z() << '\n';
  }
  const std::size_t cells = mesh.tets.size() + mesh.hexes.size();
  out << "CELLS " << cells << ' ' << mesh.tets.size() * 5 + mesh.hexes.size() * 9 << '\n';
  for (const auto& t : mesh.tets) out << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  for (const auto& h : mesh.hexes) {
    out << '8';
    for (Index v : h) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << cells << '\n';
  for (std::size_t i = 0; i < mesh.tets.size(); ++i) out << "10\n";
  for (std::size_t i = 0; i < mesh.hexes.size(); ++i) out << "12\n";
  out << "POINT_DATA " << n << "\nSCALARS temperature double 1\nLOOKUP_TABLE default\n";
  for (std::size_t v = 0; v < n; ++v) out << snapshot.temperature[static_cast<Index>(v)] << '\n';
  out << "VECTORS displacement double\n";
  for (std::size_t v = 0; v < n; ++v) {
    const Vec3 u = snapshot.displacements.empty() ? Vec3::Zero() : snapshot.displacements[v];
    out << u.x() << ' ' << u.y() << ' ' << u.z() << '\n';
  }
}

void write_snapshot_files(const std::filesystem::path& directory, const Mesh& mesh, const Snapshot& snapshot) {
  std::filesystem::create_directories(directory);
  const std::string stem = snapshot_stem(snapshot.time);
  std::ofstream csv(directory / (stem + ".csv"));
  std::ofstream vtk(directory / (stem + ".vtk"));
  if (!csv || !vtk) throw Error("cannot write snapshot files in " + directory.string());
  write_snapshot_csv(csv, mesh, snapshot);
  write_snapshot_vtk(vtk, mesh, snapshot);
}

VectorX read_snapshot_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("node_index", 0) != 0) throw Error("snapshot CSV missing header");
  std::vector<std::pair<Index, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw Error("snapshot CSV row has " + std::to_string(cells.size()) + " columns");
    rows.emplace_back(std::stoll(cells[0]), std::stod(cells[4]));
  }
  VectorX t(static_cast<Index>(rows.size()));
  for (const auto& [idx, value] : rows) {
    if (idx < 0 || idx >= t.size()) throw Error("snapshot CSV node index out of range");
    t[idx] = value;
  }
  return t;
}

std::vector<Snapshot> read_run_snapshots(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) throw Error("not a run directory: " + directory.string());
  static const std::regex pattern(R"(snapshot_(-?\d+)\.csv)");
  std::vector<Snapshot> out;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, pattern)) continue;
    std::ifstream in(entry.path());
    Snapshot s;
    s.time = static_cast<double>(std::stoll(m[1].str())) / 1000.0;
    s.temperature = read_snapshot_csv(in);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const Snapshot& a, const Snapshot& b) { return a.time < b.time; });
  return out;
}

void write_probe_csv(std::ostream& out, const RunRecord& record) {
  out.precision(17);
  out << "time";
  for (Index p : record.probe_nodes) out << ",node_" << p;
  out << '\n';
  for (std::size_t i = 0; i < record.probe_times.size(); ++i) {
    out << record.probe_times[i];
    for (double v : record.probe_values[i]) out << ',' << v;
    out << '\n';
  }
}

}  // namespace fedbht
