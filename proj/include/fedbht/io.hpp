#pragma once

#include <filesystem>
#include <iosfwd>

#include "fedbht/integrator.hpp"

namespace fedbht {

/// Snapshot file stem "snapshot_<time in whole ms>".
std::string snapshot_stem(double time);

/// CSV with header node_index,x,y,z,T. Coordinates are the deformed
/// positions x0 + u. Values are written with round-trip precision.
void write_snapshot_csv(std::ostream& out, const Mesh& mesh, const Snapshot& snapshot);

/// Legacy ASCII VTK unstructured grid on the deformed positions with point
/// scalars "temperature" and vectors "displacement".
void write_snapshot_vtk(std::ostream& out, const Mesh& mesh, const Snapshot& snapshot);

/// Writes both files into `directory`.
void write_snapshot_files(const std::filesystem::path& directory, const Mesh& mesh, const Snapshot& snapshot);

/// Reads temperatures back from a snapshot CSV, indexed by node_index.
VectorX read_snapshot_csv(std::istream& in);

/// All snapshot_<ms>.csv files of a run directory, ordered by time.
std::vector<Snapshot> read_run_snapshots(const std::filesystem::path& directory);

/// Header time,node_<i>... followed by one row per recorded time.
void write_probe_csv(std::ostream& out, const RunRecord& record);

}  // namespace fedbht
