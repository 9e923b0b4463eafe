#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "fedbht/stability.hpp"

namespace fedbht {

/// A fully resolved simulation setup read from a JSON config.
struct Scenario {
  nlohmann::json config;  // echo of the input with paths made absolute
  std::filesystem::path base_dir;

  Mesh mesh;
  ElementPrecomp precomp;
  std::map<std::string, std::vector<Index>> node_sets;
  MaterialModel material;
  PerfusionParams perfusion;
  BoundaryConditions bc;
  DeformationProvider provider;
  Schedule schedule;
  FormulationVariant variant = FormulationVariant::DeformedAnisoTempDep;
  double reference_temperature = 37.0;
  VectorX initial_temperature;
  std::vector<Index> probes;
  bool dt_override = false;

  RunInputs inputs() const { return {mesh, precomp, material, perfusion, bc, provider}; }
  RunOptions options() const;
};

/// Parses a config document. Relative paths resolve against `base_dir`.
/// Throws ConfigError naming the offending field.
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads a config file, or the "config" member of a run manifest.
Scenario load_scenario(const std::filesystem::path& path);

/// Smallest critical step over the deformation states the run will visit
/// (start, trajectory keyframes, ramp keyframes and end).
struct StabilityReport {
  StabilityEstimate estimate;
  double time = 0.0;  // instant giving the smallest critical step
};
StabilityReport scenario_stability(const Scenario& scenario, const PowerIterationOptions& options = {});

/// dt above the critical step warrants a warning from this fraction upward.
inline constexpr double kStabilityWarnFraction = 0.9;

/// Throws StabilityError when dt exceeds the critical step and the scenario
/// does not set dt_override.
void check_time_step(const Scenario& scenario, const StabilityReport& report);

struct ScenarioRun {
  RunRecord record;
  StabilityReport stability;
  bool warned = false;
};

/// Stability check, run, and artifacts in `output_dir`: snapshot CSV/VTK
/// files, probes.csv and manifest.json. On divergence the last finite
/// snapshot and a manifest with status "diverged" are written before the
/// error propagates.
ScenarioRun run_scenario(const Scenario& scenario, const std::filesystem::path& output_dir,
                         std::ostream* log = nullptr);

/// Synthetic vascularized tissue block used as the bundled scenario.
struct LiverLikeOptions {
  std::array<int, 3> cells{15, 15, 11};
  Vec3 size{0.06, 0.06, 0.04};
  double dt = 0.01;
  double total_time = 20.0;
  FormulationVariant variant = FormulationVariant::DeformedAnisoTempDep;
};

struct LiverLikeModel {
  Mesh mesh;
  std::map<std::string, std::vector<Index>> node_sets;  // region_a ... region_e
  TrajectoryDeformation trajectory;
  nlohmann::json config;  // relative to the directory it is written into
};

LiverLikeModel make_liver_like(const LiverLikeOptions& options = {});

/// Writes mesh.txt, region_*.txt, trajectory.txt and liver_like.json.
/// Returns the config path.
std::filesystem::path write_liver_like(const LiverLikeModel& model, const std::filesystem::path& directory);

}  // namespace fedbht
