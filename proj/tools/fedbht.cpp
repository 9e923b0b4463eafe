// Command-line front end: run, verify, stability, bench, make-mesh, metrics.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fedbht/bench.hpp"
#include "fedbht/io.hpp"
#include "fedbht/mesh_generation.hpp"
#include "fedbht/metrics.hpp"
#include "fedbht/oracle.hpp"
#include "fedbht/parallel.hpp"
#include "fedbht/scenario.hpp"

namespace fs = std::filesystem;
using namespace fedbht;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kDiverged = 3, kVerifyFailed = 4 };

fs::path default_output(const fs::path& config, const std::string& suffix) {
  return fs::path(config.stem().string() + suffix);
}

int cmd_run(const fs::path& config, fs::path out) {
  const Scenario s = load_scenario(config);
  if (out.empty()) out = default_output(config, "_run");
  const ScenarioRun r = run_scenario(s, out, &std::cout);
  const auto& t = r.record.timings;
  std::cout << "steps " << t.steps << ", thermal " << t.thermal_ms() << " ms, total " << t.total_ms << " ms\n"
            << "wrote " << r.record.snapshots.size() << " snapshots to " << out.string() << '\n';
  return kOk;
}

int cmd_stability(const fs::path& config) {
  const Scenario s = load_scenario(config);
  const StabilityReport r = scenario_stability(s);
  std::cout << std::setprecision(10) << "lambda_max " << r.estimate.lambda_max << " 1/s\n"
            << "dt_critical " << r.estimate.dt_critical << " s\n"
            << "iterations " << r.estimate.iterations << (r.estimate.converged ? "" : " (not converged)") << '\n'
            << "at_time " << r.time << " s\n"
            << "dt " << s.schedule.dt << " s (" << s.schedule.dt / r.estimate.dt_critical << " of critical)\n";
  return kOk;
}

void print_errors(const std::vector<SnapshotErrors>& errors) {
  std::cout << std::setw(10) << "time_s" << std::setw(16) << "max_normalized" << std::setw(16) << "total" << '\n';
  for (const auto& e : errors)
    std::cout << std::setw(10) << e.time << std::setw(16) << e.max_normalized() << std::setw(16) << e.total << '\n';
}

int cmd_verify(const fs::path& config, const std::string& scheme_name, double normalized_tol, double total_tol,
               std::size_t bins, fs::path out) {
  const Scenario s = load_scenario(config);
  if (out.empty()) out = default_output(config, "_verify");
  const ScenarioRun prod = run_scenario(s, out, &std::cout);
  const auto scheme = scheme_name == "forward" ? oracle::TimeScheme::ForwardEuler : oracle::TimeScheme::BackwardEuler;
  const auto reference = oracle::reference_transient(s.inputs(), s.schedule, s.initial_temperature, scheme);
  const auto errors = compute_error_metrics(prod.record.snapshots, reference);
  print_errors(errors);
  {
    std::ofstream hist(out / "error_histogram.csv");
    write_histogram_csv(hist, errors, bins);
  }
  bool ok = true;
  for (const auto& e : errors) ok = ok && e.max_normalized() <= normalized_tol && e.total <= total_tol;
  std::cout << (ok ? "PASS" : "FAIL") << " (normalized <= " << normalized_tol << ", total <= " << total_tol
            << ", oracle " << scheme_name << " Euler)\n";
  return ok ? kOk : kVerifyFailed;
}

int cmd_metrics(const fs::path& a, const fs::path& b, std::size_t bins, const fs::path& histogram) {
  const auto errors = compute_error_metrics(read_run_snapshots(a), read_run_snapshots(b));
  print_errors(errors);
  if (!histogram.empty()) {
    std::ofstream out(histogram);
    write_histogram_csv(out, errors, bins);
  }
  return kOk;
}

int cmd_bench(const std::string& variant_name, const std::vector<int>& mesh, Index steps, Index reps,
              bool kernels, bool simulation, int threads, const fs::path& csv) {
  std::optional<FormulationVariant> only;
  if (!variant_name.empty() && variant_name != "all") {
    only = parse_variant(variant_name);
    if (!only) throw ConfigError("--variant", "unknown formulation '" + variant_name + "'");
  }
  std::ostringstream report;
  if (kernels) {
    KernelBenchOptions o;
    o.repetitions = reps;
    const KernelBenchReport r = bench_element_kernels(o);
    KernelBenchReport shown = r;
    if (only) {
      shown.variants.clear();
      shown.variants.push_back(r.of(*only));
    }
    write_kernel_csv(report, shown);
  }
  if (simulation) {
    SimulationBenchOptions o;
    if (!mesh.empty()) o.cells = mesh;
    o.steps = steps;
    o.threads = threads;
    if (only) o.variant = *only;
    const SimulationBenchReport r = bench_simulation(o);
    if (kernels) report << '\n';
    write_simulation_csv(report, r);
    report << "# thermal_ms vs elements: slope " << r.slope_ms_per_element << " ms, R^2 " << r.r_squared << '\n';
  }
  std::cout << report.str();
  if (!csv.empty()) std::ofstream(csv) << report.str();
  return kOk;
}

int cmd_make_mesh(const std::string& kind, const std::vector<int>& cells, const std::vector<double>& size,
                  const std::string& element, double jitter, std::uint64_t seed, const fs::path& out) {
  if (kind == "liver") {
    LiverLikeOptions o;
    if (!cells.empty()) o.cells = {cells[0], cells[1], cells[2]};
    if (!size.empty()) o.size = Vec3(size[0], size[1], size[2]);
    const fs::path config = write_liver_like(make_liver_like(o), out.empty() ? fs::path("liver_like") : out);
    std::cout << "wrote " << config.string() << '\n';
    return kOk;
  }
  BlockSpec spec;
  if (!cells.empty()) spec.cells = {cells[0], cells[1], cells[2]};
  if (!size.empty()) spec.size = Vec3(size[0], size[1], size[2]);
  Mesh mesh;
  if (element == "hex") {
    mesh = make_block_hexes(spec);
    if (jitter > 0) throw ConfigError("--jitter", "only supported for tet blocks");
  } else {
    mesh = make_block_tets(spec);
    if (jitter > 0) jitter_interior_nodes(mesh, spec, jitter, seed);
  }
  if (out.empty()) {
    write_mesh(std::cout, mesh);
  } else {
    std::ofstream file(out);
    write_mesh(file, mesh);
    std::cout << "wrote " << mesh.node_count() << " nodes, " << mesh.element_count() << " elements to "
              << out.string() << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit bio-heat transfer on deforming tissue"};
  app.require_subcommand(1);

  fs::path config, out, run_a, run_b, histogram, csv;
  std::string scheme = "backward", variant, kind = "block", element = "tet";
  double normalized_tol = 1e-3, total_tol = 5e-4, jitter = 0.0;
  std::size_t bins = 20;
  std::vector<int> mesh_cells, cells;
  std::vector<double> size;
  Index steps = 1000, reps = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  bool kernels_only = false, simulation_only = false;

  auto* run = app.add_subcommand("run", "Run a scenario and write snapshots, probes and a manifest");
  run->add_option("config", config, "Scenario JSON or run manifest")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", out, "Output directory");

  auto* verify = app.add_subcommand("verify", "Run a scenario and compare it with the assembled-matrix oracle");
  verify->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--scheme", scheme, "Oracle time scheme")->check(CLI::IsMember({"backward", "forward"}));
  verify->add_option("--normalized-tol", normalized_tol, "Largest allowed normalized error");
  verify->add_option("--total-tol", total_tol, "Largest allowed total error");
  verify->add_option("--bins", bins, "Histogram bins");
  verify->add_option("-o,--out", out, "Output directory");

  auto* stability = app.add_subcommand("stability", "Estimate the critical time step");
  stability->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench", "Element-kernel and simulation timings");
  bench->add_option("--variant", variant, "Formulation i..v or all");
  bench->add_option("--mesh", mesh_cells, "Block cells per axis, one per density")->delimiter(',');
  bench->add_option("--steps", steps, "Time steps per density");
  bench->add_option("--reps", reps, "Element-load calls per variant");
  bench->add_option("--threads", threads, "Threads for the simulation timings");
  bench->add_flag("--kernels-only", kernels_only);
  bench->add_flag("--simulation-only", simulation_only);
  bench->add_option("--csv", csv, "Also write the report here");

  auto* make_mesh = app.add_subcommand("make-mesh", "Generate a block mesh or the liver-like scenario");
  make_mesh->add_option("kind", kind, "block or liver")->check(CLI::IsMember({"block", "liver"}));
  make_mesh->add_option("--cells", cells, "Cells along x y z")->expected(3);
  make_mesh->add_option("--size", size, "Block size along x y z in m")->expected(3);
  make_mesh->add_option("--element", element, "tet or hex")->check(CLI::IsMember({"tet", "hex"}));
  make_mesh->add_option("--jitter", jitter, "Interior node jitter as a fraction of the cell size");
  make_mesh->add_option("--seed", seed, "Jitter seed");
  make_mesh->add_option("-o,--out", out, "Mesh file (block) or directory (liver)");

  auto* metrics = app.add_subcommand("metrics", "Errors of run A against reference run B");
  metrics->add_option("run_a", run_a, "Candidate run directory")->required()->check(CLI::ExistingDirectory);
  metrics->add_option("run_b", run_b, "Reference run directory")->required()->check(CLI::ExistingDirectory);
  metrics->add_option("--bins", bins, "Histogram bins");
  metrics->add_option("--histogram", histogram, "Histogram CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(config, out);
    if (*verify) return cmd_verify(config, scheme, normalized_tol, total_tol, bins, out);
    if (*stability) return cmd_stability(config);
    if (*bench) return cmd_bench(variant, mesh_cells, steps, reps, !simulation_only, !kernels_only, threads, csv);
    if (*make_mesh) return cmd_make_mesh(kind, cells, size, element, jitter, seed, out);
    if (*metrics) return cmd_metrics(run_a, run_b, bins, histogram);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const StabilityError& e) {
    std::cerr << "stability error: " << e.what() << '\n';
    return kConfig;
  } catch (const MeshError& e) {
    std::cerr << "mesh error: " << e.what() << '\n';
    return kConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
