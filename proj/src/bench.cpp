#include "fedbht/bench.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#include "fedbht/mesh_generation.hpp"
#include "fedbht/parallel.hpp"

namespace fedbht {

namespace {

using Clock = std::chrono::steady_clock;

struct Fixture {
  Mesh mesh;
  ElementPrecomp precomp;
  std::vector<Vec3> displacements;
  VectorX temperatures;
  MaterialModel aniso;
  MaterialModel iso;
  std::vector<Eigen::Matrix<double, 4, 3>> weighted_grad_t;
  std::vector<ElementMatrix<double, 4>> geometric;
  std::vector<ElementMatrix<double, 4>> stiffness;
  Mat3 d0;
};

Fixture make_fixture(Index min_elements, std::uint64_t seed) {
  Fixture fx;
  BlockSpec spec;
  int c = 1;
  while (6 * c * c * c < min_elements) ++c;
  spec.cells = {c, c, c};
  spec.size = Vec3::Constant(0.01 * c);
  fx.mesh = make_block_tets(spec);
  jitter_interior_nodes(fx.mesh, spec, 0.2, seed);
  fx.precomp = precompute(fx.mesh);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> temp(37.0, 65.0);
  fx.temperatures.resize(fx.mesh.node_count());
  for (Index v = 0; v < fx.mesh.node_count(); ++v) fx.temperatures[v] = temp(rng);
  Mat3 a;
  a << 0.95, 0.02, 0.0, 0.01, 1.03, 0.0, 0.0, 0.04, 0.9;
  for (const Vec3& x : fx.mesh.nodes) fx.displacements.push_back((a - Mat3::Identity()) * x);

  AnisotropicConductivity aniso;
  aniso.components = {PropertyTable({{37.0, 0.53}, {65.0, 0.57}}), PropertyTable({{37.0, 0.50}, {65.0, 0.55}}),
                      PropertyTable({{37.0, 0.48}, {65.0, 0.52}}), PropertyTable({{37.0, 0.02}, {65.0, 0.03}}),
                      PropertyTable({{37.0, 0.01}, {65.0, 0.015}}), PropertyTable({{37.0, 0.015}, {65.0, 0.02}})};
  fx.aniso.conductivity = aniso;
  fx.iso.conductivity = IsotropicConductivity{PropertyTable({{37.0, 0.53}, {65.0, 0.57}})};
  fx.d0 = conductivity_matrix(fx.aniso, 37.0);
  const double k0 = fx.iso.scalar_conductivity(37.0);

  for (std::size_t e = 0; e < fx.mesh.tets.size(); ++e) {
    const auto& g = fx.precomp.tet_gradients[e];
    const double w = fx.precomp.tet_volumes[e];
    fx.weighted_grad_t.push_back(w * g.transpose());
    fx.geometric.push_back(w * (g.transpose() * g));
    fx.stiffness.push_back((k0 * w) * (g.transpose() * g));
  }
  return fx;
}

/// One element-load call as the production operator performs it.
template <int Kind>
NodalVector<double, 4> kernel_call(const Fixture& fx, std::size_t e) {
  const Tet4& conn = fx.mesh.tets[e];
  NodalVector<double, 4> te;
  for (int a = 0; a < 4; ++a) te[a] = fx.temperatures[conn[static_cast<std::size_t>(a)]];
  if constexpr (Kind == -1) {
    return te;
  } else if constexpr (Kind == 0) {
    const Mat3 d = conductivity_matrix(fx.aniso, te.mean());
    const Mat3 f = deformation_gradient<double, 4>(fx.displacements, conn, fx.precomp.tet_gradients[e]);
    return element_loads_deformed<double, 4>(fx.precomp.tet_gradients[e], fx.precomp.tet_volumes[e], f, d, te);
  } else if constexpr (Kind == 1) {
    const Mat3 d = conductivity_matrix(fx.aniso, te.mean());
    return element_loads_weighted_gradient<double, 4>(fx.weighted_grad_t[e], fx.precomp.tet_gradients[e], d, te);
  } else if constexpr (Kind == 2) {
    return element_loads_weighted_gradient<double, 4>(fx.weighted_grad_t[e], fx.precomp.tet_gradients[e], fx.d0,
                                                      te);
  } else if constexpr (Kind == 3) {
    return element_loads_scaled_stiffness<double, 4>(fx.iso.scalar_conductivity(te.mean()), fx.geometric[e], te);
  } else {
    return element_loads_stiffness<double, 4>(fx.stiffness[e], te);
  }
}

using BatchFn = double (*)(const Fixture&, Index, std::size_t&);

template <int Kind>
double run_batch(const Fixture& fx, Index calls, std::size_t& cursor) {
  double sum = 0.0;
  const std::size_t n = fx.mesh.tets.size();
  for (Index c = 0; c < calls; ++c) {
    sum += kernel_call<Kind>(fx, cursor).sum();
    if (++cursor == n) cursor = 0;
  }
  return sum;
}

KernelTiming summarize(FormulationVariant v, const std::vector<double>& batch_ms, Index batch) {
  KernelTiming t{v};
  const double m = static_cast<double>(batch_ms.size());
  double mean = 0.0;
  for (double b : batch_ms) mean += b;
  mean /= m;
  double var = 0.0;
  for (double b : batch_ms) var += (b - mean) * (b - mean);
  var = batch_ms.size() > 1 ? var / (m - 1) : 0.0;
  const double per_call = 1.0 / static_cast<double>(batch);
  t.mean_ms = mean * per_call;
  t.stderr_ms = std::sqrt(var / m) * per_call;
  return t;
}

}  // namespace

KernelBenchReport bench_element_kernels(const KernelBenchOptions& options) {
  const Index batch = std::max<Index>(options.batch, 1);
  const Fixture fx = make_fixture(batch, options.seed);
  static constexpr std::array<BatchFn, 6> kFns{run_batch<0>, run_batch<1>, run_batch<2>,
                                               run_batch<3>, run_batch<4>, run_batch<-1>};

  KernelBenchReport report;
  report.fixture_elements = static_cast<Index>(fx.mesh.tets.size());
  std::vector<std::vector<double>> samples(kFns.size());
  std::array<std::size_t, kFns.size()> cursors{};
  volatile double sink = 0.0;

  for (std::size_t k = 0; k < kFns.size(); ++k) sink = sink + kFns[k](fx, options.warmup, cursors[k]);

  const Index batches = std::max<Index>((options.repetitions + batch - 1) / batch, 2);
  for (Index b = 0; b < batches; ++b) {
    for (std::size_t k = 0; k < kFns.size(); ++k) {
      const auto t0 = Clock::now();
      const double s = kFns[k](fx, batch, cursors[k]);
      const auto t1 = Clock::now();
      sink = sink + s;
      if (k < 5) report.checksum += s;
      samples[k].push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
  }
  for (std::size_t k = 0; k < 5; ++k) report.variants.push_back(summarize(kAllVariants[k], samples[k], batch));
  report.noop = summarize(FormulationVariant::DeformedAnisoTempDep, samples[5], batch);
  const double base = report.variants[0].mean_ms;
  for (auto& v : report.variants) v.ratio = v.mean_ms / base;
  report.noop.ratio = report.noop.mean_ms / base;
  return report;
}

void write_kernel_csv(std::ostream& out, const KernelBenchReport& report) {
  out.precision(6);
  out << "variant,mean_ms,stderr_ms,ratio\n";
  for (const auto& v : report.variants)
    out << roman(v.variant) << ',' << v.mean_ms << ',' << v.stderr_ms << ',' << v.ratio << '\n';
  out << "noop," << report.noop.mean_ms << ',' << report.noop.stderr_ms << ',' << report.noop.ratio << '\n';
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit fit;
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return fit;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

SimulationBenchReport bench_simulation(const SimulationBenchOptions& options) {
  SimulationBenchReport report;
  const int saved_threads = thread_count();
  set_thread_count(options.threads);

  MaterialModel material;
  material.specific_heat = PropertyTable({{37.0, 3600.0}, {65.0, 3800.0}});
  material.conductivity = IsotropicConductivity{PropertyTable({{37.0, 0.53}, {65.0, 0.57}})};
  const PerfusionParams perfusion;
  Mat3 a = Mat3::Identity();
  a(2, 2) = 0.9;
  const DeformationProvider provider = AffineDeformation{a, Vec3::Zero()};

  try {
    for (int c : options.cells) {
      BlockSpec spec;
      spec.cells = {c, c, c};
      spec.size = Vec3::Constant(0.05);
      const Mesh mesh = make_block_tets(spec);
      const ElementPrecomp precomp = precompute(mesh);
      BoundaryConditions bc;
      FluxRegion source;
      source.name = "source";
      source.nodes = select_nodes(mesh, [](const Vec3& x) { return (x - Vec3::Constant(0.025)).norm() < 0.01; });
      if (source.nodes.empty()) source.nodes.push_back(block_node(spec, c / 2, c / 2, c / 2));
      source.watts_per_node = 0.2;
      bc.fluxes.push_back(source);

      Schedule schedule;
      schedule.dt = options.dt;
      schedule.total_time = options.dt * static_cast<double>(options.steps);
      RunOptions run_options;
      run_options.variant = options.variant;
      const RunInputs inputs{mesh, precomp, material, perfusion, bc, provider};
      const RunRecord record = run(inputs, schedule, VectorX::Constant(mesh.node_count(), 37.0), run_options);
      report.rows.push_back({c, mesh.node_count(), mesh.element_count(), record.timings});
    }
  } catch (...) {
    set_thread_count(saved_threads);
    throw;
  }
  set_thread_count(saved_threads);

  std::vector<double> x, y;
  for (const auto& r : report.rows) {
    x.push_back(static_cast<double>(r.elements));
    y.push_back(r.timings.thermal_ms());
  }
  const LinearFit fit = fit_line(x, y);
  report.slope_ms_per_element = fit.slope;
  report.intercept_ms = fit.intercept;
  report.r_squared = fit.r_squared;
  return report;
}

void write_simulation_csv(std::ostream& out, const SimulationBenchReport& report) {
  out.precision(6);
  out << "cells,nodes,elements,steps,thermal_ms,conduction_ms,update_ms,total_ms\n";
  for (const auto& r : report.rows) {
    out << r.cells << ',' << r.nodes << ',' << r.elements << ',' << r.timings.steps << ',' << r.timings.thermal_ms()
        << ',' << r.timings.conduction_ms << ',' << r.timings.update_ms << ',' << r.timings.total_ms << '\n';
  }
}

}  // namespace fedbht
