#pragma once

#include <iosfwd>

#include "fedbht/integrator.hpp"

namespace fedbht {

struct KernelTiming {
  FormulationVariant variant;
  double mean_ms = 0.0;    // per element-load call
  double stderr_ms = 0.0;  // standard error of the batch means
  double ratio = 0.0;      // mean / mean of variant (i)
};

struct KernelBenchOptions {
  Index repetitions = 100000;  // calls per variant
  Index warmup = 10000;
  Index batch = 1000;
  std::uint64_t seed = 7;
};

struct KernelBenchReport {
  std::vector<KernelTiming> variants;  // (i) .. (v) in order
  KernelTiming noop{};                 // harness overhead with an empty kernel
  double checksum = 0.0;               // sum of all computed loads; timing independent
  Index fixture_elements = 0;

  const KernelTiming& of(FormulationVariant v) const { return variants[static_cast<std::size_t>(v)]; }
};

/// Times one tet element-load call per formulation. Fixture: a jittered tet
/// block, smooth deformation, temperatures in [37, 65] C, anisotropic
/// two-breakpoint conductivity tables for (i)-(iii) and an isotropic
/// two-breakpoint table for (iv)-(v). Variants are interleaved batch by batch.
KernelBenchReport bench_element_kernels(const KernelBenchOptions& options = {});

/// variant,mean_ms,stderr_ms,ratio
void write_kernel_csv(std::ostream& out, const KernelBenchReport& report);

struct SimulationTiming {
  int cells = 0;  // per axis
  Index nodes = 0;
  Index elements = 0;
  PhaseTimings timings;
};

struct SimulationBenchOptions {
  std::vector<int> cells{8, 12, 16, 20};  // block cells per axis
  Index steps = 1000;
  double dt = 0.01;
  FormulationVariant variant = FormulationVariant::DeformedAnisoTempDep;
  int threads = 1;  // serial by default
};

struct SimulationBenchReport {
  std::vector<SimulationTiming> rows;
  double slope_ms_per_element = 0.0;  // thermal time vs element count
  double intercept_ms = 0.0;
  double r_squared = 0.0;
};

/// Runs the time loop on unit-sized tet blocks of increasing density with a
/// heat source and a compressive affine deformation.
SimulationBenchReport bench_simulation(const SimulationBenchOptions& options = {});

/// cells,nodes,elements,steps,thermal_ms,conduction_ms,update_ms,total_ms
void write_simulation_csv(std::ostream& out, const SimulationBenchReport& report);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fedbht
