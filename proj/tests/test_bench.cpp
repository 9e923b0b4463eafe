#include <doctest.h>

#include <sstream>

#include "fedbht/bench.hpp"

using namespace fedbht;

TEST_CASE("line fit") {
  const LinearFit f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(fit_line({1, 2, 3, 4}, {1, 3, 2, 4}).r_squared < 0.9);
}

TEST_CASE("kernel bench reports every variant with reproducible loads") {
  KernelBenchOptions o;
  o.repetitions = 5000;
  o.warmup = 1000;
  const KernelBenchReport a = bench_element_kernels(o);
  const KernelBenchReport b = bench_element_kernels(o);
  REQUIRE(a.variants.size() == 5);
  CHECK(a.checksum == b.checksum);
  CHECK(a.fixture_elements >= o.batch);
  for (const auto& v : a.variants) {
    CHECK(v.mean_ms > 0);
    CHECK(v.stderr_ms >= 0);
  }
  CHECK(a.variants[0].ratio == 1.0);
  CHECK(a.noop.mean_ms < a.of(FormulationVariant::DeformedAnisoTempDep).mean_ms);

  std::ostringstream csv;
  write_kernel_csv(csv, a);
  CHECK(csv.str().rfind("variant,mean_ms,stderr_ms,ratio\ni,", 0) == 0);
}

TEST_CASE("simulation bench rows and CSV") {
  SimulationBenchOptions o;
  o.cells = {2, 3};
  o.steps = 20;
  const SimulationBenchReport r = bench_simulation(o);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].elements == 48);
  CHECK(r.rows[1].elements == 162);
  CHECK(r.rows[1].timings.steps == 20);
  std::ostringstream csv;
  write_simulation_csv(csv, r);
  CHECK(csv.str().rfind("cells,nodes,elements,steps,", 0) == 0);
}
