#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fedbht/metrics.hpp"

using namespace fedbht;

TEST_CASE("worked example: A = (1, 2), B = (1, 3)") {
  const auto e = compare_fields(VectorX{{1.0, 2.0}}, VectorX{{1.0, 3.0}});
  CHECK(e.normalized[0] == 0.0);
  CHECK(e.normalized[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(e.total == doctest::Approx(std::sqrt(0.1)).epsilon(1e-15));
  CHECK(e.max_normalized() == doctest::Approx(0.5));
}

TEST_CASE("identical fields have zero error") {
  const VectorX b{{36.0, 37.5, 41.0, 39.0}};
  const auto e = compare_fields(b, b);
  CHECK(e.normalized.isZero(0));
  CHECK(e.total == 0.0);
}

TEST_CASE("uniform reference raises a range-zero error") {
  CHECK_THROWS_AS(compare_fields(VectorX{{1.0, 2.0}}, VectorX{{3.0, 3.0}}), RangeZeroError);
}

TEST_CASE("metrics are asymmetric in their arguments") {
  const VectorX a{{1.0, 2.0}}, b{{1.0, 3.0}};
  const auto ab = compare_fields(a, b), ba = compare_fields(b, a);
  CHECK(ab.normalized[1] == doctest::Approx(0.5));
  CHECK(ba.normalized[1] == doctest::Approx(1.0));
  CHECK(ab.total != doctest::Approx(ba.total));
}

TEST_CASE("snapshot sets are paired by time") {
  std::vector<Snapshot> a{{5.0, VectorX{{1.0, 2.0}}, {}}, {10.0, VectorX{{2.0, 2.0}}, {}}};
  std::vector<Snapshot> b{{5.0, VectorX{{1.0, 3.0}}, {}}, {10.0, VectorX{{1.0, 3.0}}, {}}};
  const auto errs = compute_error_metrics(a, b);
  REQUIRE(errs.size() == 2);
  CHECK(errs[0].time == 5.0);
  CHECK(errs[1].normalized[0] == doctest::Approx(0.5));
  b[1].time = 11.0;
  CHECK_THROWS_AS(compute_error_metrics(a, b), Error);
  b[1].time = 10.0;
  b[1].temperature = VectorX{{1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(compute_error_metrics(a, b), Error);
}

TEST_CASE("histogram bins and CSV") {
  const VectorX v{{0.0, 0.1, 0.25, 0.5, 0.99, 1.0}};
  const Histogram h = make_histogram(v, 4, 1.0);
  REQUIRE(h.counts.size() == 4);
  REQUIRE(h.edges.size() == 5);
  CHECK(h.counts[0] == 2);
  CHECK(h.counts[1] == 1);
  CHECK(h.counts[2] == 1);
  CHECK(h.counts[3] == 2);

  std::ostringstream out;
  write_histogram_csv(out, {compare_fields(VectorX{{1.0, 2.0}}, VectorX{{1.0, 3.0}}, 5.0)}, 2);
  CHECK(out.str().rfind("time,bin_lower,bin_upper,count\n", 0) == 0);
}
