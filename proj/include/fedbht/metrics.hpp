#pragma once

#include <iosfwd>

#include "fedbht/integrator.hpp"

namespace fedbht {

/// Errors of a field against a reference field at one time.
struct SnapshotErrors {
  double time = 0.0;
  VectorX normalized;  // |T_i - R_i| / (max R - min R)
  double total = 0.0;  // sqrt(sum (T_i - R_i)^2 / sum R_i^2)

  double max_normalized() const { return normalized.size() ? normalized.maxCoeff() : 0.0; }
};

/// `reference` is the normalizing field; swapping arguments changes the
/// result. Throws RangeZeroError when the reference field is uniform.
SnapshotErrors compare_fields(const VectorX& candidate, const VectorX& reference, double time = 0.0);

/// Pairs snapshots by time (within 1e-9 s) and compares each pair.
/// Throws Error on mismatched node counts or snapshot times.
std::vector<SnapshotErrors> compute_error_metrics(const std::vector<Snapshot>& candidate,
                                                  const std::vector<Snapshot>& reference);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [0, upper]; upper <= 0 uses the data maximum.
Histogram make_histogram(const VectorX& values, std::size_t bins, double upper = 0.0);

/// Rows: time,bin_lower,bin_upper,count for every snapshot.
void write_histogram_csv(std::ostream& out, const std::vector<SnapshotErrors>& errors, std::size_t bins);

}  // namespace fedbht
