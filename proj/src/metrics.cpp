#include "fedbht/metrics.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace fedbht {

SnapshotErrors compare_fields(const VectorX& candidate, const VectorX& reference, double time) {
  if (candidate.size() != reference.size()) throw Error("compared fields have different node counts");
  if (reference.size() == 0) throw Error("cannot compare empty fields");
  const double range = reference.maxCoeff() - reference.minCoeff();
  if (!(range > 0)) throw RangeZeroError("reference field is uniform at t = " + std::to_string(time));
  SnapshotErrors out;
  out.time = time;
  const VectorX diff = candidate - reference;
  out.normalized = diff.cwiseAbs() / range;
  out.total = std::sqrt(diff.squaredNorm() / reference.squaredNorm());
  return out;
}

std::vector<SnapshotErrors> compute_error_metrics(const std::vector<Snapshot>& candidate,
                                                  const std::vector<Snapshot>& reference) {
  if (candidate.size() != reference.size()) throw Error("runs have different numbers of snapshots");
  std::vector<SnapshotErrors> out;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (std::abs(candidate[i].time - reference[i].time) > 1e-9)
      throw Error("snapshot times differ: " + std::to_string(candidate[i].time) + " vs " +
                  std::to_string(reference[i].time));
    out.push_back(compare_fields(candidate[i].temperature, reference[i].temperature, reference[i].time));
  }
  return out;
}

Histogram make_histogram(const VectorX& values, std::size_t bins, double upper) {
  Histogram h;
  if (bins == 0) bins = 1;
  if (!(upper > 0)) upper = values.size() ? values.maxCoeff() : 0.0;
  if (!(upper > 0)) upper = 1.0;
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = upper * static_cast<double>(b) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (Index i = 0; i < values.size(); ++i) {
    auto b = static_cast<std::size_t>(values[i] / upper * static_cast<double>(bins));
    if (b >= bins) b = bins - 1;
    ++h.counts[b];
  }
  return h;
}

void write_histogram_csv(std::ostream& out, const std::vector<SnapshotErrors>& errors, std::size_t bins) {
  out << "time,bin_lower,bin_upper,count\n";
  double upper = 0;
  for (const auto& e : errors) upper = std::max(upper, e.max_normalized());
  for (const auto& e : errors) {
    const Histogram h = make_histogram(e.normalized, bins, upper);
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      out << e.time << ',' << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.counts[b] << '\n';
  }
}

}  // namespace fedbht
