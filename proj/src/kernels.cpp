#include "flexq/kernels.hpp"

#include <algorithm>

namespace flexq::kernels {

namespace {

inline bool keep(double degree, double threshold) { return degree > 0.0 && degree >= threshold; }

}  // namespace

SparseDegrees membership_matrix_serial(std::span<const LabelColumn> labels, std::size_t rows,
                                       double threshold) {
  SparseDegrees out;
  out.offsets.reserve(rows + 1);
  out.offsets.push_back(0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t l = 0; l < labels.size(); ++l) {
      double g = membership_unchecked(labels[l].values[r], labels[l].params);
      if (keep(g, threshold)) out.entries.push_back({static_cast<std::uint32_t>(l), g});
    }
    out.offsets.push_back(out.entries.size());
  }
  return out;
}

// Two passes: count survivors per row, prefix-sum into offsets, then fill.
// Membership is recomputed in the second pass instead of buffering a dense
// rows x labels matrix.
SparseDegrees membership_matrix_parallel(std::span<const LabelColumn> labels, std::size_t rows,
                                         double threshold) {
  SparseDegrees out;
  out.offsets.assign(rows + 1, 0);
  const auto n = static_cast<std::int64_t>(rows);
  const std::size_t k = labels.size();

#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < n; ++r) {
    std::size_t count = 0;
    for (std::size_t l = 0; l < k; ++l) {
      if (keep(membership_unchecked(labels[l].values[r], labels[l].params), threshold)) ++count;
    }
    out.offsets[r + 1] = count;
  }
  for (std::size_t r = 0; r < rows; ++r) out.offsets[r + 1] += out.offsets[r];

  out.entries.resize(out.offsets[rows]);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < n; ++r) {
    std::size_t at = out.offsets[r];
    for (std::size_t l = 0; l < k; ++l) {
      double g = membership_unchecked(labels[l].values[r], labels[l].params);
      if (keep(g, threshold)) out.entries[at++] = {static_cast<std::uint32_t>(l), g};
    }
  }
  return out;
}

ScanTotals qualifying_scan_serial(const KnowledgeBase& kb, std::span<const std::uint32_t> query_labels,
                                  std::span<const double> values) {
  ScanTotals t;
  for (std::size_t pos = 0; pos < kb.size(); ++pos) {
    std::uint32_t mask = 0;
    double g = query_degree(kb.row(pos), query_labels, &mask);
    if (mask == 0) continue;
    t.sum += values.empty() ? 1.0 : values[pos];
    ++t.count;
    t.min_degree = std::min(t.min_degree, g);
  }
  return t;
}

ScanTotals qualifying_scan_parallel(const KnowledgeBase& kb,
                                    std::span<const std::uint32_t> query_labels,
                                    std::span<const double> values) {
  double sum = 0.0;
  std::size_t count = 0;
  double min_degree = 1.0;
  const auto n = static_cast<std::int64_t>(kb.size());
  const bool indicator = values.empty();

#pragma omp parallel for schedule(static) reduction(+ : sum, count) reduction(min : min_degree)
  for (std::int64_t pos = 0; pos < n; ++pos) {
    std::uint32_t mask = 0;
    double g = query_degree(kb.row(pos), query_labels, &mask);
    if (mask == 0) continue;
    sum += indicator ? 1.0 : values[pos];
    ++count;
    if (g < min_degree) min_degree = g;
  }
  return {sum, count, min_degree};
}

}  // namespace flexq::kernels
