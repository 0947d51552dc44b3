#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flexq/knowledge_base.hpp"
#include "flexq/membership.hpp"

// Data-parallel inner loops. Every kernel has a serial reference that the
// tests compare the OpenMP version against; both produce identical results
// up to floating-point summation order.
namespace flexq::kernels {

struct LabelColumn {
  std::span<const double> values;
  TrapezoidParams params;
};

struct SparseDegrees {
  std::vector<std::size_t> offsets;  // rows + 1
  std::vector<KbEntry> entries;
};

// Membership of every row in every label, pruned at threshold. All columns
// must have `rows` values.
SparseDegrees membership_matrix_serial(std::span<const LabelColumn> labels, std::size_t rows,
                                       double threshold);
SparseDegrees membership_matrix_parallel(std::span<const LabelColumn> labels, std::size_t rows,
                                         double threshold);

// Fold of all qualifying rows: a row qualifies when it stores a degree for
// at least one of `query_labels`; its degree is the min of those stored.
struct ScanTotals {
  double sum = 0.0;
  std::size_t count = 0;
  double min_degree = 1.0;
};

// `values` is the aggregated column aligned with KB positions, or empty for
// COUNT (every qualifying row contributes 1).
ScanTotals qualifying_scan_serial(const KnowledgeBase& kb, std::span<const std::uint32_t> query_labels,
                                  std::span<const double> values);
ScanTotals qualifying_scan_parallel(const KnowledgeBase& kb,
                                    std::span<const std::uint32_t> query_labels,
                                    std::span<const double> values);

// Min over the row's stored degrees for the query labels; 0 when none is
// stored. Bit i of *mask is set when query_labels[i] is stored.
inline double query_degree(std::span<const KbEntry> row, std::span<const std::uint32_t> query_labels,
                           std::uint32_t* mask) {
  double degree = 2.0;
  std::uint32_t bits = 0;
  for (const auto& e : row) {
    for (std::size_t i = 0; i < query_labels.size(); ++i) {
      if (e.label == query_labels[i]) {
        bits |= 1u << i;
        if (e.degree < degree) degree = e.degree;
      }
    }
  }
  if (mask != nullptr) *mask = bits;
  return bits == 0 ? 0.0 : degree;
}

}  // namespace flexq::kernels
