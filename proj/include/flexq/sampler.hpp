#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "flexq/relation.hpp"

namespace flexq {

struct SampleBatch {
  std::size_t index = 0;  // 1-based sequence number
  std::vector<RowId> ids;
  // Positions of ids in the sampled id list (KB positions when sampling a
  // KB). May be left empty by callers that only know ids.
  std::vector<std::size_t> positions;
};

// max(1, floor(m * s / 100)); throws ParameterError unless 0 < s <= 100.
std::size_t batch_size_for(std::size_t m, double sample_pct);

// Repeated uniform sampling without replacement: each batch draws
// batch_size ids (fewer for the last one) from those not drawn yet, until
// every id has been emitted once. Single consumer.
class Sampler {
 public:
  // Samples positions 0..m-1; ids equal positions.
  Sampler(std::size_t m, double sample_pct, std::uint64_t seed);
  // Samples the given ids, which must outlive the sampler.
  Sampler(std::span<const RowId> ids, double sample_pct, std::uint64_t seed);

  std::size_t m() const { return m_; }
  std::size_t batch_size() const { return batch_size_; }
  double sample_pct() const { return sample_pct_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t drawn_total() const { return drawn_; }
  std::size_t remaining() const { return m_ - drawn_; }
  bool exhausted() const { return drawn_ == m_; }

  // nullopt once exhausted.
  std::optional<SampleBatch> next_batch();

 private:
  std::span<const RowId> ids_;
  bool identity_ids_;
  std::size_t m_;
  double sample_pct_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  void densify();

  // Until a sixteenth of the rows is drawn, ids are drawn by rejection
  // against the taken_ bitmap, so the first batches cost O(batch + m/64).
  // After that a Fisher-Yates pool whose slots [drawn_, m_) hold the
  // remaining set takes over.
  std::vector<bool> taken_;
  std::unique_ptr<std::uint32_t[]> pool_;
  std::size_t drawn_ = 0;
  std::size_t batches_ = 0;
};

}  // namespace flexq
