#include "flexq/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <memory>

#include "flexq/error.hpp"
#include "flexq/text.hpp"

namespace flexq {

std::size_t batch_size_for(std::size_t m, double sample_pct) {
  if (!(sample_pct > 0.0 && sample_pct <= 100.0)) {
    throw ParameterError("sample percentage must be in (0, 100], got " + format_double(sample_pct));
  }
  auto size = static_cast<std::size_t>(std::floor(static_cast<double>(m) * sample_pct / 100.0));
  return std::clamp<std::size_t>(size, 1, std::max<std::size_t>(m, 1));
}

Sampler::Sampler(std::size_t m, double sample_pct, std::uint64_t seed)
    : identity_ids_(true),
      m_(m),
      sample_pct_(sample_pct),
      batch_size_(batch_size_for(m, sample_pct)),
      seed_(seed),
      rng_(seed) {
  if (m_ > std::numeric_limits<std::uint32_t>::max()) throw ParameterError("too many rows to sample");
}

namespace {

// Unbiased draw from [0, range) by multiply-and-reject (Lemire).
__extension__ using Wide = unsigned __int128;

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t range) {
  Wide product = static_cast<Wide>(rng()) * range;
  auto low = static_cast<std::uint64_t>(product);
  if (low < range) {
    std::uint64_t floor = -range % range;
    while (low < floor) {
      product = static_cast<Wide>(rng()) * range;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

}  // namespace

void Sampler::densify() {
  // Default-initialised, so the pool is written once.
  pool_ = std::make_unique_for_overwrite<std::uint32_t[]>(m_);
  if (taken_.empty()) {
    std::iota(pool_.get(), pool_.get() + m_, 0u);
  } else {
    std::size_t w = drawn_;
    for (std::size_t p = 0; p < m_; ++p) {
      if (!taken_[p]) pool_[w++] = static_cast<std::uint32_t>(p);
    }
    taken_ = {};
  }
}

Sampler::Sampler(std::span<const RowId> ids, double sample_pct, std::uint64_t seed)
    : Sampler(ids.size(), sample_pct, seed) {
  ids_ = ids;
  identity_ids_ = false;
}

std::optional<SampleBatch> Sampler::next_batch() {
  if (exhausted()) return std::nullopt;
  std::size_t take = std::min(batch_size_, m_ - drawn_);
  SampleBatch batch;
  batch.index = ++batches_;
  batch.ids.reserve(take);
  batch.positions.reserve(take);
  if (!pool_ && (drawn_ + take) * 16 >= m_) densify();
  if (!pool_ && taken_.empty()) taken_.assign(m_, false);
  for (std::size_t i = 0; i < take; ++i) {
    std::size_t pos;
    if (pool_) {
      std::size_t j = drawn_ + bounded(rng_, m_ - drawn_);
      std::swap(pool_[drawn_], pool_[j]);
      pos = pool_[drawn_];
    } else {
      // Under a sixteenth of the rows is taken, so a retry is rare.
      do {
        pos = bounded(rng_, m_);
      } while (taken_[pos]);
      taken_[pos] = true;
    }
    ++drawn_;
    batch.positions.push_back(pos);
    batch.ids.push_back(identity_ids_ ? static_cast<RowId>(pos) : ids_[pos]);
  }
  return batch;
}

}  // namespace flexq
