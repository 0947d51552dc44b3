#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "flexq/error.hpp"
#include "flexq/sampler.hpp"

using namespace flexq;

namespace {

std::vector<std::vector<RowId>> drain(Sampler& s) {
  std::vector<std::vector<RowId>> out;
  while (auto b = s.next_batch()) out.push_back(b->ids);
  return out;
}

}  // namespace

TEST_CASE("batch size rule") {
  CHECK(batch_size_for(10000, 1) == 100);
  CHECK(batch_size_for(10, 100) == 10);
  CHECK(batch_size_for(7, 1) == 1);
  CHECK(batch_size_for(0, 5) == 1);
  CHECK(batch_size_for(999, 10) == 99);
  CHECK_THROWS_AS(batch_size_for(10, 0), ParameterError);
  CHECK_THROWS_AS(batch_size_for(10, 100.01), ParameterError);
  CHECK_THROWS_AS(batch_size_for(10, -3), ParameterError);
}

TEST_CASE("remainder schedule") {
  Sampler s(7, 3.0 / 7.0 * 100.0 + 1e-9, 1);
  REQUIRE(s.batch_size() == 3);
  auto batches = drain(s);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].size() == 3);
  CHECK(batches[1].size() == 3);
  CHECK(batches[2].size() == 1);
  CHECK(s.exhausted());
  CHECK_FALSE(s.next_batch().has_value());
}

TEST_CASE("edge sizes") {
  Sampler empty(0, 10, 3);
  CHECK(empty.exhausted());
  CHECK_FALSE(empty.next_batch().has_value());

  Sampler full(10, 100, 3);
  auto b = full.next_batch();
  REQUIRE(b.has_value());
  CHECK(b->index == 1);
  CHECK(b->ids.size() == 10);
  CHECK(full.exhausted());
}

TEST_CASE("state bookkeeping and positions") {
  std::vector<RowId> ids{100, 200, 300, 400, 500};
  Sampler s(ids, 40, 9);
  std::size_t expect_index = 1;
  while (auto b = s.next_batch()) {
    CHECK(b->index == expect_index++);
    REQUIRE(b->positions.size() == b->ids.size());
    for (std::size_t i = 0; i < b->ids.size(); ++i) CHECK(ids[b->positions[i]] == b->ids[i]);
    CHECK(s.drawn_total() + s.remaining() == s.m());
  }
  CHECK(expect_index == 4);
}

TEST_CASE("property: batches partition the ids; seeds reproduce") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t m = std::uniform_int_distribution<std::size_t>(0, 3000)(rng);
    double pct = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
    std::uint64_t seed = rng();
    Sampler a(m, pct, seed);
    Sampler b(m, pct, seed);
    auto sa = drain(a);
    REQUIRE(sa == drain(b));
    std::vector<RowId> all;
    for (const auto& batch : sa) {
      REQUIRE(batch.size() <= a.batch_size());
      all.insert(all.end(), batch.begin(), batch.end());
    }
    for (std::size_t i = 0; i + 1 < sa.size(); ++i) REQUIRE(sa[i].size() == a.batch_size());
    std::sort(all.begin(), all.end());
    std::vector<RowId> expect(m);
    std::iota(expect.begin(), expect.end(), 0);
    REQUIRE(all == expect);
  }
}

TEST_CASE("different seeds give different streams") {
  Sampler a(1000, 1, 1);
  Sampler b(1000, 1, 2);
  CHECK(drain(a) != drain(b));
}

TEST_CASE("uniformity of the first draw") {
  std::vector<int> first(5, 0);
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    Sampler s(5, 1, seed);
    first[static_cast<std::size_t>(s.next_batch()->ids[0])]++;
  }
  for (int c : first) CHECK(c / 10000.0 == doctest::Approx(0.2).epsilon(0.1));
}
