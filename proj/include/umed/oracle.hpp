#pragma once

#include <atomic>
#include <cstdint>

#include "umed/space.hpp"

namespace umed {

// Query-counted distance access: the unit of cost accounting for the
// sampling algorithm. Every successful call to query() bumps the counter by
// exactly one, including self-distance queries. The counter is atomic, so a
// shared oracle attributes counts jointly across threads; per-trial accounting
// wants one wrapper per trial over the shared space.
class DistanceOracle {
public:
  explicit DistanceOracle(const Space& space) : space_(space) {}

  DistanceOracle(const DistanceOracle&) = delete;
  DistanceOracle& operator=(const DistanceOracle&) = delete;

  double query(PointId a, PointId b) {
    const double d = space_.distance(a, b);  // range-checked, bit-exact
    count_.fetch_add(1, std::memory_order_relaxed);
    return d;
  }

  std::int64_t query_count() const {
    return count_.load(std::memory_order_relaxed);
  }

  int size() const { return space_.size(); }
  const Space& space() const { return space_; }

private:
  const Space& space_;
  std::atomic<std::int64_t> count_{0};
};

}  // namespace umed
