#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "ptm/workload.hpp"

namespace ptm {

struct BlockIndex {
  std::uint32_t row_group = 0;  // m
  std::uint32_t col_group = 0;  // n

  friend bool operator==(const BlockIndex&, const BlockIndex&) = default;
};

/// P epochs; epoch l holds the blocks (m, (m + l) mod P). Blocks inside one
/// epoch share no row group and no column group, so they can be sampled
/// concurrently.
struct DiagonalSchedule {
  std::uint32_t parts = 0;
  std::vector<std::vector<BlockIndex>> epochs;
};

DiagonalSchedule build_schedule(std::uint32_t parts);

/// True iff every epoch touches pairwise distinct row groups and pairwise
/// distinct column groups of a well-formed partitioning with the same P.
bool verify_nonconflicting(const DiagonalSchedule& schedule, const Partitioning& partitioning);

/// Sum over epochs of the largest block cost in the epoch.
std::uint64_t schedule_cost(const DiagonalSchedule& schedule, const BalanceReport& report);

std::ostream& operator<<(std::ostream& out, const DiagonalSchedule& schedule);

}  // namespace ptm
