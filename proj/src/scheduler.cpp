#include "ptm/scheduler.hpp"

#include <algorithm>
#include <ostream>

#include "ptm/error.hpp"

namespace ptm {

DiagonalSchedule build_schedule(std::uint32_t parts) {
  if (parts == 0) throw Error("number of parts must be positive");
  DiagonalSchedule s;
  s.parts = parts;
  s.epochs.resize(parts);
  for (std::uint32_t l = 0; l < parts; ++l) {
    s.epochs[l].reserve(parts);
    for (std::uint32_t m = 0; m < parts; ++m) s.epochs[l].push_back({m, (m + l) % parts});
  }
  return s;
}

bool verify_nonconflicting(const DiagonalSchedule& schedule, const Partitioning& partitioning) {
  const auto P = schedule.parts;
  if (P == 0 || partitioning.parts != P || !partitioning.well_formed()) return false;
  // Groups are disjoint because the permutations are bijections and cuts are
  // monotone (checked above); what remains is distinctness inside each epoch.
  std::vector<char> row_used(P), col_used(P);
  for (const auto& epoch : schedule.epochs) {
    std::fill(row_used.begin(), row_used.end(), 0);
    std::fill(col_used.begin(), col_used.end(), 0);
    for (const auto& b : epoch) {
      if (b.row_group >= P || b.col_group >= P) return false;
      if (row_used[b.row_group] || col_used[b.col_group]) return false;
      row_used[b.row_group] = col_used[b.col_group] = 1;
    }
  }
  return true;
}

std::uint64_t schedule_cost(const DiagonalSchedule& schedule, const BalanceReport& report) {
  if (report.parts != schedule.parts) throw DimensionError("schedule and report disagree on P");
  std::uint64_t total = 0;
  for (const auto& epoch : schedule.epochs) {
    std::uint64_t mx = 0;
    for (const auto& b : epoch) mx = std::max(mx, report.cost(b.row_group, b.col_group));
    total += mx;
  }
  return total;
}

std::ostream& operator<<(std::ostream& out, const DiagonalSchedule& schedule) {
  for (std::size_t l = 0; l < schedule.epochs.size(); ++l) {
    out << "epoch " << l << ':';
    for (const auto& b : schedule.epochs[l]) out << " (" << b.row_group << ',' << b.col_group << ')';
    out << '\n';
  }
  return out;
}

}  // namespace ptm
