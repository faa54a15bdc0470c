#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ptm/corpus.hpp"

namespace ptm {

/// Sparse nonnegative integer matrix R = (r_jw) in CSR layout, with cached
/// row workloads (tokens per document) and column workloads (tokens per word).
/// Only strictly positive entries are stored.
class WorkloadMatrix {
 public:
  WorkloadMatrix() = default;

  struct Entry {
    std::uint32_t row;
    std::uint32_t col;
    std::uint32_t value;
  };
  /// Entries may repeat; repeated (row, col) pairs are summed. Zero values are dropped.
  WorkloadMatrix(std::uint32_t rows, std::uint32_t cols, std::vector<Entry> entries);

  std::uint32_t rows() const { return rows_; }
  std::uint32_t cols() const { return cols_; }
  std::uint64_t total() const { return total_; }
  std::size_t nonzeros() const { return col_idx_.size(); }

  std::span<const std::uint64_t> row_workloads() const { return row_workloads_; }
  std::span<const std::uint64_t> col_workloads() const { return col_workloads_; }

  std::span<const std::uint32_t> row_cols(std::uint32_t row) const {
    return {col_idx_.data() + row_ptr_[row], col_idx_.data() + row_ptr_[row + 1]};
  }
  std::span<const std::uint32_t> row_values(std::uint32_t row) const {
    return {values_.data() + row_ptr_[row], values_.data() + row_ptr_[row + 1]};
  }

  std::uint32_t at(std::uint32_t row, std::uint32_t col) const;
  WorkloadMatrix transposed() const;

  static WorkloadMatrix from_dense(const std::vector<std::vector<std::uint32_t>>& dense);

 private:
  std::uint32_t rows_ = 0;
  std::uint32_t cols_ = 0;
  std::uint64_t total_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_idx_;
  std::vector<std::uint32_t> values_;
  std::vector<std::uint64_t> row_workloads_;
  std::vector<std::uint64_t> col_workloads_;
};

/// Row and column permutations plus P+1 cut boundaries on each permuted order.
/// Row group m is {row_perm[i] : row_cuts[m] <= i < row_cuts[m+1]}; likewise columns.
struct Partitioning {
  std::uint32_t parts = 0;  // P
  std::vector<std::uint32_t> row_perm;
  std::vector<std::uint32_t> col_perm;
  std::vector<std::uint32_t> row_cuts;
  std::vector<std::uint32_t> col_cuts;

  /// Group id of every original row (resp. column).
  std::vector<std::uint32_t> row_groups() const;
  std::vector<std::uint32_t> col_groups() const;

  /// Bijective permutations and monotone cuts spanning [0, size].
  bool well_formed() const;

  Partitioning transposed() const;

  friend bool operator==(const Partitioning&, const Partitioning&) = default;
};

struct BalanceReport {
  std::uint32_t parts = 0;
  std::vector<std::uint64_t> partition_costs;  // P x P, row-major C_mn
  std::vector<std::uint64_t> epoch_max;        // max cost along diagonal l
  std::uint64_t total_cost = 0;                // C
  double optimum = 0.0;                        // C_opt = N / P
  double eta = 0.0;                            // C_opt / C
  double predicted_speedup = 0.0;              // eta * P

  std::uint64_t cost(std::uint32_t m, std::uint32_t n) const { return partition_costs[std::size_t{m} * parts + n]; }

  /// Flat `key=value` block, one key per line.
  std::string to_text() const;
};

WorkloadMatrix build_workload(const Corpus& corpus);

/// R' with documents as rows and timestamp ids as columns.
WorkloadMatrix build_bot_workload(const TimestampTable& timestamps, std::uint32_t doc_count);

/// Serial reference: one sweep over the sparse entries.
BalanceReport balance_report_serial(const WorkloadMatrix& matrix, const Partitioning& partitioning);
/// OpenMP kernel: rows sharded across threads, per-thread P x P accumulators.
BalanceReport balance_report(const WorkloadMatrix& matrix, const Partitioning& partitioning);

/// Fills epoch_max/total_cost/optimum/eta/speedup from partition_costs and N.
void finish_report(BalanceReport& report, std::uint64_t total_tokens);

/// Smallest-index-reaching-quota cut of an ordered workload list into P groups:
/// b_k is the least i with prefix_sum(i) >= k * total / P, and b_P = size.
std::vector<std::uint32_t> equal_token_cut(std::span<const std::uint64_t> workloads, std::uint32_t parts);

}  // namespace ptm
