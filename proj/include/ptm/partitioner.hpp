#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptm/random.hpp"
#include "ptm/workload.hpp"

namespace ptm {

enum class Algorithm { baseline, a1, a2, a3 };

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);
inline bool is_randomized(Algorithm a) { return a == Algorithm::baseline || a == Algorithm::a3; }

struct PartitionerConfig {
  std::uint32_t parts = 1;  // P
  std::uint32_t repeats = 100;
  std::uint64_t seed = 0;
};

struct PartitionResult {
  Partitioning partitioning;
  BalanceReport report;
  std::uint32_t best_repeat = 0;
};

// Permutations below are returned as orders: result[i] is the original index
// placed at position i. Descending sorts break ties by ascending original
// index. A1, A2 and A3 place zero-workload items after all positive ones, in
// index order; they carry no cost so any placement is eta-equivalent.

/// Descending indices with ties by ascending index.
std::vector<std::uint32_t> sort_descending(std::span<const std::uint64_t> workloads);

/// Longest, shortest, 2nd longest, 2nd shortest, ... ending at the median.
std::vector<std::uint32_t> permute_a1(std::span<const std::uint64_t> workloads);

/// Descending order, then for 1-based even i with 2i <= M swap positions i and M+1-i.
std::vector<std::uint32_t> permute_a2(std::span<const std::uint64_t> workloads);

/// Tiered shuffle: descending order cut into blocks of P; each block is
/// shuffled and its k-th item goes to list T_k; each T_k is shuffled and the
/// lists are concatenated.
std::vector<std::uint32_t> permute_a3(std::span<const std::uint64_t> workloads, std::uint32_t parts, Engine& rng);

/// Uniformly random order.
std::vector<std::uint32_t> permute_baseline(std::span<const std::uint64_t> workloads, Engine& rng);

std::vector<std::uint32_t> permute(Algorithm algorithm, std::span<const std::uint64_t> workloads,
                                   std::uint32_t parts, Engine& rng);

/// Permutes rows and columns with `algorithm`, cuts both with equal_token_cut
/// and evaluates eta. Randomized algorithms run `repeats` independent streams
/// (OpenMP-parallel) and keep the highest eta, ties to the lowest repeat.
PartitionResult partition(const WorkloadMatrix& matrix, Algorithm algorithm, const PartitionerConfig& config);

/// Sequential best-of driver with the same contract as partition().
PartitionResult partition_serial(const WorkloadMatrix& matrix, Algorithm algorithm, const PartitionerConfig& config);

/// Keeps the row groups of `rows_from` and partitions only the columns of
/// `matrix`. Used for the document-timestamp matrix, whose blocks must share
/// document groups with the document-word partitioning.
PartitionResult partition_columns(const WorkloadMatrix& matrix, const Partitioning& rows_from, Algorithm algorithm,
                                  const PartitionerConfig& config);

struct OracleResult {
  std::vector<std::uint32_t> row_groups;
  std::vector<std::uint32_t> col_groups;
  std::uint64_t total_cost = 0;
  double eta = 0.0;
};

inline constexpr double kOracleSearchLimit = 1e7;

/// Exhaustive search over every assignment of rows and columns to P groups
/// (no contiguity constraint). Throws TooLargeError when P^D * P^W > 1e7.
OracleResult oracle_optimal(const WorkloadMatrix& matrix, std::uint32_t parts);

/// BalanceReport for explicit group assignments (the oracle's output shape).
BalanceReport balance_report_for_groups(const WorkloadMatrix& matrix, std::span<const std::uint32_t> row_groups,
                                        std::span<const std::uint32_t> col_groups, std::uint32_t parts);

}  // namespace ptm
