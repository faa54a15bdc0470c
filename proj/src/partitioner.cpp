#include "ptm/partitioner.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ptm/error.hpp"

namespace ptm {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::baseline: return "baseline";
    case Algorithm::a1: return "a1";
    case Algorithm::a2: return "a2";
    case Algorithm::a3: return "a3";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::baseline, Algorithm::a1, Algorithm::a2, Algorithm::a3})
    if (to_string(a) == name) return a;
  return std::nullopt;
}

std::vector<std::uint32_t> sort_descending(std::span<const std::uint64_t> workloads) {
  std::vector<std::uint32_t> order(workloads.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return workloads[a] > workloads[b]; });
  return order;
}

namespace {

// Descending order split into positive items and the zero tail.
struct SortedItems {
  std::vector<std::uint32_t> positive;
  std::vector<std::uint32_t> zeros;
};

SortedItems split_sorted(std::span<const std::uint64_t> workloads) {
  auto order = sort_descending(workloads);
  const auto first_zero = std::find_if(order.begin(), order.end(), [&](auto i) { return workloads[i] == 0; });
  SortedItems s;
  s.zeros.assign(first_zero, order.end());
  order.erase(first_zero, order.end());
  s.positive = std::move(order);
  return s;
}

std::vector<std::uint32_t> join(std::vector<std::uint32_t> head, const std::vector<std::uint32_t>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

}  // namespace

std::vector<std::uint32_t> permute_a1(std::span<const std::uint64_t> workloads) {
  const auto items = split_sorted(workloads);
  const auto& s = items.positive;
  std::vector<std::uint32_t> out;
  out.reserve(workloads.size());
  if (!s.empty()) {
    std::size_t lo = 0, hi = s.size() - 1;
    for (bool take_long = true; lo <= hi; take_long = !take_long) {
      if (take_long) {
        out.push_back(s[lo++]);
      } else {
        out.push_back(s[hi]);
        if (hi == 0) break;
        --hi;
      }
    }
  }
  return join(std::move(out), items.zeros);
}

std::vector<std::uint32_t> permute_a2(std::span<const std::uint64_t> workloads) {
  auto items = split_sorted(workloads);
  auto& s = items.positive;
  const std::size_t M = s.size();
  // 1-based positions i and M+1-i are 0-based i-1 and M-i.
  for (std::size_t i = 2; 2 * i <= M; i += 2) std::swap(s[i - 1], s[M - i]);
  return join(std::move(s), items.zeros);
}

std::vector<std::uint32_t> permute_a3(std::span<const std::uint64_t> workloads, std::uint32_t parts, Engine& rng) {
  if (parts == 0) throw Error("number of parts must be positive");
  auto items = split_sorted(workloads);
  auto& s = items.positive;

  std::vector<std::vector<std::uint32_t>> tiers(parts);
  for (auto& t : tiers) t.reserve(s.size() / parts + 1);
  for (std::size_t begin = 0; begin < s.size(); begin += parts) {
    const auto end = std::min(s.size(), begin + parts);
    std::shuffle(s.begin() + static_cast<std::ptrdiff_t>(begin), s.begin() + static_cast<std::ptrdiff_t>(end), rng);
    for (std::size_t k = begin; k < end; ++k) tiers[k - begin].push_back(s[k]);
  }
  std::vector<std::uint32_t> out;
  out.reserve(workloads.size());
  for (auto& t : tiers) {
    std::shuffle(t.begin(), t.end(), rng);
    out.insert(out.end(), t.begin(), t.end());
  }
  return join(std::move(out), items.zeros);
}

std::vector<std::uint32_t> permute_baseline(std::span<const std::uint64_t> workloads, Engine& rng) {
  std::vector<std::uint32_t> order(workloads.size());
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<std::uint32_t> permute(Algorithm algorithm, std::span<const std::uint64_t> workloads,
                                   std::uint32_t parts, Engine& rng) {
  switch (algorithm) {
    case Algorithm::baseline: return permute_baseline(workloads, rng);
    case Algorithm::a1: return permute_a1(workloads);
    case Algorithm::a2: return permute_a2(workloads);
    case Algorithm::a3: return permute_a3(workloads, parts, rng);
  }
  throw Error("unknown algorithm");
}

namespace {

std::vector<std::uint64_t> gather(std::span<const std::uint64_t> workloads, const std::vector<std::uint32_t>& order) {
  std::vector<std::uint64_t> out(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) out[i] = workloads[order[i]];
  return out;
}

void check_parts(const WorkloadMatrix& matrix, std::uint32_t parts, bool rows_too) {
  if (parts == 0) throw Error("number of parts must be positive");
  if (rows_too && parts > matrix.rows())
    throw DimensionError("P=" + std::to_string(parts) + " exceeds the " + std::to_string(matrix.rows()) + " rows");
  if (parts > matrix.cols())
    throw DimensionError("P=" + std::to_string(parts) + " exceeds the " + std::to_string(matrix.cols()) + " columns");
}

Engine repeat_stream(std::uint64_t seed, std::uint32_t repeat, std::uint64_t salt) {
  return make_stream({seed, repeat, salt});
}

constexpr std::uint64_t kFullSalt = 0;
constexpr std::uint64_t kColumnSalt = 1;

Partitioning one_trial(const WorkloadMatrix& matrix, Algorithm algorithm, std::uint32_t parts, Engine& rng) {
  Partitioning p;
  p.parts = parts;
  p.row_perm = permute(algorithm, matrix.row_workloads(), parts, rng);
  p.col_perm = permute(algorithm, matrix.col_workloads(), parts, rng);
  p.row_cuts = equal_token_cut(gather(matrix.row_workloads(), p.row_perm), parts);
  p.col_cuts = equal_token_cut(gather(matrix.col_workloads(), p.col_perm), parts);
  return p;
}

Partitioning column_trial(const WorkloadMatrix& matrix, const Partitioning& rows_from, Algorithm algorithm,
                          Engine& rng) {
  Partitioning p;
  p.parts = rows_from.parts;
  p.row_perm = rows_from.row_perm;
  p.row_cuts = rows_from.row_cuts;
  p.col_perm = permute(algorithm, matrix.col_workloads(), p.parts, rng);
  p.col_cuts = equal_token_cut(gather(matrix.col_workloads(), p.col_perm), p.parts);
  return p;
}

template <typename Trial>
PartitionResult best_of(const WorkloadMatrix& matrix, std::uint32_t trials, bool parallel, Trial&& trial) {
  if (trials == 1) {
    PartitionResult only;
    only.partitioning = trial(0);
    only.report = parallel ? balance_report(matrix, only.partitioning) : balance_report_serial(matrix, only.partitioning);
    return only;
  }
  std::vector<double> eta(trials);
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(dynamic, 1) if (parallel && trials > 1)
  for (std::int64_t r = 0; r < n; ++r)
    eta[r] = balance_report_serial(matrix, trial(static_cast<std::uint32_t>(r))).eta;

  // First maximum wins; the winning trial is replayed from its stream.
  const auto best = static_cast<std::uint32_t>(std::max_element(eta.begin(), eta.end()) - eta.begin());
  PartitionResult result;
  result.partitioning = trial(best);
  result.report = balance_report_serial(matrix, result.partitioning);
  result.best_repeat = best;
  return result;
}

PartitionResult run_partition(const WorkloadMatrix& matrix, Algorithm algorithm, const PartitionerConfig& config,
                              bool parallel) {
  check_parts(matrix, config.parts, true);
  if (config.repeats == 0) throw Error("repeats must be at least 1");
  const auto trials = is_randomized(algorithm) ? config.repeats : 1u;
  return best_of(matrix, trials, parallel, [&](std::uint32_t r) {
    auto rng = repeat_stream(config.seed, r, kFullSalt);
    return one_trial(matrix, algorithm, config.parts, rng);
  });
}

}  // namespace

PartitionResult partition(const WorkloadMatrix& matrix, Algorithm algorithm, const PartitionerConfig& config) {
  return run_partition(matrix, algorithm, config, true);
}

PartitionResult partition_serial(const WorkloadMatrix& matrix, Algorithm algorithm, const PartitionerConfig& config) {
  return run_partition(matrix, algorithm, config, false);
}

PartitionResult partition_columns(const WorkloadMatrix& matrix, const Partitioning& rows_from, Algorithm algorithm,
                                  const PartitionerConfig& config) {
  if (rows_from.parts != config.parts) throw DimensionError("row partitioning has a different P");
  if (rows_from.row_perm.size() != matrix.rows()) throw DimensionError("row partitioning does not match matrix rows");
  check_parts(matrix, config.parts, false);
  if (config.repeats == 0) throw Error("repeats must be at least 1");
  const auto trials = is_randomized(algorithm) ? config.repeats : 1u;
  return best_of(matrix, trials, true, [&](std::uint32_t r) {
    auto rng = repeat_stream(config.seed, r, kColumnSalt);
    return column_trial(matrix, rows_from, algorithm, rng);
  });
}

BalanceReport balance_report_for_groups(const WorkloadMatrix& matrix, std::span<const std::uint32_t> row_groups,
                                        std::span<const std::uint32_t> col_groups, std::uint32_t parts) {
  if (row_groups.size() != matrix.rows() || col_groups.size() != matrix.cols())
    throw DimensionError("group assignment does not match the workload matrix");
  BalanceReport r;
  r.parts = parts;
  r.partition_costs.assign(std::size_t{parts} * parts, 0);
  for (std::uint32_t j = 0; j < matrix.rows(); ++j) {
    const auto cols = matrix.row_cols(j);
    const auto vals = matrix.row_values(j);
    for (std::size_t i = 0; i < cols.size(); ++i)
      r.partition_costs[std::size_t{row_groups[j]} * parts + col_groups[cols[i]]] += vals[i];
  }
  finish_report(r, matrix.total());
  return r;
}

OracleResult oracle_optimal(const WorkloadMatrix& matrix, std::uint32_t parts) {
  if (parts == 0) throw Error("number of parts must be positive");
  const std::uint32_t D = matrix.rows();
  const std::uint32_t W = matrix.cols();
  const double space = std::pow(static_cast<double>(parts), static_cast<double>(D) + W);
  if (space > kOracleSearchLimit)
    throw TooLargeError("oracle search space " + std::to_string(parts) + "^" + std::to_string(D + W) +
                        " exceeds 1e7 assignments");

  const std::uint32_t P = parts;
  std::vector<std::uint32_t> dense(std::size_t{D} * W, 0);
  for (std::uint32_t j = 0; j < D; ++j) {
    const auto cols = matrix.row_cols(j);
    const auto vals = matrix.row_values(j);
    for (std::size_t i = 0; i < cols.size(); ++i) dense[std::size_t{j} * W + cols[i]] = vals[i];
  }

  // Odometer over base-P digit vectors; returns false after the last one.
  auto advance = [P](std::vector<std::uint32_t>& digits) {
    for (auto& d : digits) {
      if (++d < P) return true;
      d = 0;
    }
    return false;
  };

  OracleResult best;
  best.total_cost = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint32_t> rg(D, 0), cg(W, 0);
  std::vector<std::uint64_t> group_rows(std::size_t{P} * W);  // sum over rows of group m, per column
  std::vector<std::uint64_t> cost(std::size_t{P} * P);
  do {
    std::fill(group_rows.begin(), group_rows.end(), 0);
    for (std::uint32_t j = 0; j < D; ++j)
      for (std::uint32_t w = 0; w < W; ++w) group_rows[std::size_t{rg[j]} * W + w] += dense[std::size_t{j} * W + w];
    std::fill(cg.begin(), cg.end(), 0);
    do {
      std::fill(cost.begin(), cost.end(), 0);
      for (std::uint32_t m = 0; m < P; ++m)
        for (std::uint32_t w = 0; w < W; ++w) cost[std::size_t{m} * P + cg[w]] += group_rows[std::size_t{m} * W + w];
      std::uint64_t total = 0;
      for (std::uint32_t l = 0; l < P; ++l) {
        std::uint64_t mx = 0;
        for (std::uint32_t m = 0; m < P; ++m) mx = std::max(mx, cost[std::size_t{m} * P + (m + l) % P]);
        total += mx;
      }
      if (total < best.total_cost) {
        best.total_cost = total;
        best.row_groups = rg;
        best.col_groups = cg;
      }
    } while (advance(cg));
  } while (advance(rg));

  best.eta = best.total_cost == 0 ? 1.0
                                  : (static_cast<double>(matrix.total()) / P) / static_cast<double>(best.total_cost);
  return best;
}

}  // namespace ptm
