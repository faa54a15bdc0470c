#include "ptm/workload.hpp"

#include <omp.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "ptm/error.hpp"

namespace ptm {

WorkloadMatrix::WorkloadMatrix(std::uint32_t rows, std::uint32_t cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols), row_workloads_(rows, 0), col_workloads_(cols, 0) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  row_ptr_.assign(std::size_t{rows} + 1, 0);
  std::int64_t last_row = -1;
  for (const auto& e : entries) {
    if (e.row >= rows || e.col >= cols) throw BoundsError("workload entry outside matrix dimensions");
    if (e.value == 0) continue;
    if (last_row == e.row && col_idx_.back() == e.col) {
      values_.back() += e.value;
    } else {
      col_idx_.push_back(e.col);
      values_.push_back(e.value);
    }
    last_row = e.row;
    row_ptr_[e.row + 1] = col_idx_.size();
    row_workloads_[e.row] += e.value;
    col_workloads_[e.col] += e.value;
    total_ += e.value;
  }
  // Rows without entries inherit the previous boundary.
  for (std::size_t r = 1; r < row_ptr_.size(); ++r) row_ptr_[r] = std::max(row_ptr_[r], row_ptr_[r - 1]);
}

std::uint32_t WorkloadMatrix::at(std::uint32_t row, std::uint32_t col) const {
  const auto cols = row_cols(row);
  const auto it = std::lower_bound(cols.begin(), cols.end(), col);
  if (it == cols.end() || *it != col) return 0;
  return row_values(row)[static_cast<std::size_t>(it - cols.begin())];
}

WorkloadMatrix WorkloadMatrix::transposed() const {
  std::vector<Entry> entries;
  entries.reserve(nonzeros());
  for (std::uint32_t r = 0; r < rows_; ++r) {
    const auto c = row_cols(r);
    const auto v = row_values(r);
    for (std::size_t i = 0; i < c.size(); ++i) entries.push_back({c[i], r, v[i]});
  }
  return WorkloadMatrix(cols_, rows_, std::move(entries));
}

WorkloadMatrix WorkloadMatrix::from_dense(const std::vector<std::vector<std::uint32_t>>& dense) {
  const auto rows = static_cast<std::uint32_t>(dense.size());
  const auto cols = rows == 0 ? 0u : static_cast<std::uint32_t>(dense.front().size());
  std::vector<Entry> entries;
  for (std::uint32_t r = 0; r < rows; ++r) {
    if (dense[r].size() != cols) throw DimensionError("ragged dense matrix");
    for (std::uint32_t c = 0; c < cols; ++c)
      if (dense[r][c] > 0) entries.push_back({r, c, dense[r][c]});
  }
  return WorkloadMatrix(rows, cols, std::move(entries));
}

namespace {

std::vector<std::uint32_t> groups_of(const std::vector<std::uint32_t>& perm, const std::vector<std::uint32_t>& cuts) {
  std::vector<std::uint32_t> g(perm.size(), 0);
  for (std::size_t m = 0; m + 1 < cuts.size(); ++m)
    for (std::uint32_t i = cuts[m]; i < cuts[m + 1]; ++i) g[perm[i]] = static_cast<std::uint32_t>(m);
  return g;
}

bool is_permutation_of_iota(const std::vector<std::uint32_t>& perm) {
  std::vector<char> seen(perm.size(), 0);
  for (auto v : perm) {
    if (v >= perm.size() || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

bool valid_cuts(const std::vector<std::uint32_t>& cuts, std::uint32_t parts, std::size_t size) {
  if (cuts.size() != std::size_t{parts} + 1 || cuts.front() != 0 || cuts.back() != size) return false;
  return std::is_sorted(cuts.begin(), cuts.end());
}

void check_dimensions(const WorkloadMatrix& matrix, const Partitioning& p) {
  if (p.parts == 0) throw DimensionError("partitioning has zero parts");
  if (p.row_perm.size() != matrix.rows() || p.col_perm.size() != matrix.cols())
    throw DimensionError("partitioning dimensions do not match the workload matrix");
  if (!valid_cuts(p.row_cuts, p.parts, p.row_perm.size()) || !valid_cuts(p.col_cuts, p.parts, p.col_perm.size()))
    throw DimensionError("partitioning cuts are malformed");
}

}  // namespace

std::vector<std::uint32_t> Partitioning::row_groups() const { return groups_of(row_perm, row_cuts); }
std::vector<std::uint32_t> Partitioning::col_groups() const { return groups_of(col_perm, col_cuts); }

bool Partitioning::well_formed() const {
  return parts > 0 && is_permutation_of_iota(row_perm) && is_permutation_of_iota(col_perm) &&
         valid_cuts(row_cuts, parts, row_perm.size()) && valid_cuts(col_cuts, parts, col_perm.size());
}

Partitioning Partitioning::transposed() const { return {parts, col_perm, row_perm, col_cuts, row_cuts}; }

std::string BalanceReport::to_text() const {
  std::ostringstream out;
  out.precision(10);
  out << "P=" << parts << '\n'
      << "total_cost=" << total_cost << '\n'
      << "optimum=" << optimum << '\n'
      << "eta=" << eta << '\n'
      << "predicted_speedup=" << predicted_speedup << '\n'
      << "epoch_max=";
  for (std::size_t l = 0; l < epoch_max.size(); ++l) out << (l ? "," : "") << epoch_max[l];
  out << '\n';
  return out.str();
}

WorkloadMatrix build_workload(const Corpus& corpus) {
  std::vector<WorkloadMatrix::Entry> entries;
  entries.reserve(corpus.nonzeros());
  for (std::uint32_t j = 0; j < corpus.doc_count; ++j)
    for (const auto& wc : corpus.docs[j]) entries.push_back({j, wc.word, wc.count});
  return WorkloadMatrix(corpus.doc_count, corpus.vocab_size, std::move(entries));
}

WorkloadMatrix build_bot_workload(const TimestampTable& timestamps, std::uint32_t doc_count) {
  if (timestamps.doc_count() != doc_count)
    throw CoverageError("timestamp table covers " + std::to_string(timestamps.doc_count()) + " of " +
                        std::to_string(doc_count) + " documents");
  std::vector<WorkloadMatrix::Entry> entries;
  entries.reserve(std::size_t{doc_count} * timestamps.length);
  for (std::uint32_t j = 0; j < doc_count; ++j)
    for (auto t : timestamps.arrays[j]) entries.push_back({j, t, 1});
  return WorkloadMatrix(doc_count, timestamps.vocab_size, std::move(entries));
}

void finish_report(BalanceReport& r, std::uint64_t total_tokens) {
  const auto P = r.parts;
  r.epoch_max.assign(P, 0);
  for (std::uint32_t l = 0; l < P; ++l)
    for (std::uint32_t m = 0; m < P; ++m) r.epoch_max[l] = std::max(r.epoch_max[l], r.cost(m, (m + l) % P));
  r.total_cost = std::accumulate(r.epoch_max.begin(), r.epoch_max.end(), std::uint64_t{0});
  r.optimum = static_cast<double>(total_tokens) / P;
  // An empty matrix is trivially balanced.
  r.eta = r.total_cost == 0 ? 1.0 : r.optimum / static_cast<double>(r.total_cost);
  r.predicted_speedup = r.eta * P;
}

BalanceReport balance_report_serial(const WorkloadMatrix& matrix, const Partitioning& partitioning) {
  check_dimensions(matrix, partitioning);
  const auto P = partitioning.parts;
  const auto rg = partitioning.row_groups();
  const auto cg = partitioning.col_groups();

  BalanceReport r;
  r.parts = P;
  r.partition_costs.assign(std::size_t{P} * P, 0);
  for (std::uint32_t j = 0; j < matrix.rows(); ++j) {
    auto* row = r.partition_costs.data() + std::size_t{rg[j]} * P;
    const auto cols = matrix.row_cols(j);
    const auto vals = matrix.row_values(j);
    for (std::size_t i = 0; i < cols.size(); ++i) row[cg[cols[i]]] += vals[i];
  }
  finish_report(r, matrix.total());
  return r;
}

BalanceReport balance_report(const WorkloadMatrix& matrix, const Partitioning& partitioning) {
  check_dimensions(matrix, partitioning);
  const auto P = partitioning.parts;
  const auto rg = partitioning.row_groups();
  const auto cg = partitioning.col_groups();
  const std::size_t cells = std::size_t{P} * P;
  const auto rows = static_cast<std::int64_t>(matrix.rows());

  BalanceReport r;
  r.parts = P;
  r.partition_costs.assign(cells, 0);
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(cells, 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t j = 0; j < rows; ++j) {
      auto* row = local.data() + std::size_t{rg[j]} * P;
      const auto cols = matrix.row_cols(static_cast<std::uint32_t>(j));
      const auto vals = matrix.row_values(static_cast<std::uint32_t>(j));
      for (std::size_t i = 0; i < cols.size(); ++i) row[cg[cols[i]]] += vals[i];
    }
#pragma omp critical(ptm_balance_reduce)
    for (std::size_t c = 0; c < cells; ++c) r.partition_costs[c] += local[c];
  }
  finish_report(r, matrix.total());
  return r;
}

std::vector<std::uint32_t> equal_token_cut(std::span<const std::uint64_t> workloads, std::uint32_t parts) {
  const auto M = workloads.size();
  if (parts == 0) throw Error("number of parts must be positive");
  if (parts > M)
    throw DimensionError("cannot cut " + std::to_string(M) + " items into " + std::to_string(parts) + " groups");
  const std::uint64_t total = std::accumulate(workloads.begin(), workloads.end(), std::uint64_t{0});

  std::vector<std::uint32_t> cuts(std::size_t{parts} + 1, 0);
  cuts[parts] = static_cast<std::uint32_t>(M);
  std::uint64_t prefix = 0;
  std::size_t i = 0;
  for (std::uint32_t k = 1; k < parts; ++k) {
    // prefix * P >= k * total  <=>  prefix >= k * total / P, exactly in integers.
    const unsigned __int128 quota = static_cast<unsigned __int128>(k) * total;
    while (static_cast<unsigned __int128>(prefix) * parts < quota) prefix += workloads[i++];
    cuts[k] = static_cast<std::uint32_t>(i);
  }
  return cuts;
}

}  // namespace ptm
