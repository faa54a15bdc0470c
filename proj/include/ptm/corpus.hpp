#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ptm {

struct WordCount {
  std::uint32_t word = 0;
  std::uint32_t count = 0;

  friend bool operator==(const WordCount&, const WordCount&) = default;
};

/// Bag-of-words corpus with dense 0-based document and word ids.
/// Each document holds its (word, count) pairs sorted by word id.
struct Corpus {
  std::uint32_t doc_count = 0;
  std::uint32_t vocab_size = 0;
  std::vector<std::vector<WordCount>> docs;
  std::uint64_t total_tokens = 0;
  std::vector<std::string> vocab;  // empty when no vocabulary was supplied

  std::uint64_t doc_length(std::uint32_t doc) const;
  std::uint64_t nonzeros() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Per-document timestamp arrays of fixed length. Entries are dense
/// timestamp ids; `years[t]` is the raw value behind id t.
struct TimestampTable {
  std::uint32_t length = 0;  // L
  std::uint32_t vocab_size = 0;  // WTS
  std::vector<std::vector<std::uint32_t>> arrays;
  std::vector<int> years;

  std::uint32_t doc_count() const { return static_cast<std::uint32_t>(arrays.size()); }
  int first_year() const { return years.empty() ? 0 : years.front(); }
  int last_year() const { return years.empty() ? 0 : years.back(); }
};

/// Reads the UCI bag-of-words format: D, W, NNZ header lines followed by
/// `docID wordID count` triples with 1-based ids. Duplicate pairs are summed.
Corpus load_uci_bow(std::istream& docword, std::istream* vocab = nullptr);
Corpus load_uci_bow_file(const std::string& docword_path,
                         const std::optional<std::string>& vocab_path = std::nullopt);

void write_uci_bow(std::ostream& out, const Corpus& corpus);
void write_vocab(std::ostream& out, const Corpus& corpus);

/// Reads `docID year` pairs (1-based docID) and replicates each document's
/// year `length` times. Every document of `corpus` must appear exactly once.
TimestampTable load_timestamps(std::istream& in, const Corpus& corpus, std::uint32_t length);
TimestampTable load_timestamps_file(const std::string& path, const Corpus& corpus,
                                    std::uint32_t length);

/// Builds a table from raw per-document years, mapping distinct years to
/// dense ids in sorted order.
TimestampTable make_timestamps(const std::vector<int>& doc_years, std::uint32_t length);

void write_timestamps(std::ostream& out, const TimestampTable& table);

/// Synthetic corpus with lognormal-skewed document lengths summing to
/// doc_count * mean_doc_len and Zipf-distributed word ids (rank = id).
Corpus generate_synthetic(std::uint32_t doc_count, std::uint32_t vocab_size,
                          std::uint32_t mean_doc_len, double zipf_exponent,
                          std::uint64_t seed);

/// One year per document drawn uniformly from [first_year, first_year + year_count).
std::vector<int> generate_synthetic_years(std::uint32_t doc_count, std::uint32_t year_count,
                                          int first_year, std::uint64_t seed);

}  // namespace ptm
