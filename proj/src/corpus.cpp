#include "ptm/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <string_view>

#include "ptm/error.hpp"
#include "ptm/random.hpp"

namespace ptm {

std::uint64_t Corpus::doc_length(std::uint32_t doc) const {
  std::uint64_t n = 0;
  for (const auto& wc : docs[doc]) n += wc.count;
  return n;
}

std::uint64_t Corpus::nonzeros() const {
  std::uint64_t n = 0;
  for (const auto& d : docs) n += d.size();
  return n;
}

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// Splits on spaces/tabs and parses each field as T. Returns false on any
// junk or on a field count other than `want`.
template <typename T, std::size_t N>
bool parse_fields(std::string_view line, std::array<T, N>& out) {
  std::size_t got = 0;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    if (got == N) return false;
    auto [next, ec] = std::from_chars(p, end, out[got]);
    if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' && *next != '\r'))
      return false;
    ++got;
    p = next;
  }
  return got == N;
}

std::uint64_t read_header_value(std::istream& in, std::size_t& line_no, const char* name) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::array<std::uint64_t, 1> v{};
    if (!parse_fields(line, v)) throw ParseError(std::string("expected header value ") + name, line_no);
    return v[0];
  }
  throw FormatError(std::string("missing header line ") + name);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

}  // namespace

Corpus load_uci_bow(std::istream& docword, std::istream* vocab) {
  std::size_t line_no = 0;
  const auto D = read_header_value(docword, line_no, "D");
  const auto W = read_header_value(docword, line_no, "W");
  const auto nnz = read_header_value(docword, line_no, "NNZ");
  if (D == 0 || W == 0) throw FormatError("header declares an empty corpus");
  if (D > UINT32_MAX || W > UINT32_MAX) throw FormatError("header dimensions exceed 32-bit ids");

  Corpus c;
  c.doc_count = static_cast<std::uint32_t>(D);
  c.vocab_size = static_cast<std::uint32_t>(W);
  c.docs.resize(D);

  std::uint64_t entries = 0;
  std::string line;
  while (std::getline(docword, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::array<std::uint64_t, 3> f{};
    if (!parse_fields(line, f)) throw ParseError("expected `docID wordID count`", line_no);
    const auto [doc, word, count] = f;
    if (doc < 1 || doc > D)
      throw BoundsError("line " + std::to_string(line_no) + ": docID " + std::to_string(doc) +
                        " outside 1.." + std::to_string(D));
    if (word < 1 || word > W)
      throw BoundsError("line " + std::to_string(line_no) + ": wordID " + std::to_string(word) +
                        " outside 1.." + std::to_string(W));
    if (count == 0 || count > UINT32_MAX) throw ParseError("count must be a positive 32-bit value", line_no);
    c.docs[doc - 1].push_back({static_cast<std::uint32_t>(word - 1), static_cast<std::uint32_t>(count)});
    c.total_tokens += count;
    ++entries;
  }
  if (entries != nnz)
    throw FormatError("header declares " + std::to_string(nnz) + " entries, found " +
                      std::to_string(entries));

  for (auto& d : c.docs) {
    std::sort(d.begin(), d.end(), [](const WordCount& a, const WordCount& b) { return a.word < b.word; });
    std::vector<WordCount> merged;
    merged.reserve(d.size());
    for (const auto& wc : d) {
      if (!merged.empty() && merged.back().word == wc.word)
        merged.back().count += wc.count;
      else
        merged.push_back(wc);
    }
    d = std::move(merged);
  }

  if (vocab != nullptr) {
    while (std::getline(*vocab, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      c.vocab.push_back(line);
    }
    while (!c.vocab.empty() && c.vocab.size() > W && c.vocab.back().empty()) c.vocab.pop_back();
    if (c.vocab.size() != W)
      throw FormatError("vocabulary has " + std::to_string(c.vocab.size()) + " words, header declares " +
                        std::to_string(W));
  }
  return c;
}

Corpus load_uci_bow_file(const std::string& docword_path, const std::optional<std::string>& vocab_path) {
  auto in = open_or_throw(docword_path);
  if (!vocab_path) return load_uci_bow(in);
  auto v = open_or_throw(*vocab_path);
  return load_uci_bow(in, &v);
}

void write_uci_bow(std::ostream& out, const Corpus& corpus) {
  out << corpus.doc_count << '\n' << corpus.vocab_size << '\n' << corpus.nonzeros() << '\n';
  for (std::uint32_t j = 0; j < corpus.doc_count; ++j)
    for (const auto& wc : corpus.docs[j]) out << j + 1 << ' ' << wc.word + 1 << ' ' << wc.count << '\n';
}

void write_vocab(std::ostream& out, const Corpus& corpus) {
  for (const auto& w : corpus.vocab) out << w << '\n';
}

TimestampTable make_timestamps(const std::vector<int>& doc_years, std::uint32_t length) {
  if (length == 0) throw Error("timestamp array length must be positive");
  std::vector<int> years = doc_years;
  std::sort(years.begin(), years.end());
  years.erase(std::unique(years.begin(), years.end()), years.end());

  TimestampTable t;
  t.length = length;
  t.vocab_size = static_cast<std::uint32_t>(years.size());
  t.arrays.reserve(doc_years.size());
  for (int y : doc_years) {
    const auto id = static_cast<std::uint32_t>(std::lower_bound(years.begin(), years.end(), y) - years.begin());
    t.arrays.emplace_back(length, id);
  }
  t.years = std::move(years);
  return t;
}

TimestampTable load_timestamps(std::istream& in, const Corpus& corpus, std::uint32_t length) {
  std::vector<std::optional<int>> years(corpus.doc_count);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::array<long long, 2> f{};
    if (!parse_fields(line, f)) throw ParseError("expected `docID year`", line_no);
    if (f[0] < 1 || f[0] > corpus.doc_count)
      throw BoundsError("line " + std::to_string(line_no) + ": docID " + std::to_string(f[0]) +
                        " outside 1.." + std::to_string(corpus.doc_count));
    auto& slot = years[f[0] - 1];
    if (slot) throw ParseError("docID " + std::to_string(f[0]) + " listed twice", line_no);
    slot = static_cast<int>(f[1]);
  }
  std::vector<int> flat;
  flat.reserve(years.size());
  for (std::size_t j = 0; j < years.size(); ++j) {
    if (!years[j]) throw CoverageError("no timestamp for document " + std::to_string(j + 1));
    flat.push_back(*years[j]);
  }
  return make_timestamps(flat, length);
}

TimestampTable load_timestamps_file(const std::string& path, const Corpus& corpus, std::uint32_t length) {
  auto in = open_or_throw(path);
  return load_timestamps(in, corpus, length);
}

void write_timestamps(std::ostream& out, const TimestampTable& table) {
  for (std::uint32_t j = 0; j < table.doc_count(); ++j)
    out << j + 1 << '\t' << table.years[table.arrays[j].front()] << '\n';
}

Corpus generate_synthetic(std::uint32_t doc_count, std::uint32_t vocab_size, std::uint32_t mean_doc_len,
                          double zipf_exponent, std::uint64_t seed) {
  if (doc_count == 0 || vocab_size == 0 || mean_doc_len == 0) throw Error("synthetic corpus dimensions must be positive");
  if (!(zipf_exponent > 0)) throw Error("zipf exponent must be positive");
  Engine rng(stream_seed({seed, 0x636f72707573ULL}));

  // Document lengths: every document gets one token, the remaining budget is
  // split by lognormal weights with largest-remainder rounding.
  const std::uint64_t total = std::uint64_t{doc_count} * mean_doc_len;
  const std::uint64_t spare = total - doc_count;
  std::lognormal_distribution<double> skew(0.0, 0.9);
  std::vector<double> weight(doc_count);
  for (auto& w : weight) w = skew(rng);
  const double wsum = std::accumulate(weight.begin(), weight.end(), 0.0);

  std::vector<std::uint64_t> length(doc_count, 1);
  std::vector<std::pair<double, std::uint32_t>> remainder(doc_count);
  std::uint64_t assigned = 0;
  for (std::uint32_t j = 0; j < doc_count; ++j) {
    const double share = static_cast<double>(spare) * weight[j] / wsum;
    const auto whole = static_cast<std::uint64_t>(std::floor(share));
    length[j] += whole;
    assigned += whole;
    remainder[j] = {share - static_cast<double>(whole), j};
  }
  std::sort(remainder.begin(), remainder.end(),
            [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
  for (std::uint64_t i = 0; assigned < spare; ++i, ++assigned) ++length[remainder[i % doc_count].second];

  std::vector<double> zipf(vocab_size);
  for (std::uint32_t r = 0; r < vocab_size; ++r) zipf[r] = 1.0 / std::pow(static_cast<double>(r + 1), zipf_exponent);
  std::discrete_distribution<std::uint32_t> word_dist(zipf.begin(), zipf.end());

  Corpus c;
  c.doc_count = doc_count;
  c.vocab_size = vocab_size;
  c.docs.resize(doc_count);
  std::map<std::uint32_t, std::uint32_t> counts;
  for (std::uint32_t j = 0; j < doc_count; ++j) {
    counts.clear();
    for (std::uint64_t t = 0; t < length[j]; ++t) ++counts[word_dist(rng)];
    c.docs[j].reserve(counts.size());
    for (const auto& [w, n] : counts) c.docs[j].push_back({w, n});
  }
  c.total_tokens = total;
  return c;
}

std::vector<int> generate_synthetic_years(std::uint32_t doc_count, std::uint32_t year_count, int first_year,
                                          std::uint64_t seed) {
  if (year_count == 0) throw Error("year_count must be positive");
  Engine rng(stream_seed({seed, 0x79656172ULL}));
  std::uniform_int_distribution<int> pick(0, static_cast<int>(year_count) - 1);
  std::vector<int> years(doc_count);
  for (auto& y : years) y = first_year + pick(rng);
  return years;
}

}  // namespace ptm
