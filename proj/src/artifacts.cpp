#include "ptm/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ptm/error.hpp"

namespace ptm {

void Manifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

std::optional<std::string> Manifest::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

void Manifest::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

Manifest Manifest::read(std::istream& in, const std::string& name) {
  Manifest m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw FormatError(name + ": line " + std::to_string(line_no) + " is not key=value");
    m.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return m;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

namespace {

constexpr const char* kCountsMagic = "ptm-counts";

template <typename Get>
void write_matrix(std::ostream& out, std::uint32_t rows, std::uint32_t cols, Get&& get) {
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) out << (c ? " " : "") << get(r, c);
    out << '\n';
  }
}

template <typename Set>
void read_matrix(std::istream& in, const std::string& name, const char* what, std::uint32_t rows, std::uint32_t cols,
                 Set&& set) {
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) {
      long long v = 0;
      if (!(in >> v) || v < 0) throw FormatError(name + ": truncated or negative " + what + " counts");
      set(r, c, static_cast<std::int32_t>(v));
    }
}

std::uint32_t header_field(const std::string& token, const std::string& key, const std::string& name) {
  if (token.rfind(key + "=", 0) != 0) throw FormatError(name + ": corrupted header, expected " + key + "=");
  try {
    std::size_t used = 0;
    const auto v = std::stoul(token.substr(key.size() + 1), &used);
    if (used != token.size() - key.size() - 1) throw std::invalid_argument(token);
    return static_cast<std::uint32_t>(v);
  } catch (const std::logic_error&) {
    throw FormatError(name + ": corrupted header value " + token);
  }
}

}  // namespace

void write_counts(std::ostream& out, const CountsDump& dump) {
  const auto& c = dump.counts;
  out << kCountsMagic << " 1 mode=" << to_string(dump.mode) << " docs=" << c.docs << " topics=" << c.topics
      << " words=" << c.words << " timestamps=" << c.timestamps << '\n';
  write_matrix(out, c.docs, c.topics, [&](auto j, auto k) { return c.doc(j, k); });
  write_matrix(out, c.topics, c.words, [&](auto k, auto w) { return c.word(k, w); });
  if (dump.mode == Mode::bot) write_matrix(out, c.topics, c.timestamps, [&](auto k, auto t) { return c.stamp(k, t); });
}

CountsDump read_counts(std::istream& in, const std::string& name) {
  std::string header;
  if (!std::getline(in, header)) throw FormatError(name + ": empty counts dump");
  std::istringstream hs(header);
  std::string magic, version, mode_tok, docs_tok, topics_tok, words_tok, ts_tok, extra;
  hs >> magic >> version >> mode_tok >> docs_tok >> topics_tok >> words_tok >> ts_tok;
  if (magic != kCountsMagic || version != "1" || !hs || (hs >> extra))
    throw FormatError(name + ": corrupted header");
  if (mode_tok.rfind("mode=", 0) != 0) throw FormatError(name + ": corrupted header, expected mode=");
  const auto mode = parse_mode(mode_tok.substr(5));
  if (!mode) throw FormatError(name + ": corrupted header, unknown mode " + mode_tok);

  CountsDump dump;
  dump.mode = *mode;
  auto& c = dump.counts;
  c.docs = header_field(docs_tok, "docs", name);
  c.topics = header_field(topics_tok, "topics", name);
  c.words = header_field(words_tok, "words", name);
  c.timestamps = header_field(ts_tok, "timestamps", name);
  if (c.topics == 0 || c.words == 0) throw FormatError(name + ": corrupted header, empty dimensions");
  if ((dump.mode == Mode::bot) != (c.timestamps > 0))
    throw FormatError(name + ": corrupted header, timestamp count inconsistent with mode");

  const std::size_t K = c.topics;
  c.doc_topic.assign(std::size_t{c.docs} * K, 0);
  c.word_topic.assign(std::size_t{c.words} * K, 0);
  c.topic_total.assign(K, 0);
  c.ts_topic.assign(std::size_t{c.timestamps} * K, 0);
  c.ts_total.assign(K, 0);
  read_matrix(in, name, "document-topic", c.docs, c.topics, [&](auto j, auto k, auto v) { c.doc_topic[j * K + k] = v; });
  read_matrix(in, name, "topic-word", c.topics, c.words, [&](auto k, auto w, auto v) {
    c.word_topic[w * K + k] = v;
    c.topic_total[k] += v;
  });
  if (dump.mode == Mode::bot)
    read_matrix(in, name, "topic-timestamp", c.topics, c.timestamps, [&](auto k, auto t, auto v) {
      c.ts_topic[t * K + k] = v;
      c.ts_total[k] += v;
    });
  std::string rest;
  if (in >> rest) throw FormatError(name + ": trailing data after counts");
  return dump;
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "iteration,perplexity,seconds\n";
  const auto old = out.precision(17);
  for (const auto& t : trace) out << t.iteration << ',' << t.perplexity << ',' << t.seconds << '\n';
  out.precision(old);
}

std::vector<TracePoint> read_trace_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line) || line != "iteration,perplexity,seconds")
    throw FormatError(name + ": missing trace header");
  std::vector<TracePoint> trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    TracePoint p;
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    if (!(ls >> p.iteration >> c1 >> p.perplexity >> c2 >> p.seconds) || c1 != ',' || c2 != ',')
      throw FormatError(name + ": malformed trace row at line " + std::to_string(line_no));
    trace.push_back(p);
  }
  return trace;
}

void write_partition(std::ostream& out, const Partitioning& partitioning) {
  for (auto g : partitioning.row_groups()) out << g << '\n';
  for (auto g : partitioning.col_groups()) out << g << '\n';
}

}  // namespace ptm
