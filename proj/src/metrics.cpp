#include "ptm/metrics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ptm/error.hpp"

namespace ptm {

namespace {

// Kahan-compensated running sum.
struct CompensatedSum {
  Probability sum = 0;
  Probability carry = 0;

  void add(Probability x) {
    const Probability y = x - carry;
    const Probability t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

TopicEstimates estimate(const TopicCounts& c, const ModelConfig& config) {
  TopicEstimates e;
  e.docs = c.docs;
  e.topics = c.topics;
  e.words = c.words;
  e.timestamps = c.timestamps;
  const std::size_t K = c.topics;
  const Probability alpha = config.alpha;
  const Probability beta = config.beta;
  const Probability gamma = config.gamma;

  e.theta.resize(std::size_t{c.docs} * K);
  for (std::uint32_t j = 0; j < c.docs; ++j) {
    const auto* row = &c.doc_topic[j * K];
    const Probability norm = static_cast<Probability>(std::accumulate(row, row + K, std::int64_t{0})) + K * alpha;
    for (std::size_t k = 0; k < K; ++k) e.theta[j * K + k] = (row[k] + alpha) / norm;
  }

  e.phi.resize(K * c.words);
  for (std::size_t k = 0; k < K; ++k) {
    const Probability norm = static_cast<Probability>(c.topic_total[k]) + c.words * beta;
    for (std::uint32_t w = 0; w < c.words; ++w) e.phi[k * c.words + w] = (c.word_topic[w * K + k] + beta) / norm;
  }

  if (c.timestamps > 0) {
    e.pi.resize(K * c.timestamps);
    for (std::size_t k = 0; k < K; ++k) {
      const Probability norm = static_cast<Probability>(c.ts_total[k]) + c.timestamps * gamma;
      for (std::uint32_t t = 0; t < c.timestamps; ++t) e.pi[k * c.timestamps + t] = (c.ts_topic[t * K + k] + gamma) / norm;
    }
  }
  return e;
}

double training_perplexity(const Corpus& corpus, const TopicEstimates& e) {
  if (corpus.doc_count != e.docs || corpus.vocab_size != e.words)
    throw DimensionError("estimates do not match the corpus dimensions");
  if (corpus.total_tokens == 0) throw Error("perplexity of an empty corpus is undefined");

  std::vector<CompensatedSum> doc_loglik(corpus.doc_count);
  const auto D = static_cast<std::int64_t>(corpus.doc_count);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t j = 0; j < D; ++j) {
    const Probability* theta = &e.theta[static_cast<std::size_t>(j) * e.topics];
    auto& acc = doc_loglik[j];
    for (const auto& wc : corpus.docs[j]) {
      Probability p = 0;
      for (std::uint32_t k = 0; k < e.topics; ++k) p += theta[k] * e.phi[std::size_t{k} * e.words + wc.word];
      acc.add(wc.count * std::log(p));
    }
  }
  CompensatedSum total;
  for (const auto& d : doc_loglik) {
    total.add(d.sum);
    total.add(-d.carry);
  }
  return static_cast<double>(std::exp(-total.sum / static_cast<Probability>(corpus.total_tokens)));
}

std::vector<std::pair<std::uint32_t, Probability>> top_words(const TopicEstimates& e, std::uint32_t topic,
                                                             std::size_t n) {
  if (topic >= e.topics) throw BoundsError("topic " + std::to_string(topic) + " out of range");
  const Probability* row = &e.phi[std::size_t{topic} * e.words];
  std::vector<std::uint32_t> ids(e.words);
  std::iota(ids.begin(), ids.end(), 0u);
  n = std::min<std::size_t>(n, e.words);
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [row](std::uint32_t a, std::uint32_t b) { return row[a] != row[b] ? row[a] > row[b] : a < b; });
  std::vector<std::pair<std::uint32_t, Probability>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(ids[i], row[ids[i]]);
  return out;
}

}  // namespace ptm
