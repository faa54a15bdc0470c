#include "ptm/sampler.hpp"

#include <omp.h>

#include <algorithm>

#include "ptm/error.hpp"

namespace ptm {

std::string_view to_string(Mode mode) { return mode == Mode::bot ? "bot" : "lda"; }

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "lda") return Mode::lda;
  if (name == "bot") return Mode::bot;
  return std::nullopt;
}

void ModelConfig::validate() const {
  if (num_topics == 0) throw Error("number of topics must be at least 1");
  if (!(alpha > 0) || !(beta > 0) || !(gamma > 0)) throw Error("alpha, beta and gamma must be positive");
  if (iterations == 0) throw Error("iterations must be at least 1");
}

namespace {

// Scratch for the cumulative weights, one per thread.
std::vector<double>& cumulative_buffer(std::uint32_t topics) {
  thread_local std::vector<double> buffer;
  if (buffer.size() < topics) buffer.resize(topics);
  return buffer;
}

// Collapsed conditional draw. Removes the item's current assignment from the
// three count rows, draws from
//   p(k) ~ (doc[k] + alpha) * (item[k] + prior) / (total[k] + prior_sum)
// and adds the item back under the drawn topic.
std::uint32_t draw_topic(std::int32_t* doc_row, std::int32_t* item_row, std::int64_t* totals, std::uint32_t topics,
                         double alpha, double prior, double prior_sum, std::uint32_t current, Engine& rng) {
  --doc_row[current];
  --item_row[current];
  --totals[current];

  auto& cum = cumulative_buffer(topics);
  double acc = 0.0;
  for (std::uint32_t k = 0; k < topics; ++k) {
    acc += (doc_row[k] + alpha) * (item_row[k] + prior) / (static_cast<double>(totals[k]) + prior_sum);
    cum[k] = acc;
  }
  const double u = uniform01(rng) * acc;
  std::uint32_t k = 0;
  while (k + 1 < topics && cum[k] <= u) ++k;

  ++doc_row[k];
  ++item_row[k];
  ++totals[k];
  return k;
}

void check_ids(const GibbsState& s, std::uint32_t doc, std::uint32_t item, std::uint32_t limit, std::uint32_t current) {
  if (doc >= s.counts.docs || item >= limit || current >= s.counts.topics) throw BoundsError("token index out of range");
}

}  // namespace

GibbsState init_state(const Corpus& corpus, const TimestampTable* timestamps, const ModelConfig& config) {
  config.validate();
  if ((config.mode == Mode::bot) != (timestamps != nullptr))
    throw Error(config.mode == Mode::bot ? "bot mode requires a timestamp table"
                                         : "timestamps are only used in bot mode");
  if (timestamps != nullptr && timestamps->doc_count() != corpus.doc_count)
    throw CoverageError("timestamp table covers " + std::to_string(timestamps->doc_count()) + " of " +
                        std::to_string(corpus.doc_count) + " documents");

  const std::uint32_t K = config.num_topics;
  GibbsState s;
  s.mode = config.mode;
  auto& c = s.counts;
  c.docs = corpus.doc_count;
  c.topics = K;
  c.words = corpus.vocab_size;
  c.timestamps = timestamps ? timestamps->vocab_size : 0;

  s.doc_offset.reserve(std::size_t{corpus.doc_count} + 1);
  s.doc_offset.push_back(0);
  s.token_word.reserve(corpus.total_tokens);
  for (const auto& doc : corpus.docs) {
    for (const auto& wc : doc) s.token_word.insert(s.token_word.end(), wc.count, wc.word);
    s.doc_offset.push_back(s.token_word.size());
  }

  Engine rng = make_stream({config.seed, 0x696e6974ULL});
  auto uniform_topic = [&] { return std::min(K - 1, static_cast<std::uint32_t>(uniform01(rng) * K)); };
  s.z.resize(s.token_word.size());
  for (auto& t : s.z) t = uniform_topic();

  if (timestamps != nullptr) {
    s.ts_length = timestamps->length;
    s.ts_token.reserve(std::size_t{corpus.doc_count} * s.ts_length);
    for (const auto& arr : timestamps->arrays) s.ts_token.insert(s.ts_token.end(), arr.begin(), arr.end());
    s.y.resize(s.ts_token.size());
    for (auto& t : s.y) t = uniform_topic();
  }
  s.counts = recount(s);
  return s;
}

TopicCounts recount(const GibbsState& s) {
  TopicCounts c;
  c.docs = s.counts.docs;
  c.topics = s.counts.topics;
  c.words = s.counts.words;
  c.timestamps = s.counts.timestamps;
  const std::size_t K = c.topics;
  c.doc_topic.assign(c.docs * K, 0);
  c.word_topic.assign(c.words * K, 0);
  c.topic_total.assign(K, 0);
  c.ts_topic.assign(c.timestamps * K, 0);
  c.ts_total.assign(K, 0);
  for (std::uint32_t j = 0; j < c.docs; ++j) {
    for (std::size_t i = s.doc_offset[j]; i < s.doc_offset[j + 1]; ++i) {
      ++c.doc_topic[j * K + s.z[i]];
      ++c.word_topic[s.token_word[i] * K + s.z[i]];
      ++c.topic_total[s.z[i]];
    }
    for (std::size_t i = std::size_t{j} * s.ts_length; i < std::size_t{j + 1} * s.ts_length && i < s.y.size(); ++i) {
      ++c.doc_topic[j * K + s.y[i]];
      ++c.ts_topic[s.ts_token[i] * K + s.y[i]];
      ++c.ts_total[s.y[i]];
    }
  }
  return c;
}

bool counts_consistent(const GibbsState& state) { return recount(state) == state.counts; }

std::uint32_t sample_word_token(GibbsState& s, const ModelConfig& config, std::uint32_t doc, std::uint32_t word,
                                std::uint32_t current, Engine& rng) {
  auto& c = s.counts;
  check_ids(s, doc, word, c.words, current);
  const std::size_t K = c.topics;
  return draw_topic(&c.doc_topic[doc * K], &c.word_topic[word * K], c.topic_total.data(), c.topics, config.alpha,
                    config.beta, c.words * config.beta, current, rng);
}

std::uint32_t sample_timestamp_token(GibbsState& s, const ModelConfig& config, std::uint32_t doc,
                                     std::uint32_t stamp, std::uint32_t current, Engine& rng) {
  auto& c = s.counts;
  check_ids(s, doc, stamp, c.timestamps, current);
  const std::size_t K = c.topics;
  return draw_topic(&c.doc_topic[doc * K], &c.ts_topic[stamp * K], c.ts_total.data(), c.topics, config.alpha,
                    config.gamma, c.timestamps * config.gamma, current, rng);
}

Engine sweep_stream(std::uint64_t seed, std::uint64_t iteration, std::uint32_t epoch, std::uint32_t worker) {
  return make_stream({seed, iteration, epoch, worker});
}

void sweep_sequential(GibbsState& s, const ModelConfig& config, std::uint64_t iteration) {
  Engine rng = sweep_stream(config.seed, iteration, 0, 0);
  for (std::uint32_t j = 0; j < s.counts.docs; ++j)
    for (std::size_t i = s.doc_offset[j]; i < s.doc_offset[j + 1]; ++i)
      s.z[i] = sample_word_token(s, config, j, s.token_word[i], s.z[i], rng);
  if (s.mode != Mode::bot) return;
  for (std::size_t i = 0; i < s.y.size(); ++i)
    s.y[i] = sample_timestamp_token(s, config, static_cast<std::uint32_t>(i / s.ts_length), s.ts_token[i], s.y[i], rng);
}

ConflictProbe::ConflictProbe(std::uint32_t docs, std::uint32_t words, std::uint32_t timestamps, std::size_t tokens,
                             std::size_t stamp_slots)
    : doc_owner_(docs),
      word_owner_(words),
      stamp_owner_(timestamps),
      token_visits_(tokens),
      stamp_visits_(stamp_slots) {
  begin_phase();
  reset_visits();
}

void ConflictProbe::begin_phase() {
  for (auto* owners : {&doc_owner_, &word_owner_, &stamp_owner_})
    for (auto& o : *owners) o.store(-1, std::memory_order_relaxed);
  ++phases_;
}

void ConflictProbe::touch(std::atomic<std::int32_t>& owner, std::uint32_t worker) {
  std::int32_t expected = -1;
  const auto me = static_cast<std::int32_t>(worker);
  if (!owner.compare_exchange_strong(expected, me, std::memory_order_relaxed) && expected != me)
    conflicts_.fetch_add(1, std::memory_order_relaxed);
}

bool ConflictProbe::visits_exactly(std::uint32_t sweeps) const {
  auto all = [sweeps](const auto& v) {
    return std::all_of(v.begin(), v.end(), [sweeps](const auto& n) { return n.load() == sweeps; });
  };
  return all(token_visits_) && all(stamp_visits_);
}

void ConflictProbe::reset_visits() {
  for (auto& v : token_visits_) v.store(0);
  for (auto& v : stamp_visits_) v.store(0);
}

namespace {

bool same_row_groups(const Partitioning& a, const Partitioning& b) {
  return a.parts == b.parts && a.row_perm.size() == b.row_perm.size() && a.row_groups() == b.row_groups();
}

// Counting sort of item indices into P*P blocks, preserving item order.
void bucket(std::size_t blocks, std::size_t items, const std::function<std::size_t(std::size_t)>& block_of,
            std::vector<std::size_t>& offset, std::vector<std::size_t>& sorted) {
  offset.assign(blocks + 1, 0);
  for (std::size_t i = 0; i < items; ++i) ++offset[block_of(i) + 1];
  for (std::size_t b = 0; b < blocks; ++b) offset[b + 1] += offset[b];
  std::vector<std::size_t> cursor(offset.begin(), offset.end() - 1);
  sorted.resize(items);
  for (std::size_t i = 0; i < items; ++i) sorted[cursor[block_of(i)]++] = i;
}

}  // namespace

ParallelPlan make_parallel_plan(const GibbsState& s, const Partitioning& word_partitioning,
                                const Partitioning* stamp_partitioning) {
  const auto P = word_partitioning.parts;
  if (word_partitioning.row_perm.size() != s.counts.docs || word_partitioning.col_perm.size() != s.counts.words)
    throw DimensionError("word partitioning does not match the corpus dimensions");
  if ((s.mode == Mode::bot) != (stamp_partitioning != nullptr))
    throw Error(s.mode == Mode::bot ? "bot mode requires a timestamp partitioning"
                                    : "timestamp partitioning given in lda mode");

  ParallelPlan plan;
  plan.parts = P;
  plan.schedule = build_schedule(P);
  if (!verify_nonconflicting(plan.schedule, word_partitioning))
    throw Error("word partitioning failed the nonconflict check");

  std::vector<std::uint32_t> token_doc(s.token_count());
  for (std::uint32_t j = 0; j < s.counts.docs; ++j)
    std::fill(token_doc.begin() + static_cast<std::ptrdiff_t>(s.doc_offset[j]),
              token_doc.begin() + static_cast<std::ptrdiff_t>(s.doc_offset[j + 1]), j);
  const auto rg = word_partitioning.row_groups();
  const auto cg = word_partitioning.col_groups();
  bucket(std::size_t{P} * P, s.token_count(),
         [&](std::size_t i) { return std::size_t{rg[token_doc[i]]} * P + cg[s.token_word[i]]; },
         plan.word_block_offset, plan.word_block_tokens);
  plan.word_block_doc.resize(plan.word_block_tokens.size());
  for (std::size_t p = 0; p < plan.word_block_tokens.size(); ++p)
    plan.word_block_doc[p] = token_doc[plan.word_block_tokens[p]];

  if (stamp_partitioning != nullptr) {
    if (stamp_partitioning->row_perm.size() != s.counts.docs ||
        stamp_partitioning->col_perm.size() != s.counts.timestamps)
      throw DimensionError("timestamp partitioning does not match the timestamp table");
    if (!verify_nonconflicting(plan.schedule, *stamp_partitioning))
      throw Error("timestamp partitioning failed the nonconflict check");
    if (!same_row_groups(word_partitioning, *stamp_partitioning))
      throw Error("word and timestamp partitionings must share document groups");
    const auto scg = stamp_partitioning->col_groups();
    const auto L = s.ts_length;
    bucket(std::size_t{P} * P, s.ts_token.size(),
           [&](std::size_t i) { return std::size_t{rg[i / L]} * P + scg[s.ts_token[i]]; }, plan.stamp_block_offset,
           plan.stamp_block_slots);
  }
  return plan;
}

void sweep_parallel(GibbsState& s, const ModelConfig& config, const ParallelPlan& plan, std::uint64_t iteration,
                    ConflictProbe* probe) {
  const std::uint32_t P = plan.parts;
  const std::size_t K = s.counts.topics;
  const int workers = static_cast<int>(plan.worker_count == 0 ? P : plan.worker_count);
  auto& c = s.counts;
  const bool bot = s.mode == Mode::bot;
  const double beta_sum = c.words * config.beta;
  const double gamma_sum = c.timestamps * config.gamma;

  std::vector<Engine> engines(P);
  std::vector<std::vector<std::int64_t>> local(P);

  // Runs one phase of a diagonal: every block samples its items against a
  // private copy of `totals`, then the copies' deltas are summed back.
  auto run_phase = [&](const std::vector<BlockIndex>& epoch, std::vector<std::int64_t>& totals, auto&& sample_block) {
    if (probe != nullptr) probe->begin_phase();
    const auto snapshot = totals;
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
    for (std::int64_t m = 0; m < static_cast<std::int64_t>(P); ++m) {
      local[m] = snapshot;
      sample_block(static_cast<std::uint32_t>(m), epoch[m], local[m]);
    }
    for (std::uint32_t m = 0; m < P; ++m)
      for (std::size_t k = 0; k < K; ++k) totals[k] += local[m][k] - snapshot[k];
  };

  for (std::uint32_t l = 0; l < P; ++l) {
    const auto& epoch = plan.schedule.epochs[l];
    for (std::uint32_t m = 0; m < P; ++m) engines[m] = sweep_stream(config.seed, iteration, l, m);

    run_phase(epoch, c.topic_total, [&](std::uint32_t m, BlockIndex b, std::vector<std::int64_t>& totals) {
      const std::size_t block = std::size_t{b.row_group} * P + b.col_group;
      for (std::size_t p = plan.word_block_offset[block]; p < plan.word_block_offset[block + 1]; ++p) {
        const std::size_t i = plan.word_block_tokens[p];
        const std::uint32_t w = s.token_word[i];
        const std::uint32_t j = plan.word_block_doc[p];
        if (probe != nullptr) {
          probe->touch_doc(j, m);
          probe->touch_word(w, m);
          probe->visit_token(i);
        }
        s.z[i] = draw_topic(&c.doc_topic[j * K], &c.word_topic[w * K], totals.data(), c.topics, config.alpha,
                            config.beta, beta_sum, s.z[i], engines[m]);
      }
    });

    if (!bot) continue;
    run_phase(epoch, c.ts_total, [&](std::uint32_t m, BlockIndex b, std::vector<std::int64_t>& totals) {
      const std::size_t block = std::size_t{b.row_group} * P + b.col_group;
      for (std::size_t p = plan.stamp_block_offset[block]; p < plan.stamp_block_offset[block + 1]; ++p) {
        const std::size_t i = plan.stamp_block_slots[p];
        const std::uint32_t t = s.ts_token[i];
        const auto j = static_cast<std::uint32_t>(i / s.ts_length);
        if (probe != nullptr) {
          probe->touch_doc(j, m);
          probe->touch_stamp(t, m);
          probe->visit_stamp_slot(i);
        }
        s.y[i] = draw_topic(&c.doc_topic[j * K], &c.ts_topic[t * K], totals.data(), c.topics, config.alpha,
                            config.gamma, gamma_sum, s.y[i], engines[m]);
      }
    });
  }
}

}  // namespace ptm
