#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ptm/corpus.hpp"
#include "ptm/random.hpp"
#include "ptm/scheduler.hpp"
#include "ptm/workload.hpp"

namespace ptm {

enum class Mode { lda, bot };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view name);

struct ModelConfig {
  std::uint32_t num_topics = 256;
  double alpha = 0.5;
  double beta = 0.1;
  double gamma = 0.1;
  std::uint32_t iterations = 200;
  std::uint64_t seed = 0;
  Mode mode = Mode::lda;
  std::uint32_t perplexity_every = 1;  // 0 disables the per-iteration trace

  void validate() const;
};

/// Counting matrices of collapsed Gibbs sampling. Topic-major views of the
/// word and timestamp counts are stored item-major (row = word or timestamp,
/// K entries per row) so that one token touches one contiguous row.
struct TopicCounts {
  std::uint32_t docs = 0;
  std::uint32_t topics = 0;
  std::uint32_t words = 0;
  std::uint32_t timestamps = 0;  // WTS, 0 in LDA mode
  std::vector<std::int32_t> doc_topic;   // D x K
  std::vector<std::int32_t> word_topic;  // W x K
  std::vector<std::int64_t> topic_total;  // n_k over words
  std::vector<std::int32_t> ts_topic;    // WTS x K
  std::vector<std::int64_t> ts_total;    // n_k over timestamps

  std::int32_t doc(std::uint32_t j, std::uint32_t k) const { return doc_topic[std::size_t{j} * topics + k]; }
  std::int32_t word(std::uint32_t k, std::uint32_t w) const { return word_topic[std::size_t{w} * topics + k]; }
  std::int32_t stamp(std::uint32_t k, std::uint32_t t) const { return ts_topic[std::size_t{t} * topics + k]; }

  friend bool operator==(const TopicCounts&, const TopicCounts&) = default;
};

/// Token topic assignments plus the counts they imply. Word tokens are
/// expanded one slot per occurrence, in ascending (doc, word) order;
/// timestamp slots are L per document.
struct GibbsState {
  Mode mode = Mode::lda;
  std::uint32_t ts_length = 0;  // L
  std::vector<std::size_t> doc_offset;  // D + 1
  std::vector<std::uint32_t> token_word;
  std::vector<std::uint32_t> z;
  std::vector<std::uint32_t> ts_token;  // D x L timestamp ids
  std::vector<std::uint32_t> y;
  TopicCounts counts;

  std::uint32_t doc_count() const { return counts.docs; }
  std::size_t token_count() const { return token_word.size(); }
};

GibbsState init_state(const Corpus& corpus, const TimestampTable* timestamps, const ModelConfig& config);

/// Counts recomputed from z and y.
TopicCounts recount(const GibbsState& state);
bool counts_consistent(const GibbsState& state);

/// Resamples one word occurrence of `word` in document `doc` currently on
/// topic `current`. The occurrence must be included in the counts; on return
/// the counts reflect the new topic, which the caller stores in z.
std::uint32_t sample_word_token(GibbsState& state, const ModelConfig& config, std::uint32_t doc, std::uint32_t word,
                                std::uint32_t current, Engine& rng);

/// Timestamp counterpart of sample_word_token; shares the document row of the
/// document-topic counts and updates the topic-timestamp counts.
std::uint32_t sample_timestamp_token(GibbsState& state, const ModelConfig& config, std::uint32_t doc,
                                     std::uint32_t stamp, std::uint32_t current, Engine& rng);

/// Stream used by worker `worker` in epoch `epoch` of sweep `iteration`. The
/// sequential sweep uses (iteration, 0, 0).
Engine sweep_stream(std::uint64_t seed, std::uint64_t iteration, std::uint32_t epoch, std::uint32_t worker);

/// Reference sweep: every word token in order, then every timestamp slot.
void sweep_sequential(GibbsState& state, const ModelConfig& config, std::uint64_t iteration);

/// Records which worker touched each document row, word column and timestamp
/// column during the current phase, and counts cross-worker collisions.
class ConflictProbe {
 public:
  ConflictProbe(std::uint32_t docs, std::uint32_t words, std::uint32_t timestamps, std::size_t tokens,
                std::size_t stamp_slots);

  void begin_phase();
  void touch_doc(std::uint32_t doc, std::uint32_t worker) { touch(doc_owner_[doc], worker); }
  void touch_word(std::uint32_t word, std::uint32_t worker) { touch(word_owner_[word], worker); }
  void touch_stamp(std::uint32_t stamp, std::uint32_t worker) { touch(stamp_owner_[stamp], worker); }
  void visit_token(std::size_t i) { token_visits_[i].fetch_add(1, std::memory_order_relaxed); }
  void visit_stamp_slot(std::size_t i) { stamp_visits_[i].fetch_add(1, std::memory_order_relaxed); }

  std::uint64_t conflicts() const { return conflicts_.load(); }
  std::uint64_t phases() const { return phases_; }
  /// True iff every token and timestamp slot was visited exactly `sweeps` times.
  bool visits_exactly(std::uint32_t sweeps) const;
  void reset_visits();

 private:
  void touch(std::atomic<std::int32_t>& owner, std::uint32_t worker);

  std::vector<std::atomic<std::int32_t>> doc_owner_, word_owner_, stamp_owner_;
  std::vector<std::atomic<std::uint32_t>> token_visits_, stamp_visits_;
  std::atomic<std::uint64_t> conflicts_{0};
  std::uint64_t phases_ = 0;
};

/// Everything a partition-parallel sweep needs: the schedule and the token
/// lists of every block, in ascending (doc, token) order within a block.
struct ParallelPlan {
  std::uint32_t parts = 0;
  DiagonalSchedule schedule;
  std::vector<std::size_t> word_block_offset;  // P*P + 1
  std::vector<std::size_t> word_block_tokens;
  std::vector<std::uint32_t> word_block_doc;  // document of each listed token
  std::vector<std::size_t> stamp_block_offset;
  std::vector<std::size_t> stamp_block_slots;
  std::uint32_t worker_count = 0;  // OpenMP threads; 0 means P
};

/// Validates both partitionings against the state (nonconflicting, equal row
/// groups) and groups tokens by block. Throws on violation.
ParallelPlan make_parallel_plan(const GibbsState& state, const Partitioning& word_partitioning,
                                const Partitioning* stamp_partitioning);

/// One sweep in P diagonal epochs. Within an epoch, block (m, (m+l) mod P) is
/// sampled by worker m with its own copy of the topic totals; the copies'
/// deltas are merged at the barrier. BoT runs the timestamp blocks of the same
/// diagonal after the word phase.
void sweep_parallel(GibbsState& state, const ModelConfig& config, const ParallelPlan& plan, std::uint64_t iteration,
                    ConflictProbe* probe = nullptr);

struct TracePoint {
  std::uint32_t iteration = 0;  // 0 is the initial state
  double perplexity = 0.0;
  double seconds = 0.0;  // wall time spent sampling up to this point
};

struct ParallelSetup {
  Partitioning word_partitioning;
  std::optional<Partitioning> stamp_partitioning;
  std::uint32_t worker_count = 0;
};

struct TrainOptions {
  std::function<void(std::uint32_t iteration, const GibbsState&)> on_iteration;
  ConflictProbe* probe = nullptr;
};

struct TrainResult {
  GibbsState state;
  std::vector<TracePoint> trace;
};

TrainResult train(const Corpus& corpus, const TimestampTable* timestamps, const ModelConfig& config,
                  const ParallelSetup* parallel = nullptr, const TrainOptions& options = {});

}  // namespace ptm
