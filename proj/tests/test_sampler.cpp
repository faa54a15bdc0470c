#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "ptm/corpus.hpp"
#include "ptm/error.hpp"
#include "ptm/partitioner.hpp"
#include "ptm/sampler.hpp"

using namespace ptm;

namespace {

ModelConfig lda(std::uint32_t K, std::uint64_t seed = 1) {
  ModelConfig c;
  c.num_topics = K;
  c.seed = seed;
  c.iterations = 5;
  return c;
}

ModelConfig bot(std::uint32_t K, std::uint64_t seed = 1) {
  auto c = lda(K, seed);
  c.mode = Mode::bot;
  return c;
}

std::vector<long> widen(std::span<const std::int32_t> v) { return {v.begin(), v.end()}; }
std::vector<long> widen(std::span<const std::int64_t> v) { return {v.begin(), v.end()}; }

std::vector<long> doc_row(const GibbsState& s, std::uint32_t j) {
  const auto K = s.counts.topics;
  return widen(std::span<const std::int32_t>(&s.counts.doc_topic[std::size_t{j} * K], K));
}
std::vector<long> word_row(const GibbsState& s, std::uint32_t w) {
  const auto K = s.counts.topics;
  return widen(std::span<const std::int32_t>(&s.counts.word_topic[std::size_t{w} * K], K));
}
std::vector<long> stamp_row(const GibbsState& s, std::uint32_t t) {
  const auto K = s.counts.topics;
  return widen(std::span<const std::int32_t>(&s.counts.ts_topic[std::size_t{t} * K], K));
}

struct Fixture {
  Corpus corpus;
  TimestampTable stamps;
};

Fixture synthetic(std::uint32_t D, std::uint32_t W, std::uint32_t len, std::uint32_t years, std::uint64_t seed) {
  Fixture f;
  f.corpus = generate_synthetic(D, W, len, 1.1, seed);
  f.stamps = make_timestamps(generate_synthetic_years(D, years, 2000, seed), 16);
  return f;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return tv / 2;
}

}  // namespace

TEST_SUITE("sampler") {
  TEST_CASE("single topic initialization") {
    const auto f = synthetic(20, 30, 8, 3, 1);
    const auto s = init_state(f.corpus, nullptr, lda(1));
    for (auto t : s.z) CHECK(t == 0);
    for (std::uint32_t j = 0; j < 20; ++j) CHECK(s.counts.doc(j, 0) == static_cast<std::int32_t>(f.corpus.doc_length(j)));
  }

  TEST_CASE("initialization is deterministic and consistent") {
    const auto f = synthetic(40, 60, 10, 4, 2);
    const auto a = init_state(f.corpus, &f.stamps, bot(6, 9));
    const auto b = init_state(f.corpus, &f.stamps, bot(6, 9));
    CHECK(a.z == b.z);
    CHECK(a.y == b.y);
    CHECK(counts_consistent(a));
    for (std::uint32_t j = 0; j < 40; ++j) {
      std::int64_t sum = 0;
      for (std::uint32_t k = 0; k < 6; ++k) sum += a.counts.doc(j, k);
      CHECK(sum == static_cast<std::int64_t>(f.corpus.doc_length(j)) + 16);
    }
  }

  TEST_CASE("mode and timestamps must agree") {
    const auto f = synthetic(5, 5, 3, 2, 3);
    CHECK_THROWS_AS(init_state(f.corpus, nullptr, bot(2)), Error);
    CHECK_THROWS_AS(init_state(f.corpus, &f.stamps, lda(2)), Error);
    auto bad = lda(0);
    CHECK_THROWS_AS(init_state(f.corpus, nullptr, bad), Error);
  }

  TEST_CASE("single topic draws are always zero") {
    const auto f = synthetic(5, 10, 5, 2, 4);
    auto s = init_state(f.corpus, &f.stamps, bot(1));
    Engine rng(1);
    for (int i = 0; i < 20; ++i) {
      CHECK(sample_word_token(s, bot(1), 0, s.token_word[0], 0, rng) == 0);
      CHECK(sample_timestamp_token(s, bot(1), 0, s.ts_token[0], 0, rng) == 0);
    }
    CHECK(counts_consistent(s));
  }

  TEST_CASE("word draws follow the collapsed conditional") {
    // Hand-built counts: doc 0 has 3 tokens (word 0 on topic 0, word 1 on
    // topic 1 twice); the token resampled is word 0, currently topic 0.
    Corpus c{1, 2, {{{0, 1}, {1, 2}}}, 3, {}};
    auto cfg = lda(2);
    auto s = init_state(c, nullptr, cfg);
    s.z = {0, 1, 1};
    s.counts = recount(s);
    // Removing the token: doc row [0, 2], word-0 row [0, 0], totals [0, 2].
    // w0 = (0 + .5)(0 + .1)/(0 + .2) = .25;  w1 = (2 + .5)(0 + .1)/(2 + .2) = .25/2.2
    const double w0 = 0.25, w1 = 0.25 / 2.2;
    const double p0 = w0 / (w0 + w1);
    const auto analytic = oracle::conditional(doc_row(s, 0), word_row(s, 0), widen(std::span<const std::int64_t>(s.counts.topic_total)), 0,
                                              cfg.alpha, cfg.beta, 2 * cfg.beta);
    CHECK(analytic[0] == doctest::Approx(p0).epsilon(1e-12));

    const auto frozen = s.counts;
    Engine rng(2024);
    int hits = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      hits += sample_word_token(s, cfg, 0, 0, 0, rng) == 0;
      s.counts = frozen;
    }
    CHECK(std::abs(static_cast<double>(hits) / draws - p0) <= 0.01);
  }

  TEST_CASE("counts stay consistent after each draw") {
    const auto f = synthetic(10, 20, 6, 3, 5);
    auto cfg = bot(4);
    auto s = init_state(f.corpus, &f.stamps, cfg);
    Engine rng(3);
    for (std::size_t i = 0; i < s.token_count(); ++i) {
      std::uint32_t j = 0;
      while (s.doc_offset[j + 1] <= i) ++j;
      s.z[i] = sample_word_token(s, cfg, j, s.token_word[i], s.z[i], rng);
      CHECK(counts_consistent(s));
    }
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      s.y[i] = sample_timestamp_token(s, cfg, static_cast<std::uint32_t>(i / 16), s.ts_token[i], s.y[i], rng);
      CHECK(counts_consistent(s));
    }
  }

  TEST_CASE("single timestamp reduces to the theta-only conditional") {
    Corpus c{2, 3, {{{0, 2}, {2, 1}}, {{1, 4}}}, 7, {}};
    const auto stamps = make_timestamps({1999, 1999}, 4);
    auto cfg = bot(3);
    auto s = init_state(c, &stamps, cfg);
    const auto frozen = s.counts;
    const std::uint32_t current = s.y[0];

    // theta-only weights: (C_Theta[0][k] - delta + alpha)
    auto row = doc_row(s, 0);
    std::vector<double> expect(3);
    for (std::uint32_t k = 0; k < 3; ++k) expect[k] = row[k] - (k == current ? 1 : 0) + cfg.alpha;
    const double sum = std::accumulate(expect.begin(), expect.end(), 0.0);
    for (auto& e : expect) e /= sum;

    Engine rng(5);
    std::vector<double> freq(3, 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      freq[sample_timestamp_token(s, cfg, 0, 0, current, rng)] += 1.0 / draws;
      s.counts = frozen;
    }
    CHECK(total_variation(freq, expect) <= 0.01);
  }

  TEST_CASE("empty corpus sweep leaves the state unchanged") {
    Corpus c{3, 4, {{}, {}, {}}, 0, {}};
    auto cfg = lda(3);
    auto s = init_state(c, nullptr, cfg);
    const auto before = s.counts;
    sweep_sequential(s, cfg, 1);
    CHECK(s.counts == before);
    CHECK(s.z.empty());
  }

  TEST_CASE("two sequential sweeps of a one-token chain match a hand simulation") {
    Corpus c{1, 1, {{{0, 1}}}, 1, {}};
    auto cfg = lda(2, 31);
    auto s = init_state(c, nullptr, cfg);
    std::uint32_t topic = s.z[0];
    for (std::uint64_t it = 1; it <= 2; ++it) {
      // With the token removed every count is zero, so both weights are
      // (0 + alpha)(0 + beta)/(0 + W beta) = alpha and the draw is a fair coin.
      Engine replay = sweep_stream(cfg.seed, it, 0, 0);
      const double u = uniform01(replay) * (2 * cfg.alpha);
      topic = u < cfg.alpha ? 0 : 1;
      sweep_sequential(s, cfg, it);
      CHECK(s.z[0] == topic);
      CHECK(counts_consistent(s));
    }
  }

  TEST_CASE("sequential sweeps preserve the invariants") {
    const auto f = synthetic(30, 50, 10, 5, 6);
    auto cfg = bot(5);
    auto s = init_state(f.corpus, &f.stamps, cfg);
    for (std::uint64_t it = 1; it <= 3; ++it) {
      sweep_sequential(s, cfg, it);
      CHECK(counts_consistent(s));
      CHECK(std::accumulate(s.counts.topic_total.begin(), s.counts.topic_total.end(), std::int64_t{0}) ==
            static_cast<std::int64_t>(f.corpus.total_tokens));
      CHECK(std::accumulate(s.counts.ts_total.begin(), s.counts.ts_total.end(), std::int64_t{0}) == 30 * 16);
    }
  }

  TEST_CASE("one-part parallel sweep reproduces the sequential sweep") {
    const auto f = synthetic(40, 70, 12, 4, 7);
    for (auto mode : {Mode::lda, Mode::bot}) {
      auto cfg = mode == Mode::bot ? bot(4, 3) : lda(4, 3);
      const auto* stamps = mode == Mode::bot ? &f.stamps : nullptr;
      auto seq = init_state(f.corpus, stamps, cfg);
      auto par = seq;
      const auto dw = partition(build_workload(f.corpus), Algorithm::a3, {1, 1, 0}).partitioning;
      std::optional<Partitioning> dts;
      if (stamps) dts = partition_columns(build_bot_workload(*stamps, 40), dw, Algorithm::a3, {1, 1, 0}).partitioning;
      const auto plan = make_parallel_plan(par, dw, dts ? &*dts : nullptr);
      for (std::uint64_t it = 1; it <= 3; ++it) {
        sweep_sequential(seq, cfg, it);
        sweep_parallel(par, cfg, plan, it);
        CHECK(seq.z == par.z);
        CHECK(seq.y == par.y);
        CHECK(seq.counts == par.counts);
      }
    }
  }

  TEST_CASE("parallel sweeps are conflict-free and visit every token once") {
    const auto f = synthetic(120, 200, 15, 8, 8);
    for (std::uint32_t P : {3u, 4u}) {
      auto cfg = bot(6, P);
      auto s = init_state(f.corpus, &f.stamps, cfg);
      const auto dw = partition(build_workload(f.corpus), Algorithm::a3, {P, 10, 1}).partitioning;
      const auto dts = partition_columns(build_bot_workload(f.stamps, 120), dw, Algorithm::a3, {P, 10, 1}).partitioning;
      const auto plan = make_parallel_plan(s, dw, &dts);
      ConflictProbe probe(120, 200, f.stamps.vocab_size, s.token_count(), s.y.size());
      for (std::uint64_t it = 1; it <= 2; ++it) {
        sweep_parallel(s, cfg, plan, it, &probe);
        CHECK(counts_consistent(s));
      }
      CHECK(probe.conflicts() == 0);
      CHECK(probe.visits_exactly(2));
      CHECK(probe.phases() == 1 + 2 * 2 * P);
    }
  }

  TEST_CASE("parallel sweeps are reproducible") {
    const auto f = synthetic(80, 100, 10, 4, 9);
    auto cfg = lda(5, 4);
    const auto dw = partition(build_workload(f.corpus), Algorithm::a2, {4, 1, 0}).partitioning;
    auto a = init_state(f.corpus, nullptr, cfg);
    auto b = a;
    auto plan_a = make_parallel_plan(a, dw, nullptr);
    auto plan_b = plan_a;
    plan_b.worker_count = 1;  // thread count must not matter
    for (std::uint64_t it = 1; it <= 2; ++it) {
      sweep_parallel(a, cfg, plan_a, it);
      sweep_parallel(b, cfg, plan_b, it);
    }
    CHECK(a.z == b.z);
    CHECK(a.counts == b.counts);
  }

  TEST_CASE("plan validation") {
    const auto f = synthetic(60, 90, 10, 6, 10);
    auto s = init_state(f.corpus, &f.stamps, bot(3));
    const auto dw = partition(build_workload(f.corpus), Algorithm::a1, {3, 1, 0}).partitioning;
    const auto bot_matrix = build_bot_workload(f.stamps, 60);

    // Independently partitioned timestamp rows do not share document groups.
    const auto own_rows = partition(bot_matrix, Algorithm::baseline, {3, 1, 5}).partitioning;
    CHECK_THROWS_AS(make_parallel_plan(s, dw, &own_rows), Error);
    CHECK_THROWS_AS(make_parallel_plan(s, dw, nullptr), Error);

    auto broken = dw;
    std::swap(broken.col_cuts[1], broken.col_cuts[2]);
    const auto dts = partition_columns(bot_matrix, dw, Algorithm::a1, {3, 1, 0}).partitioning;
    CHECK_THROWS_AS(make_parallel_plan(s, broken, &dts), Error);
    CHECK_NOTHROW(make_parallel_plan(s, dw, &dts));
  }

  TEST_CASE("training lowers perplexity and keeps a finite trace") {
    const auto corpus = generate_synthetic(200, 500, 40, 1.1, 11);
    auto cfg = lda(8, 5);
    cfg.iterations = 200;
    cfg.perplexity_every = 10;
    const auto res = train(corpus, nullptr, cfg);
    REQUIRE(res.trace.size() == 21);
    for (const auto& t : res.trace) {
      CHECK(std::isfinite(t.perplexity));
      CHECK(t.perplexity > 0);
    }
    CHECK(res.trace.back().perplexity < res.trace.front().perplexity);
    CHECK(counts_consistent(res.state));
  }
}
