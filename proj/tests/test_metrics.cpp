#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ptm/corpus.hpp"
#include "ptm/error.hpp"
#include "ptm/metrics.hpp"
#include "ptm/sampler.hpp"

using namespace ptm;

namespace {

ModelConfig config(std::uint32_t K, Mode mode = Mode::lda) {
  ModelConfig c;
  c.num_topics = K;
  c.mode = mode;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("single topic gives theta of one") {
    const auto corpus = generate_synthetic(10, 20, 5, 1.1, 1);
    const auto s = init_state(corpus, nullptr, config(1));
    const auto e = estimate(s, config(1));
    for (std::uint32_t j = 0; j < 10; ++j) CHECK(e.theta_at(j, 0) == 1.0L);
  }

  TEST_CASE("an empty topic has a uniform word distribution") {
    Corpus c{1, 5, {{{0, 2}}}, 2, {}};
    auto s = init_state(c, nullptr, config(2));
    s.z = {0, 0};
    s.counts = recount(s);
    const auto e = estimate(s, config(2));
    for (std::uint32_t w = 0; w < 5; ++w) CHECK(static_cast<double>(e.phi_at(1, w)) == doctest::Approx(0.2).epsilon(1e-15));
  }

  TEST_CASE("estimate rows are distributions") {
    const auto corpus = generate_synthetic(30, 40, 8, 1.1, 2);
    const auto ts = make_timestamps(generate_synthetic_years(30, 5, 1990, 2), 16);
    auto cfg = config(4, Mode::bot);
    auto s = init_state(corpus, &ts, cfg);
    sweep_sequential(s, cfg, 1);
    const auto e = estimate(s, cfg);
    for (std::uint32_t j = 0; j < e.docs; ++j) {
      long double sum = 0;
      for (std::uint32_t k = 0; k < 4; ++k) sum += e.theta_at(j, k);
      CHECK(std::abs(static_cast<double>(sum - 1)) <= 1e-9);
    }
    for (std::uint32_t k = 0; k < 4; ++k) {
      long double pw = 0, pt = 0;
      for (std::uint32_t w = 0; w < e.words; ++w) pw += e.phi_at(k, w);
      for (std::uint32_t t = 0; t < e.timestamps; ++t) pt += e.pi_at(k, t);
      CHECK(std::abs(static_cast<double>(pw - 1)) <= 1e-9);
      CHECK(std::abs(static_cast<double>(pt - 1)) <= 1e-9);
    }
  }

  TEST_CASE("single topic over uniform counts has perplexity W") {
    for (std::uint32_t W : {1u, 7u, 100u, 4096u}) {
      Corpus c{1, W, {{}}, W, {}};
      for (std::uint32_t w = 0; w < W; ++w) c.docs[0].push_back({w, 1});
      const auto s = init_state(c, nullptr, config(1));
      CHECK(training_perplexity(c, estimate(s, config(1))) == static_cast<double>(W));
    }
  }

  TEST_CASE("hand-computed mixture") {
    // Every word has probability 0.5 * 0.5 = 0.25 under the mixture.
    TopicEstimates e;
    e.docs = 1;
    e.topics = 2;
    e.words = 4;
    e.theta = {0.5L, 0.5L};
    e.phi = {0.5L, 0.0L, 0.5L, 0.0L, 0.0L, 0.5L, 0.0L, 0.5L};
    Corpus c{1, 4, {{{0, 1}, {1, 2}, {2, 1}, {3, 3}}}, 7, {}};
    CHECK(training_perplexity(c, e) == 4.0);
  }

  TEST_CASE("single token hand example") {
    TopicEstimates e;
    e.docs = 1;
    e.topics = 1;
    e.words = 4;
    e.theta = {1.0L};
    e.phi = {0.25L, 0.25L, 0.25L, 0.25L};
    Corpus c{1, 4, {{{2, 1}}}, 1, {}};
    CHECK(training_perplexity(c, e) == 4.0);
  }

  TEST_CASE("empty corpus is rejected") {
    Corpus c{1, 2, {{}}, 0, {}};
    const auto s = init_state(c, nullptr, config(2));
    CHECK_THROWS_AS(training_perplexity(c, estimate(s, config(2))), Error);
  }

  TEST_CASE("top words") {
    TopicEstimates e;
    e.docs = 0;
    e.topics = 1;
    e.words = 4;
    e.phi = {0.1L, 0.4L, 0.1L, 0.4L};
    const auto top = top_words(e, 0, 3);
    REQUIRE(top.size() == 3);
    CHECK(top[0].first == 1);
    CHECK(top[1].first == 3);
    CHECK(top[2].first == 0);
    CHECK(top_words(e, 0, 10).size() == 4);

    e.words = 3;
    e.phi = {0.5L, 0.3L, 0.2L};
    const auto two = top_words(e, 0, 2);
    CHECK(two.size() == 2);
    CHECK(two[0].first == 0);
    CHECK(two[1].first == 1);

    e.phi = {1.0L / 3, 1.0L / 3, 1.0L / 3};
    const auto uniform = top_words(e, 0, 2);
    CHECK(uniform[0].first == 0);
    CHECK(uniform[1].first == 1);
    CHECK_THROWS_AS(top_words(e, 1, 1), BoundsError);
  }

  TEST_CASE("perplexity bounds and symmetries") {
    const auto corpus = generate_synthetic(25, 35, 9, 1.1, 4);
    auto cfg = config(5);
    auto s = init_state(corpus, nullptr, cfg);
    for (std::uint64_t it = 1; it <= 3; ++it) sweep_sequential(s, cfg, it);
    const auto base = training_perplexity(corpus, estimate(s, cfg));
    CHECK(base >= 1.0);
    CHECK(base <= static_cast<double>(corpus.vocab_size) * 10);

    // Relabel topics with a cyclic shift.
    auto relabeled = s.counts;
    const auto K = cfg.num_topics;
    for (std::uint32_t k = 0; k < K; ++k) {
      const auto to = (k + 1) % K;
      for (std::uint32_t j = 0; j < relabeled.docs; ++j) relabeled.doc_topic[std::size_t{j} * K + to] = s.counts.doc(j, k);
      for (std::uint32_t w = 0; w < relabeled.words; ++w) relabeled.word_topic[std::size_t{w} * K + to] = s.counts.word(k, w);
      relabeled.topic_total[to] = s.counts.topic_total[k];
    }
    CHECK(training_perplexity(corpus, estimate(relabeled, cfg)) == doctest::Approx(base).epsilon(1e-12));

    // Reverse the document order in both corpus and counts.
    Corpus reversed = corpus;
    std::reverse(reversed.docs.begin(), reversed.docs.end());
    auto rc = s.counts;
    for (std::uint32_t j = 0; j < rc.docs; ++j)
      for (std::uint32_t k = 0; k < K; ++k) rc.doc_topic[std::size_t{j} * K + k] = s.counts.doc(rc.docs - 1 - j, k);
    CHECK(training_perplexity(reversed, estimate(rc, cfg)) == doctest::Approx(base).epsilon(1e-12));
  }
}
