#include <chrono>

#include "ptm/metrics.hpp"
#include "ptm/sampler.hpp"

namespace ptm {

TrainResult train(const Corpus& corpus, const TimestampTable* timestamps, const ModelConfig& config,
                  const ParallelSetup* parallel, const TrainOptions& options) {
  TrainResult result;
  result.state = init_state(corpus, timestamps, config);
  auto& state = result.state;

  std::optional<ParallelPlan> plan;
  if (parallel != nullptr) {
    plan = make_parallel_plan(state, parallel->word_partitioning,
                              parallel->stamp_partitioning ? &*parallel->stamp_partitioning : nullptr);
    plan->worker_count = parallel->worker_count;
  }

  const bool tracing = config.perplexity_every > 0 && corpus.total_tokens > 0;
  auto record = [&](std::uint32_t iteration, double seconds) {
    result.trace.push_back({iteration, training_perplexity(corpus, estimate(state, config)), seconds});
  };
  if (tracing) record(0, 0.0);

  double seconds = 0.0;
  for (std::uint32_t it = 1; it <= config.iterations; ++it) {
    const auto start = std::chrono::steady_clock::now();
    if (plan)
      sweep_parallel(state, config, *plan, it, options.probe);
    else
      sweep_sequential(state, config, it);
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (options.on_iteration) options.on_iteration(it, state);
    if (tracing && (it % config.perplexity_every == 0 || it == config.iterations)) record(it, seconds);
  }
  return result;
}

}  // namespace ptm
