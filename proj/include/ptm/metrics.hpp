#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ptm/corpus.hpp"
#include "ptm/sampler.hpp"

namespace ptm {

// Extended precision (80-bit on x86-64) for estimates and log-likelihoods.
using Probability = long double;

/// Smoothed point estimates, all row-major:
///   theta[j][k] = (C_Theta[j][k] + alpha) / (sum_k C_Theta[j][k] + K alpha)
///   phi[k][w]   = (C_Phi[k][w] + beta) / (n_k + W beta)
///   pi[k][t]    = (C_Pi[k][t] + gamma) / (n_k^ts + WTS gamma)
struct TopicEstimates {
  std::uint32_t docs = 0;
  std::uint32_t topics = 0;
  std::uint32_t words = 0;
  std::uint32_t timestamps = 0;
  std::vector<Probability> theta;  // D x K
  std::vector<Probability> phi;    // K x W
  std::vector<Probability> pi;     // K x WTS, empty in LDA mode

  Probability theta_at(std::uint32_t j, std::uint32_t k) const { return theta[std::size_t{j} * topics + k]; }
  Probability phi_at(std::uint32_t k, std::uint32_t w) const { return phi[std::size_t{k} * words + w]; }
  Probability pi_at(std::uint32_t k, std::uint32_t t) const { return pi[std::size_t{k} * timestamps + t]; }
};

TopicEstimates estimate(const TopicCounts& counts, const ModelConfig& config);
inline TopicEstimates estimate(const GibbsState& state, const ModelConfig& config) {
  return estimate(state.counts, config);
}

/// exp(-(1/N) sum_{j,i} log sum_k theta[j][k] phi[k][x_ji]) over word tokens
/// only. Documents are evaluated in parallel; compensated sums are reduced in
/// document order.
double training_perplexity(const Corpus& corpus, const TopicEstimates& estimates);

/// The n most probable words of topic k, descending, ties by word id.
std::vector<std::pair<std::uint32_t, Probability>> top_words(const TopicEstimates& estimates, std::uint32_t topic,
                                                        std::size_t n);

}  // namespace ptm
