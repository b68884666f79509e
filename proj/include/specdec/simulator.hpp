#pragma once

// Seeded Monte Carlo simulation of a fixed batch under speculative decoding
// and under plain autoregressive decoding. Acceptance is Bernoulli(alpha)
// per drafted position; step latency comes from the cost model.

#include <cstdint>
#include <random>
#include <vector>

#include "specdec/drafting.hpp"
#include "specdec/perf_model.hpp"

namespace specdec {

/// Per-sequence random stream. Each sequence index gets its own mt19937_64
/// seeded through std::seed_seq from (seed, index), so a sequence's draws do
/// not depend on the batch size or on the order sequences are visited.
class SequenceRng {
 public:
  SequenceRng(std::uint64_t seed, std::uint64_t stream);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::mt19937_64 engine_;
};

/// Accepted draft tokens in [0, gamma]: P(k) = alpha^k (1 - alpha) for k < gamma,
/// P(gamma) = alpha^gamma. Consumes at most gamma uniforms.
int draw_accepted_count(SequenceRng& rng, int gamma, double alpha);

struct SimConfig {
  std::uint64_t seed = 0;
  std::int64_t batch = 1;
  std::int64_t initial_context = 0;
  std::int64_t gen_len = 1;
  int gamma = 1;
  double alpha = 0.0;
  DraftSpec draft;
  CostOptions cost;

  void validate() const;
};

struct SimResult {
  std::int64_t total_tokens = 0;
  std::int64_t total_steps = 0;
  std::int64_t uncapped_steps = 0;
  double model_time_s = 0.0;
  double empirical_omega = 1.0;    // mean tokens per sequence-step over uncapped steps
  double empirical_speedup = 1.0;  // autoregressive time / this run's time
  double baseline_time_s = 0.0;    // autoregressive time for the same batch
  std::vector<std::int64_t> per_seq_tokens;
  std::int64_t misaligned_steps = 0;  // steps where active sequences kept different counts
};

/// Steps a batch until every sequence has produced gen_len tokens. Each step
/// drafts gamma tokens per active sequence, then verifies them; an active
/// sequence keeps k + 1 tokens (accepted plus the correction/bonus token),
/// capped at what it still needs. Finished sequences leave the batch. Step
/// latency is evaluated at the active batch size and its longest context.
SimResult simulate_sd(const HardwareSpec& hw, const ModelArch& target_arch, const SimConfig& cfg);

/// One token per sequence per step for gen_len steps.
SimResult simulate_ar(const HardwareSpec& hw, const ModelArch& target_arch, const SimConfig& cfg);

}  // namespace specdec
