#include "specdec/simulator.hpp"

#include <algorithm>
#include <stdexcept>

namespace specdec {

SequenceRng::SequenceRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5d1eu};
  engine_.seed(seq);
}

double SequenceRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int draw_accepted_count(SequenceRng& rng, int gamma, double alpha) {
  int k = 0;
  while (k < gamma && rng.uniform() < alpha) ++k;
  return k;
}

void SimConfig::validate() const {
  if (batch < 1) throw std::invalid_argument("simulation batch must be >= 1");
  if (gen_len < 1) throw std::invalid_argument("simulation gen_len must be >= 1");
  if (initial_context < 0) throw std::invalid_argument("simulation initial context must be >= 0");
  if (gamma < 1) throw std::invalid_argument("simulation gamma must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("simulation alpha must be in [0, 1]");
  draft.validate();
}

SimResult simulate_ar(const HardwareSpec& hw, const ModelArch& target_arch, const SimConfig& cfg) {
  cfg.validate();
  SimResult out;
  for (std::int64_t t = 0; t < cfg.gen_len; ++t) {
    out.model_time_s +=
        decode_step_time(hw, target_arch, cfg.batch, cfg.initial_context + t, 1, cfg.cost).total_s;
  }
  out.total_steps = cfg.gen_len;
  out.uncapped_steps = cfg.gen_len;
  out.total_tokens = cfg.batch * cfg.gen_len;
  out.per_seq_tokens.assign(static_cast<std::size_t>(cfg.batch), cfg.gen_len);
  out.empirical_omega = 1.0;
  out.baseline_time_s = out.model_time_s;
  out.empirical_speedup = 1.0;
  return out;
}

SimResult simulate_sd(const HardwareSpec& hw, const ModelArch& target_arch, const SimConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.batch);

  std::vector<SequenceRng> rngs;
  rngs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rngs.emplace_back(cfg.seed, i);

  std::vector<std::int64_t> produced(n, 0);
  std::vector<std::int64_t> context(n, cfg.initial_context);
  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;

  SimResult out;
  double uncapped_tokens = 0.0;
  double uncapped_seq_steps = 0.0;
  double all_tokens = 0.0;
  double all_seq_steps = 0.0;

  while (!active.empty()) {
    const auto b = static_cast<std::int64_t>(active.size());
    std::int64_t max_ctx = 0;
    for (const auto i : active) max_ctx = std::max(max_ctx, context[i]);

    const auto d = draft_step_time(hw, target_arch, effective_draft(cfg.draft, max_ctx), b, max_ctx, cfg.cost);
    const double t_verify = decode_step_time(hw, target_arch, b, max_ctx, cfg.gamma + 1, cfg.cost).total_s;
    out.model_time_s += cfg.gamma * (d.t_draft_s + d.t_select_s) + t_verify;
    ++out.total_steps;

    bool capped = false;
    std::int64_t step_tokens = 0;
    std::int64_t lo = cfg.gamma + 1;
    std::int64_t hi = 0;
    for (const auto i : active) {
      const std::int64_t want = draw_accepted_count(rngs[i], cfg.gamma, cfg.alpha) + 1;
      const std::int64_t remaining = cfg.gen_len - produced[i];
      const std::int64_t got = std::min(want, remaining);
      capped = capped || want > remaining;
      produced[i] += got;
      context[i] += got;
      step_tokens += got;
      lo = std::min(lo, got);
      hi = std::max(hi, got);
    }
    if (lo != hi) ++out.misaligned_steps;
    all_tokens += static_cast<double>(step_tokens);
    all_seq_steps += static_cast<double>(b);
    if (!capped) {
      ++out.uncapped_steps;
      uncapped_tokens += static_cast<double>(step_tokens);
      uncapped_seq_steps += static_cast<double>(b);
    }
    std::erase_if(active, [&](std::size_t i) { return produced[i] >= cfg.gen_len; });
  }

  out.per_seq_tokens = produced;
  for (const auto p : produced) out.total_tokens += p;
  out.empirical_omega =
      uncapped_seq_steps > 0 ? uncapped_tokens / uncapped_seq_steps : all_tokens / all_seq_steps;
  out.baseline_time_s = simulate_ar(hw, target_arch, cfg).model_time_s;
  out.empirical_speedup = out.baseline_time_s / out.model_time_s;
  return out;
}

}  // namespace specdec
