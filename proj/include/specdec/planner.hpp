#pragma once

// Searches over the cost model: best speculation length, best draft KV
// budget, ranking of drafting strategies, batch/sequence sweeps and the
// critical sequence length beyond which speedup grows with batch size.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specdec/drafting.hpp"
#include "specdec/perf_model.hpp"
#include "specdec/specdec_math.hpp"

namespace specdec {

struct PlanResult {
  DraftSpec draft;
  std::int64_t kv_budget = 0;  // effective draft context (full context for full-KV drafts)
  int gamma = 1;
  double alpha = 0.0;
  SpeedupReport report;
};

/// End-to-end speedup of one configuration: target, verify and draft step
/// times from the cost model, expected tokens from the acceptance rate.
SpeedupReport analyze(const HardwareSpec& hw, const ModelArch& target_arch, const DraftSpec& draft,
                      std::int64_t batch, std::int64_t seq_len, int gamma, double alpha,
                      const CostOptions& opts = {});

struct GammaPlan {
  int gamma = 1;
  SpeedupReport report;
};

/// Exhaustive over gamma in [1, gamma_max]; ties go to the smaller gamma.
GammaPlan optimize_gamma(const HardwareSpec& hw, const ModelArch& target_arch, const DraftSpec& draft,
                         std::int64_t batch, std::int64_t seq_len, double alpha,
                         int gamma_max = kDefaultGammaMax, const CostOptions& opts = {});

struct BudgetPlan {
  PlanResult best;
  std::vector<std::string> warnings;  // budgets skipped because they exceed the context
};

/// For each candidate budget, looks up alpha for (method, task, K) and optimizes
/// gamma; returns the best, ties going to the smaller budget. `base` supplies the
/// strategy and method tag; its own budget is replaced. Throws ConfigError when
/// every candidate exceeds the context.
BudgetPlan optimize_budget(const HardwareSpec& hw, const ModelArch& target_arch, const DraftSpec& base,
                           const std::string& task, const std::vector<std::int64_t>& budgets,
                           const AcceptanceTable& acceptance, std::int64_t batch, std::int64_t seq_len,
                           int gamma_max = kDefaultGammaMax, const CostOptions& opts = {});

/// Each draft at its best gamma, sorted by predicted speedup (descending, stable).
std::vector<PlanResult> compare_strategies(const HardwareSpec& hw, const ModelArch& target_arch,
                                           const std::vector<DraftSpec>& drafts,
                                           const AcceptanceTable& acceptance, const std::string& task,
                                           std::int64_t batch, std::int64_t seq_len,
                                           int gamma_max = kDefaultGammaMax, const CostOptions& opts = {});

struct InflectionResult {
  std::optional<std::int64_t> s_inflection;
  std::vector<std::int64_t> batch_grid;
  std::vector<std::int64_t> seq_grid;
  std::vector<std::vector<double>> speedup;  // [seq index][batch index]
};

/// Smallest grid S at which speedup at the largest batch is >= 1 and speedup
/// is non-decreasing across consecutive batch grid points.
InflectionResult find_inflection(const HardwareSpec& hw, const ModelArch& target_arch,
                                 const DraftSpec& draft, double alpha,
                                 const std::vector<std::int64_t>& batch_grid,
                                 const std::vector<std::int64_t>& seq_grid, int gamma,
                                 const CostOptions& opts = {});

struct SweepRow {
  std::int64_t batch = 0;
  std::int64_t seq_len = 0;
  double t_target_s = 0.0;
  double t_draft_s = 0.0;   // draft decode only
  double t_select_s = 0.0;
  double t_verify_s = 0.0;
  double v_ratio = 0.0;     // T_V / T_T
  double d_ratio = 0.0;     // gamma (T_D + T_select) / T_T
  double omega = 1.0;
  double speedup = 1.0;
};

/// One row per (B, S), S-major then B.
std::vector<SweepRow> sweep(const HardwareSpec& hw, const ModelArch& target_arch, const DraftSpec& draft,
                            double alpha, const std::vector<std::int64_t>& batch_grid,
                            const std::vector<std::int64_t>& seq_grid, int gamma,
                            const CostOptions& opts = {});

}  // namespace specdec
