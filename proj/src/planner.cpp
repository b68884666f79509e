#include "specdec/planner.hpp"

#include <algorithm>
#include <stdexcept>

#include "specdec/error.hpp"

namespace specdec {

namespace {

void require_sorted_grid(const std::vector<std::int64_t>& grid, const char* what, std::size_t min_size) {
  if (grid.size() < min_size) {
    throw std::invalid_argument(std::string(what) + " needs at least " + std::to_string(min_size) + " points");
  }
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument(std::string(what) + " must be sorted ascending");
  }
}

std::int64_t draft_context(const DraftSpec& draft, std::int64_t seq_len) {
  return draft.kv_budget().value_or(seq_len);
}

}  // namespace

SpeedupReport analyze(const HardwareSpec& hw, const ModelArch& target_arch, const DraftSpec& draft,
                      std::int64_t batch, std::int64_t seq_len, int gamma, double alpha,
                      const CostOptions& opts) {
  if (gamma < 1) throw std::invalid_argument("analyze: gamma must be >= 1");
  const double t_target = decode_step_time(hw, target_arch, batch, seq_len, 1, opts).total_s;
  const double t_verify = decode_step_time(hw, target_arch, batch, seq_len, gamma + 1, opts).total_s;
  const auto d = draft_step_time(hw, target_arch, effective_draft(draft, seq_len), batch, seq_len, opts);
  return make_report(t_target, d.t_draft_s, d.t_select_s, t_verify, gamma, alpha);
}

GammaPlan optimize_gamma(const HardwareSpec& hw, const ModelArch& target_arch, const DraftSpec& draft,
                         std::int64_t batch, std::int64_t seq_len, double alpha, int gamma_max,
                         const CostOptions& opts) {
  if (gamma_max < 1) throw std::invalid_argument("optimize_gamma: gamma_max must be >= 1");
  const double t_target = decode_step_time(hw, target_arch, batch, seq_len, 1, opts).total_s;
  const auto d = draft_step_time(hw, target_arch, effective_draft(draft, seq_len), batch, seq_len, opts);
  GammaPlan best;
  for (int g = 1; g <= gamma_max; ++g) {
    const double t_verify = decode_step_time(hw, target_arch, batch, seq_len, g + 1, opts).total_s;
    auto report = make_report(t_target, d.t_draft_s, d.t_select_s, t_verify, g, alpha);
    if (g == 1 || report.speedup > best.report.speedup) best = {g, report};
  }
  return best;
}

BudgetPlan optimize_budget(const HardwareSpec& hw, const ModelArch& target_arch, const DraftSpec& base,
                           const std::string& task, const std::vector<std::int64_t>& budgets,
                           const AcceptanceTable& acceptance, std::int64_t batch, std::int64_t seq_len,
                           int gamma_max, const CostOptions& opts) {
  if (budgets.empty()) throw std::invalid_argument("optimize_budget: no candidate budgets");
  BudgetPlan out;
  bool found = false;
  for (const auto k : budgets) {
    if (k > seq_len) {
      out.warnings.push_back("budget " + std::to_string(k) + " exceeds context " + std::to_string(seq_len) +
                             "; skipped");
      continue;
    }
    const DraftSpec draft = base.with_budget(k);
    const double alpha = acceptance.lookup_alpha(draft.method_tag(), task, k);
    const auto plan = optimize_gamma(hw, target_arch, draft, batch, seq_len, alpha, gamma_max, opts);
    const bool better = !found || plan.report.speedup > out.best.report.speedup ||
                        (plan.report.speedup == out.best.report.speedup && k < out.best.kv_budget);
    if (better) {
      out.best = PlanResult{draft, k, plan.gamma, alpha, plan.report};
      found = true;
    }
  }
  if (!found) {
    throw ConfigError("every candidate budget exceeds the context length " + std::to_string(seq_len));
  }
  return out;
}

std::vector<PlanResult> compare_strategies(const HardwareSpec& hw, const ModelArch& target_arch,
                                           const std::vector<DraftSpec>& drafts,
                                           const AcceptanceTable& acceptance, const std::string& task,
                                           std::int64_t batch, std::int64_t seq_len, int gamma_max,
                                           const CostOptions& opts) {
  std::vector<PlanResult> out;
  out.reserve(drafts.size());
  for (const auto& draft : drafts) {
    if (!acceptance.has_group(draft.method_tag(), task)) {
      throw ConfigError("method '" + draft.method_tag() + "' has no acceptance data for task '" + task + "'");
    }
    const auto eff = effective_draft(draft, seq_len);
    const std::int64_t k = draft_context(eff, seq_len);
    const double alpha = acceptance.lookup_alpha(draft.method_tag(), task, k);
    const auto plan = optimize_gamma(hw, target_arch, eff, batch, seq_len, alpha, gamma_max, opts);
    out.push_back(PlanResult{draft, k, plan.gamma, alpha, plan.report});
  }
  std::stable_sort(out.begin(), out.end(), [](const PlanResult& a, const PlanResult& b) {
    return a.report.speedup > b.report.speedup;
  });
  return out;
}

InflectionResult find_inflection(const HardwareSpec& hw, const ModelArch& target_arch,
                                 const DraftSpec& draft, double alpha,
                                 const std::vector<std::int64_t>& batch_grid,
                                 const std::vector<std::int64_t>& seq_grid, int gamma,
                                 const CostOptions& opts) {
  require_sorted_grid(batch_grid, "batch grid", 2);
  require_sorted_grid(seq_grid, "sequence grid", 2);
  InflectionResult out{std::nullopt, batch_grid, seq_grid, {}};
  for (const auto s : seq_grid) {
    std::vector<double> row;
    row.reserve(batch_grid.size());
    for (const auto b : batch_grid) {
      row.push_back(analyze(hw, target_arch, draft, b, s, gamma, alpha, opts).speedup);
    }
    const bool grows = std::is_sorted(row.begin(), row.end());
    if (!out.s_inflection && row.back() >= 1.0 && grows) out.s_inflection = s;
    out.speedup.push_back(std::move(row));
  }
  return out;
}

std::vector<SweepRow> sweep(const HardwareSpec& hw, const ModelArch& target_arch, const DraftSpec& draft,
                            double alpha, const std::vector<std::int64_t>& batch_grid,
                            const std::vector<std::int64_t>& seq_grid, int gamma, const CostOptions& opts) {
  if (batch_grid.empty() || seq_grid.empty()) throw std::invalid_argument("sweep: empty grid");
  std::vector<SweepRow> rows;
  rows.reserve(batch_grid.size() * seq_grid.size());
  for (const auto s : seq_grid) {
    for (const auto b : batch_grid) {
      const auto r = analyze(hw, target_arch, draft, b, s, gamma, alpha, opts);
      const auto d = draft_step_time(hw, target_arch, effective_draft(draft, s), b, s, opts);
      SweepRow row;
      row.batch = b;
      row.seq_len = s;
      row.t_target_s = r.t_target_s;
      row.t_draft_s = d.t_draft_s;
      row.t_select_s = d.t_select_s;
      row.t_verify_s = r.t_verify_s;
      row.v_ratio = r.t_verify_s / r.t_target_s;
      row.d_ratio = gamma * r.t_draft_s / r.t_target_s;
      row.omega = r.omega;
      row.speedup = r.speedup;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace specdec
