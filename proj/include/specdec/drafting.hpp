#pragma once

// Drafting strategies and their per-step cost: self-speculation over a
// compressed KV cache (static or dynamically searched) and external draft
// models. Also holds measured acceptance-rate tables.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "specdec/perf_model.hpp"

namespace specdec {

enum class SearchPreset { PQCache, TopKOracle, Custom };

const char* to_string(SearchPreset preset);

/// Per-draft-step cost of finding the KV entries a dynamic method attends to.
struct SearchCostModel {
  SearchPreset preset = SearchPreset::Custom;
  double fixed_s = 0.0;
  /// Bytes read per context token per layer. Used only for the Custom preset;
  /// the named presets derive it from the model shape.
  double bytes_per_token_scanned = 0.0;

  void validate() const;
};

/// Bytes scanned per context token per layer for this search method.
///   TopKOracle: full keys of every KV head.
///   PQCache:    16 one-byte product-quantization codes per KV head.
double scanned_bytes_per_token(const SearchCostModel& search, const ModelArch& arch);

/// Target weights drafting over a pre-gathered K-token cache (StreamingLLM, SnapKV).
struct SelfSpecStatic {
  std::int64_t kv_budget = 0;
  std::string method_tag;
};

/// Target weights drafting over K tokens chosen per query by a search (PQCache, top-k).
struct SelfSpecDynamic {
  std::int64_t kv_budget = 0;
  SearchCostModel search;
  std::string method_tag;
};

struct FullKv {};
struct StaticBudget {
  std::int64_t kv_budget = 0;
};
using KvPolicy = std::variant<FullKv, StaticBudget>;

/// A separate, smaller draft model.
struct ExternalDraft {
  ModelArch arch;
  KvPolicy kv_policy = FullKv{};
  std::string method_tag;
};

using DraftVariant = std::variant<SelfSpecStatic, SelfSpecDynamic, ExternalDraft>;

struct DraftSpec {
  DraftVariant variant;

  void validate() const;

  const std::string& method_tag() const;
  /// KV budget for budgeted variants; nullopt for a full-KV external draft.
  std::optional<std::int64_t> kv_budget() const;
  bool has_search() const { return std::holds_alternative<SelfSpecDynamic>(variant); }
  /// Same strategy with its budget replaced. Full-KV drafts are returned unchanged.
  DraftSpec with_budget(std::int64_t k) const;
  std::string describe() const;
};

/// Budgeted drafts whose budget exceeds the context attend to the whole
/// context instead; this returns that effective draft.
DraftSpec effective_draft(const DraftSpec& draft, std::int64_t seq_len);

struct DraftStepTime {
  double t_draft_s = 0.0;
  double t_select_s = 0.0;
};

/// Selection overhead of a dynamic method for one draft step over a
/// `seq_len` token context.
double select_cost(const SearchCostModel& search, const HardwareSpec& hw, const ModelArch& arch,
                   std::int64_t batch, std::int64_t seq_len);

/// Cost of one draft step. Budgeted variants require kv_budget <= seq_len.
DraftStepTime draft_step_time(const HardwareSpec& hw, const ModelArch& target_arch,
                              const DraftSpec& draft, std::int64_t batch, std::int64_t seq_len,
                              const CostOptions& opts = {});

struct AcceptanceRow {
  std::string method_tag;
  std::string task;
  std::int64_t kv_budget = 0;
  double alpha = 0.0;
};

/// Measured acceptance rates keyed by (method, task, budget).
class AcceptanceTable {
 public:
  AcceptanceTable() = default;

  /// Throws ConfigError on alpha outside [0, 1], budget < 1 or a duplicate key.
  void add(AcceptanceRow row);

  const std::vector<AcceptanceRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  bool has_group(const std::string& method, const std::string& task) const;
  std::vector<std::string> groups() const;

  /// Exact hit, else piecewise-linear in budget, clamped at the group's ends.
  double lookup_alpha(const std::string& method, const std::string& task, std::int64_t k) const;

 private:
  std::vector<AcceptanceRow> rows_;
};

inline constexpr const char* kAcceptanceHeader = "method,task,kv_budget,alpha";

AcceptanceTable parse_acceptance_table(std::istream& in, const std::string& source = "<stream>");
AcceptanceTable load_acceptance_table(const std::filesystem::path& path);

inline double lookup_alpha(const AcceptanceTable& table, const std::string& method,
                           const std::string& task, std::int64_t k) {
  return table.lookup_alpha(method, task, k);
}

}  // namespace specdec
