#include "specdec/drafting.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "specdec/error.hpp"
#include "specdec/text_util.hpp"

namespace specdec {

namespace {

constexpr double kPqSubvectors = 16.0;  // one-byte code each

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

const char* to_string(SearchPreset preset) {
  switch (preset) {
    case SearchPreset::PQCache:
      return "pqcache";
    case SearchPreset::TopKOracle:
      return "topk_oracle";
    case SearchPreset::Custom:
      return "custom";
  }
  return "custom";
}

void SearchCostModel::validate() const {
  if (!(fixed_s >= 0) || !(bytes_per_token_scanned >= 0)) {
    throw std::invalid_argument("search cost fields must be >= 0");
  }
}

double scanned_bytes_per_token(const SearchCostModel& search, const ModelArch& arch) {
  switch (search.preset) {
    case SearchPreset::TopKOracle:
      return static_cast<double>(arch.num_kv_heads * arch.head_dim * arch.dtype_bytes);
    case SearchPreset::PQCache:
      return static_cast<double>(arch.num_kv_heads) * kPqSubvectors;
    case SearchPreset::Custom:
      break;
  }
  return search.bytes_per_token_scanned;
}

void DraftSpec::validate() const {
  std::visit(overloaded{
                 [](const SelfSpecStatic& d) {
                   if (d.kv_budget < 1) throw std::invalid_argument("draft kv_budget must be >= 1");
                 },
                 [](const SelfSpecDynamic& d) {
                   if (d.kv_budget < 1) throw std::invalid_argument("draft kv_budget must be >= 1");
                   d.search.validate();
                 },
                 [](const ExternalDraft& d) {
                   d.arch.validate();
                   if (const auto* b = std::get_if<StaticBudget>(&d.kv_policy); b && b->kv_budget < 1) {
                     throw std::invalid_argument("draft kv_budget must be >= 1");
                   }
                 },
             },
             variant);
}

const std::string& DraftSpec::method_tag() const {
  return std::visit([](const auto& d) -> const std::string& { return d.method_tag; }, variant);
}

std::optional<std::int64_t> DraftSpec::kv_budget() const {
  return std::visit(overloaded{
                        [](const SelfSpecStatic& d) -> std::optional<std::int64_t> { return d.kv_budget; },
                        [](const SelfSpecDynamic& d) -> std::optional<std::int64_t> { return d.kv_budget; },
                        [](const ExternalDraft& d) -> std::optional<std::int64_t> {
                          if (const auto* b = std::get_if<StaticBudget>(&d.kv_policy)) return b->kv_budget;
                          return std::nullopt;
                        },
                    },
                    variant);
}

DraftSpec DraftSpec::with_budget(std::int64_t k) const {
  DraftSpec out = *this;
  std::visit(overloaded{
                 [k](SelfSpecStatic& d) { d.kv_budget = k; },
                 [k](SelfSpecDynamic& d) { d.kv_budget = k; },
                 [k](ExternalDraft& d) {
                   if (std::holds_alternative<StaticBudget>(d.kv_policy)) d.kv_policy = StaticBudget{k};
                 },
             },
             out.variant);
  return out;
}

std::string DraftSpec::describe() const {
  return std::visit(overloaded{
                        [](const SelfSpecStatic& d) {
                          return "self_static(" + d.method_tag + ", K=" + std::to_string(d.kv_budget) + ")";
                        },
                        [](const SelfSpecDynamic& d) {
                          return "self_dynamic(" + d.method_tag + ", K=" + std::to_string(d.kv_budget) +
                                 ", " + to_string(d.search.preset) + ")";
                        },
                        [](const ExternalDraft& d) {
                          std::string kv = "full";
                          if (const auto* b = std::get_if<StaticBudget>(&d.kv_policy)) {
                            kv = "K=" + std::to_string(b->kv_budget);
                          }
                          return "external(" + d.arch.name + ", " + kv + ")";
                        },
                    },
                    variant);
}

DraftSpec effective_draft(const DraftSpec& draft, std::int64_t seq_len) {
  const auto k = draft.kv_budget();
  if (k && *k > seq_len) return draft.with_budget(seq_len);
  return draft;
}

double select_cost(const SearchCostModel& search, const HardwareSpec& hw, const ModelArch& arch,
                   std::int64_t batch, std::int64_t seq_len) {
  if (batch < 1) throw std::invalid_argument("select_cost: batch must be >= 1");
  const double scanned = static_cast<double>(batch) * static_cast<double>(seq_len) *
                         static_cast<double>(arch.num_layers) * scanned_bytes_per_token(search, arch);
  return search.fixed_s + scanned / hw.aggregate_bandwidth();
}

namespace {

void check_budget(std::int64_t k, std::int64_t seq_len) {
  if (k > seq_len) {
    throw std::invalid_argument("draft KV budget " + std::to_string(k) + " exceeds available context " +
                                std::to_string(seq_len));
  }
}

}  // namespace

DraftStepTime draft_step_time(const HardwareSpec& hw, const ModelArch& target_arch,
                              const DraftSpec& draft, std::int64_t batch, std::int64_t seq_len,
                              const CostOptions& opts) {
  return std::visit(
      overloaded{
          [&](const SelfSpecStatic& d) {
            check_budget(d.kv_budget, seq_len);
            return DraftStepTime{decode_step_time(hw, target_arch, batch, d.kv_budget, 1, opts).total_s, 0.0};
          },
          [&](const SelfSpecDynamic& d) {
            check_budget(d.kv_budget, seq_len);
            return DraftStepTime{decode_step_time(hw, target_arch, batch, d.kv_budget, 1, opts).total_s,
                                 select_cost(d.search, hw, target_arch, batch, seq_len)};
          },
          [&](const ExternalDraft& d) {
            std::int64_t ctx = seq_len;
            if (const auto* b = std::get_if<StaticBudget>(&d.kv_policy)) {
              check_budget(b->kv_budget, seq_len);
              ctx = b->kv_budget;
            }
            return DraftStepTime{decode_step_time(hw, d.arch, batch, ctx, 1, opts).total_s, 0.0};
          },
      },
      draft.variant);
}

void AcceptanceTable::add(AcceptanceRow row) {
  if (!(row.alpha >= 0.0 && row.alpha <= 1.0)) {
    throw ConfigError("alpha " + format_double(row.alpha) + " outside [0, 1]");
  }
  if (row.kv_budget < 1) throw ConfigError("kv_budget must be a positive integer");
  for (const auto& r : rows_) {
    if (r.method_tag == row.method_tag && r.task == row.task && r.kv_budget == row.kv_budget) {
      throw ConfigError("duplicate entry (" + row.method_tag + ", " + row.task + ", " +
                        std::to_string(row.kv_budget) + ")");
    }
  }
  rows_.push_back(std::move(row));
}

bool AcceptanceTable::has_group(const std::string& method, const std::string& task) const {
  return std::any_of(rows_.begin(), rows_.end(),
                     [&](const AcceptanceRow& r) { return r.method_tag == method && r.task == task; });
}

std::vector<std::string> AcceptanceTable::groups() const {
  std::vector<std::string> out;
  for (const auto& r : rows_) {
    std::string g = r.method_tag + "/" + r.task;
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(std::move(g));
  }
  return out;
}

double AcceptanceTable::lookup_alpha(const std::string& method, const std::string& task,
                                     std::int64_t k) const {
  std::vector<std::pair<std::int64_t, double>> pts;
  for (const auto& r : rows_) {
    if (r.method_tag == method && r.task == task) pts.emplace_back(r.kv_budget, r.alpha);
  }
  if (pts.empty()) {
    std::string known;
    for (const auto& g : groups()) known += (known.empty() ? "" : ", ") + g;
    throw ConfigError("no acceptance data for " + method + "/" + task +
                      " (available: " + (known.empty() ? "none" : known) + ")");
  }
  std::sort(pts.begin(), pts.end());
  if (k <= pts.front().first) return pts.front().second;
  if (k >= pts.back().first) return pts.back().second;
  auto hi = std::lower_bound(pts.begin(), pts.end(), k,
                             [](const auto& p, std::int64_t v) { return p.first < v; });
  if (hi->first == k) return hi->second;
  auto lo = std::prev(hi);
  const double t = static_cast<double>(k - lo->first) / static_cast<double>(hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

AcceptanceTable parse_acceptance_table(std::istream& in, const std::string& source) {
  AcceptanceTable table;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kAcceptanceHeader) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": expected header '" +
                          kAcceptanceHeader + "'");
      }
      saw_header = true;
      continue;
    }
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw ConfigError(where + "expected 4 fields, got " + std::to_string(fields.size()));
    }
    AcceptanceRow row;
    row.method_tag = fields[0];
    row.task = fields[1];
    try {
      row.kv_budget = parse_int(fields[2], "kv_budget");
      row.alpha = parse_double(fields[3], "alpha");
      table.add(std::move(row));
    } catch (const std::exception& e) {
      throw ConfigError(where + e.what());
    }
  }
  if (!saw_header) throw ConfigError(source + ": missing header '" + std::string(kAcceptanceHeader) + "'");
  return table;
}

AcceptanceTable load_acceptance_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open acceptance table " + path.string());
  return parse_acceptance_table(in, path.string());
}

}  // namespace specdec
