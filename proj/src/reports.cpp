#include "specdec/reports.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "specdec/config_io.hpp"
#include "specdec/error.hpp"
#include "specdec/text_util.hpp"

namespace specdec {

using nlohmann::json;

namespace {

constexpr double kMs = 1e3;

double rel_residual(double reported, double predicted) { return (reported - predicted) / reported; }

ReferenceRun parse_run(const std::vector<std::string>& f) {
  if (f.size() != 13) throw std::invalid_argument("expected 13 fields, got " + std::to_string(f.size()));
  ReferenceRun r;
  r.target = f[0];
  r.draft = f[1];
  r.task = f[2];
  r.gpu = f[3];
  r.prefill = parse_int(f[4], "prefill");
  r.bsz = parse_int(f[5], "bsz");
  r.gamma = static_cast<int>(parse_int(f[6], "gamma"));
  r.gamma_t_d_ms = parse_double(f[7], "gamma_t_d_ms");
  r.t_v_ms = parse_double(f[8], "t_v_ms");
  r.omega = parse_double(f[9], "omega");
  r.t_ar_ms = parse_double(f[10], "t_ar_ms");
  r.t_sd_ms = parse_double(f[11], "t_sd_ms");
  r.speedup = parse_double(f[12], "speedup");
  if (r.gamma < 1) throw std::invalid_argument("gamma must be >= 1");
  if (!(r.gamma_t_d_ms > 0 && r.t_v_ms > 0 && r.t_ar_ms > 0 && r.t_sd_ms > 0)) {
    throw std::invalid_argument("times must be > 0");
  }
  if (!(r.omega >= 1)) throw std::invalid_argument("omega must be >= 1");
  if (!(r.speedup > 0)) throw std::invalid_argument("speedup must be > 0");
  return r;
}

}  // namespace

ReferenceRunSet parse_reference_runs(std::istream& in, const std::string& source) {
  ReferenceRunSet out;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kReferenceRunHeader) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": expected header '" +
                          kReferenceRunHeader + "'");
      }
      saw_header = true;
      continue;
    }
    try {
      auto run = parse_run(split_csv_line(line));
      run.line = line_no;
      out.rows.push_back(std::move(run));
    } catch (const std::exception& e) {
      out.errors.push_back(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!saw_header) throw ConfigError(source + ": missing header");
  return out;
}

ReferenceRunSet load_reference_runs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse_reference_runs(in, path);
}

bool RunResidual::x_ok() const { return std::abs(x_reported_residual) <= kSpeedupTolerance; }
bool RunResidual::t_sd_ok() const { return std::abs(t_sd_residual) <= kSdTimeTolerance; }

RunResidual check_reference_run(const ReferenceRun& run) {
  RunResidual r;
  r.run = run;
  if (run.omega <= run.gamma + 1.0) r.implied_alpha = invert_alpha_from_omega(run.gamma, run.omega);
  // gamma_t_d_ms already multiplies the per-step draft time by gamma.
  r.t_sd_pred_ms = (run.gamma_t_d_ms + run.t_v_ms) / run.omega;
  r.t_sd_residual = rel_residual(run.t_sd_ms, r.t_sd_pred_ms);
  r.x_pred_reported = run.t_ar_ms / run.t_sd_ms;
  r.x_reported_residual = rel_residual(run.speedup, r.x_pred_reported);
  r.x_pred_formula = run.t_ar_ms / r.t_sd_pred_ms;
  r.x_formula_residual = rel_residual(run.speedup, r.x_pred_formula);
  return r;
}

void write_residual_csv(std::ostream& out, const std::vector<RunResidual>& residuals) {
  out << kResidualHeader << '\n';
  for (const auto& r : residuals) {
    const auto& x = r.run;
    out << x.line << ',' << x.target << ',' << x.draft << ',' << x.task << ',' << x.gpu << ',' << x.prefill
        << ',' << x.bsz << ',' << x.gamma << ',' << format_double(x.omega) << ','
        << (r.implied_alpha ? format_double(*r.implied_alpha) : "") << ',' << format_double(x.t_sd_ms) << ','
        << format_double(r.t_sd_pred_ms) << ',' << format_double(r.t_sd_residual) << ','
        << format_double(x.speedup) << ',' << format_double(r.x_pred_reported) << ','
        << format_double(r.x_reported_residual) << ',' << format_double(r.x_pred_formula) << ','
        << format_double(r.x_formula_residual) << ',' << (r.x_ok() ? 1 : 0) << ',' << (r.t_sd_ok() ? 1 : 0)
        << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << r.batch << ',' << r.seq_len << ',' << format_double(r.t_target_s * kMs) << ','
        << format_double(r.t_draft_s * kMs) << ',' << format_double(r.t_select_s * kMs) << ','
        << format_double(r.t_verify_s * kMs) << ',' << format_double(r.v_ratio) << ','
        << format_double(r.d_ratio) << ',' << format_double(r.omega) << ',' << format_double(r.speedup)
        << '\n';
  }
}

json to_json(const CostBreakdown& c) {
  const double p = c.param_load_s * kMs;
  const double k = c.kv_load_s * kMs;
  const double a = c.act_load_s * kMs;
  const double f = c.compute_s * kMs;
  // Summed in ms so the emitted components add up to the emitted total.
  const double total = c.mode == CostMode::Additive ? p + k + a + f : std::max(f, p + k + a);
  return {{"mode", to_string(c.mode)}, {"param_load_ms", p}, {"kv_load_ms", k},
          {"act_load_ms", a},          {"compute_ms", f},    {"total_ms", total}};
}

json to_json(const SpeedupReport& r) {
  return {{"t_target_ms", r.t_target_s * kMs},
          {"t_draft_ms", r.t_draft_s * kMs},
          {"t_select_ms", r.t_select_s * kMs},
          {"t_verify_ms", r.t_verify_s * kMs},
          {"gamma", r.gamma},
          {"alpha", r.alpha},
          {"omega", r.omega},
          {"t_sd_avg_ms", r.t_sd_avg_s * kMs},
          {"speedup", r.speedup}};
}

json to_json(const PlanResult& p) {
  return {{"draft", to_json(p.draft)},
          {"kv_budget", p.kv_budget},
          {"gamma", p.gamma},
          {"alpha", p.alpha},
          {"report", to_json(p.report)}};
}

json to_json(const InflectionResult& r) {
  json grid = json::array();
  for (std::size_t si = 0; si < r.seq_grid.size(); ++si) {
    for (std::size_t bi = 0; bi < r.batch_grid.size(); ++bi) {
      grid.push_back({{"seqlen", r.seq_grid[si]}, {"batch", r.batch_grid[bi]}, {"speedup", r.speedup[si][bi]}});
    }
  }
  return {{"s_inflection", r.s_inflection ? json(*r.s_inflection) : json(nullptr)},
          {"batches", r.batch_grid},
          {"seqlens", r.seq_grid},
          {"grid", grid}};
}

json to_json(const SimResult& r) {
  return {{"total_tokens", r.total_tokens},
          {"total_steps", r.total_steps},
          {"uncapped_steps", r.uncapped_steps},
          {"misaligned_steps", r.misaligned_steps},
          {"model_time_ms", r.model_time_s * kMs},
          {"baseline_time_ms", r.baseline_time_s * kMs},
          {"empirical_omega", r.empirical_omega},
          {"empirical_speedup", r.empirical_speedup},
          {"per_seq_tokens", r.per_seq_tokens}};
}

}  // namespace specdec
