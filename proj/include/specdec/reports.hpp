#pragma once

// Report rendering (CSV / JSON, milliseconds) and consistency checks for
// measured speculative decoding runs.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specdec/perf_model.hpp"
#include "specdec/planner.hpp"
#include "specdec/simulator.hpp"
#include "specdec/specdec_math.hpp"

namespace specdec {

inline constexpr const char* kSweepHeader =
    "batch,seqlen,t_target_ms,t_draft_ms,t_select_ms,t_verify_ms,v_ratio,d_ratio,omega,speedup";
inline constexpr const char* kBreakdownHeader =
    "batch,seqlen,param_load_ms,kv_load_ms,act_load_ms,compute_ms,total_ms";
inline constexpr const char* kReferenceRunHeader =
    "target,draft,task,gpu,prefill,bsz,gamma,gamma_t_d_ms,t_v_ms,omega,t_ar_ms,t_sd_ms,speedup";
inline constexpr const char* kResidualHeader =
    "line,target,draft,task,gpu,prefill,bsz,gamma,omega,implied_alpha,t_sd_ms,t_sd_pred_ms,t_sd_residual,"
    "speedup,x_pred_reported,x_reported_residual,x_pred_formula,x_formula_residual,x_ok,t_sd_ok";

/// Tolerances on the relative residuals of a measured run.
inline constexpr double kSpeedupTolerance = 0.01;
inline constexpr double kSdTimeTolerance = 0.10;

/// One measured run: per-step component times, expected tokens, and the
/// resulting autoregressive/speculative latencies and speedup.
struct ReferenceRun {
  std::size_t line = 0;
  std::string target;
  std::string draft;
  std::string task;
  std::string gpu;
  std::int64_t prefill = 0;
  std::int64_t bsz = 0;
  int gamma = 1;
  double gamma_t_d_ms = 0.0;
  double t_v_ms = 0.0;
  double omega = 1.0;
  double t_ar_ms = 0.0;
  double t_sd_ms = 0.0;
  double speedup = 0.0;
};

struct ReferenceRunSet {
  std::vector<ReferenceRun> rows;
  std::vector<std::string> errors;  // "<source>:<line>: message"
};

/// Reads the CSV; a bad row is reported and skipped. A bad header throws ConfigError.
ReferenceRunSet parse_reference_runs(std::istream& in, const std::string& source = "<stream>");
ReferenceRunSet load_reference_runs(const std::string& path);

/// Residuals are (reported - predicted) / reported, so a positive value
/// means the measurement is slower / larger than the component arithmetic.
struct RunResidual {
  ReferenceRun run;
  std::optional<double> implied_alpha;
  double t_sd_pred_ms = 0.0;
  double t_sd_residual = 0.0;
  double x_pred_reported = 0.0;  // t_ar / t_sd
  double x_reported_residual = 0.0;
  double x_pred_formula = 0.0;   // t_ar / t_sd_pred
  double x_formula_residual = 0.0;

  bool x_ok() const;
  bool t_sd_ok() const;
};

RunResidual check_reference_run(const ReferenceRun& run);

void write_residual_csv(std::ostream& out, const std::vector<RunResidual>& residuals);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

nlohmann::json to_json(const CostBreakdown& c);
nlohmann::json to_json(const SpeedupReport& r);
nlohmann::json to_json(const PlanResult& p);
nlohmann::json to_json(const InflectionResult& r);
nlohmann::json to_json(const SimResult& r);

}  // namespace specdec
