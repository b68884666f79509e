#include "specdec/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "specdec/config_io.hpp"
#include "specdec/error.hpp"
#include "specdec/planner.hpp"
#include "specdec/reports.hpp"
#include "specdec/simulator.hpp"
#include "specdec/text_util.hpp"

namespace specdec {

using nlohmann::json;

namespace {

constexpr int kJsonIndent = 2;

struct CommonFlags {
  std::string hw_path;
  std::string model_path;
  std::string mode = "additive";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--hw", f.hw_path, "Hardware JSON")->required();
  cmd->add_option("--model", f.model_path, "Target model JSON")->required();
  cmd->add_option("--mode", f.mode, "Cost composition")->check(CLI::IsMember({"additive", "roofline"}));
}

void emit(std::ostream& out, const json& j) { out << j.dump(kJsonIndent) << '\n'; }

// breakdown -----------------------------------------------------------------

struct BreakdownFlags {
  CommonFlags common;
  std::int64_t batch = 1;
  std::int64_t seqlen = 0;
  std::int64_t n_tokens = 1;
  std::string format = "json";
};

int run_breakdown(const BreakdownFlags& f, std::ostream& out) {
  const auto hw = load_hardware(f.common.hw_path);
  const auto arch = load_model(f.common.model_path);
  const auto cost =
      decode_step_time(hw, arch, f.batch, f.seqlen, f.n_tokens, CostOptions(parse_cost_mode(f.common.mode)));
  auto j = to_json(cost);
  if (f.format == "csv") {
    out << kBreakdownHeader << '\n'
        << f.batch << ',' << f.seqlen << ',' << format_double(j["param_load_ms"].get<double>()) << ','
        << format_double(j["kv_load_ms"].get<double>()) << ',' << format_double(j["act_load_ms"].get<double>())
        << ',' << format_double(j["compute_ms"].get<double>()) << ','
        << format_double(j["total_ms"].get<double>()) << '\n';
    return kExitOk;
  }
  j["hardware"] = hw.name;
  j["model"] = arch.name;
  j["batch"] = f.batch;
  j["seqlen"] = f.seqlen;
  j["n_tokens"] = f.n_tokens;
  j["arithmetic_intensity"] = arithmetic_intensity(arch, f.batch, f.seqlen, f.n_tokens);
  j["flops_to_bandwidth"] = hw.flops_to_bandwidth();
  emit(out, j);
  return kExitOk;
}

// sweep -----------------------------------------------------------------------

struct AlphaSource {
  std::optional<double> alpha;
  std::string acceptance_path;
  std::string method;
  std::string task;
};

void add_alpha_source(CLI::App* cmd, AlphaSource& a) {
  auto* alpha = cmd->add_option("--alpha", a.alpha, "Acceptance rate")->check(CLI::Range(0.0, 1.0));
  auto* table = cmd->add_option("--acceptance", a.acceptance_path, "Acceptance CSV");
  cmd->add_option("--method", a.method, "Method tag in the acceptance table (default: the draft's)");
  cmd->add_option("--task", a.task, "Task in the acceptance table");
  alpha->excludes(table);
}

/// Alpha for a draft at context S: explicit value, or a table lookup at the draft's budget.
std::function<double(std::int64_t)> resolve_alpha(const AlphaSource& a, const DraftSpec& draft) {
  if (a.alpha) {
    const double v = *a.alpha;
    return [v](std::int64_t) { return v; };
  }
  if (a.acceptance_path.empty()) throw ConfigError("one of --alpha or --acceptance is required");
  if (a.task.empty()) throw ConfigError("--acceptance needs --task");
  auto table = std::make_shared<AcceptanceTable>(load_acceptance_table(a.acceptance_path));
  const std::string method = a.method.empty() ? draft.method_tag() : a.method;
  if (!table->has_group(method, a.task)) {
    table->lookup_alpha(method, a.task, 1);  // throws with the available groups
  }
  const auto budget = draft.kv_budget();
  return [table, method, task = a.task, budget](std::int64_t s) {
    return table->lookup_alpha(method, task, budget.value_or(s));
  };
}

struct SweepFlags {
  CommonFlags common;
  std::string draft_path;
  AlphaSource alpha;
  std::vector<std::int64_t> batches;
  std::vector<std::int64_t> seqlens;
  int gamma = 3;
};

int run_sweep(const SweepFlags& f, std::ostream& out) {
  const auto hw = load_hardware(f.common.hw_path);
  const auto arch = load_model(f.common.model_path);
  const auto draft = load_draft(f.draft_path);
  const auto alpha_at = resolve_alpha(f.alpha, draft);
  const CostOptions opts(parse_cost_mode(f.common.mode));
  std::vector<SweepRow> rows;
  for (const auto s : f.seqlens) {
    auto part = sweep(hw, arch, draft, alpha_at(s), f.batches, {s}, f.gamma, opts);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  write_sweep_csv(out, rows);
  return kExitOk;
}

// optimize --------------------------------------------------------------------

struct OptimizeFlags {
  CommonFlags common;
  std::string acceptance_path;
  std::string method;
  std::string task;
  std::string draft_path;
  std::vector<std::int64_t> budgets;
  std::int64_t batch = 1;
  std::int64_t seqlen = 0;
  int gamma_max = kDefaultGammaMax;
  std::optional<double> target_speedup;
};

int run_optimize(const OptimizeFlags& f, std::ostream& out, std::ostream& err) {
  const auto hw = load_hardware(f.common.hw_path);
  const auto arch = load_model(f.common.model_path);
  const auto table = load_acceptance_table(f.acceptance_path);
  DraftSpec base;
  if (!f.draft_path.empty()) {
    base = load_draft(f.draft_path);
    if (!f.method.empty() && f.method != base.method_tag()) {
      throw ConfigError("--method '" + f.method + "' disagrees with the draft's method '" + base.method_tag() + "'");
    }
  } else {
    if (f.method.empty()) throw ConfigError("--method is required without --draft");
    base.variant = SelfSpecStatic{f.budgets.empty() ? 1 : f.budgets.front(), f.method};
  }
  const CostOptions opts(parse_cost_mode(f.common.mode));
  const auto plan =
      optimize_budget(hw, arch, base, f.task, f.budgets, table, f.batch, f.seqlen, f.gamma_max, opts);
  for (const auto& w : plan.warnings) err << "warning: " << w << '\n';

  auto j = to_json(plan.best);
  j["batch"] = f.batch;
  j["seqlen"] = f.seqlen;
  j["task"] = f.task;
  j["skipped"] = plan.warnings;
  int code = kExitOk;
  if (f.target_speedup) {
    const auto& r = plan.best.report;
    auto t_verify = [&](int g) {
      return decode_step_time(hw, arch, f.batch, f.seqlen, g + 1, opts).total_s;
    };
    const auto min_alpha = min_acceptance_for_speedup(r.t_target_s, r.t_draft_s - r.t_select_s, r.t_select_s,
                                                      t_verify, *f.target_speedup, f.gamma_max);
    j["target_speedup"] = *f.target_speedup;
    j["min_alpha"] = min_alpha ? json(*min_alpha) : json(nullptr);
    j["meets_target"] = min_alpha && plan.best.alpha >= *min_alpha;
    if (!min_alpha) {
      err << "infeasible: no acceptance rate reaches " << *f.target_speedup << "x with budget "
          << plan.best.kv_budget << '\n';
      code = kExitInfeasible;
    }
  }
  emit(out, j);
  return code;
}

// inflection ------------------------------------------------------------------

struct InflectionFlags {
  CommonFlags common;
  std::string draft_path;
  double alpha = 0.8;
  std::vector<std::int64_t> batches;
  std::vector<std::int64_t> seqlens;
  int gamma = 3;
};

int run_inflection(const InflectionFlags& f, std::ostream& out) {
  const auto hw = load_hardware(f.common.hw_path);
  const auto arch = load_model(f.common.model_path);
  const auto draft = load_draft(f.draft_path);
  const auto result = find_inflection(hw, arch, draft, f.alpha, f.batches, f.seqlens, f.gamma,
                                      CostOptions(parse_cost_mode(f.common.mode)));
  auto j = to_json(result);
  j["gamma"] = f.gamma;
  j["alpha"] = f.alpha;
  emit(out, j);
  return kExitOk;
}

// simulate --------------------------------------------------------------------

struct SimulateFlags {
  CommonFlags common;
  std::string draft_path;
  double alpha = 0.8;
  std::int64_t batch = 1;
  std::int64_t seqlen = 0;
  std::int64_t gen_len = 96;
  int gamma = 3;
  std::uint64_t seed = 0;
  int trials = 1;
};

double rel_dev(double empirical, double analytic) { return (empirical - analytic) / analytic; }

int run_simulate(const SimulateFlags& f, std::ostream& out) {
  const auto hw = load_hardware(f.common.hw_path);
  const auto arch = load_model(f.common.model_path);
  SimConfig cfg;
  cfg.batch = f.batch;
  cfg.initial_context = f.seqlen;
  cfg.gen_len = f.gen_len;
  cfg.gamma = f.gamma;
  cfg.alpha = f.alpha;
  cfg.draft = load_draft(f.draft_path);
  cfg.cost = CostOptions(parse_cost_mode(f.common.mode));
  if (f.trials < 1) throw ConfigError("--trials must be >= 1");

  json trials = json::array();
  double omega_sum = 0.0;
  double speedup_sum = 0.0;
  for (int t = 0; t < f.trials; ++t) {
    cfg.seed = f.seed + static_cast<std::uint64_t>(t);
    const auto r = simulate_sd(hw, arch, cfg);
    auto j = to_json(r);
    j["seed"] = cfg.seed;
    trials.push_back(std::move(j));
    omega_sum += r.empirical_omega;
    speedup_sum += r.empirical_speedup;
  }
  const double emp_omega = omega_sum / f.trials;
  const double emp_speedup = speedup_sum / f.trials;
  const std::int64_t mid_context = f.seqlen + f.gen_len / 2;
  const auto analytic = analyze(hw, arch, cfg.draft, f.batch, mid_context, f.gamma, f.alpha, cfg.cost);

  json j;
  j["config"] = {{"hardware", hw.name}, {"model", arch.name},  {"draft", to_json(cfg.draft)},
                 {"batch", f.batch},    {"seqlen", f.seqlen},  {"gen_len", f.gen_len},
                 {"gamma", f.gamma},    {"alpha", f.alpha},    {"seed", f.seed},
                 {"trials", f.trials},  {"mode", f.common.mode}};
  j["trials"] = trials;
  j["empirical_omega"] = emp_omega;
  j["empirical_speedup"] = emp_speedup;
  j["analytic"] = to_json(analytic);
  j["analytic"]["context"] = mid_context;
  j["omega_rel_dev"] = rel_dev(emp_omega, analytic.omega);
  j["speedup_rel_dev"] = rel_dev(emp_speedup, analytic.speedup);
  emit(out, j);
  return kExitOk;
}

// validate-table --------------------------------------------------------------

int run_validate(const std::string& rows_path, std::ostream& out, std::ostream& err) {
  const auto set = load_reference_runs(rows_path);
  std::vector<RunResidual> residuals;
  residuals.reserve(set.rows.size());
  for (const auto& row : set.rows) residuals.push_back(check_reference_run(row));
  write_residual_csv(out, residuals);
  for (const auto& e : set.errors) err << "error: " << e << '\n';
  return set.errors.empty() ? kExitOk : kExitConfig;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speculative decoding performance model, planner and simulator"};
  app.require_subcommand(1);

  BreakdownFlags bf;
  auto* breakdown = app.add_subcommand("breakdown", "Per-step latency decomposition");
  add_common(breakdown, bf.common);
  breakdown->add_option("--batch", bf.batch)->required()->check(CLI::PositiveNumber);
  breakdown->add_option("--seqlen", bf.seqlen)->required()->check(CLI::NonNegativeNumber);
  breakdown->add_option("--n-tokens", bf.n_tokens, "Tokens per sequence in the step")->check(CLI::PositiveNumber);
  breakdown->add_option("--format", bf.format)->check(CLI::IsMember({"json", "csv"}));

  SweepFlags sf;
  auto* sweep_cmd = app.add_subcommand("sweep", "Cost ratios and speedup over a batch x sequence grid");
  add_common(sweep_cmd, sf.common);
  sweep_cmd->add_option("--draft", sf.draft_path, "Draft JSON")->required();
  add_alpha_source(sweep_cmd, sf.alpha);
  sweep_cmd->add_option("--batches", sf.batches)->required()->delimiter(',');
  sweep_cmd->add_option("--seqlens", sf.seqlens)->required()->delimiter(',');
  sweep_cmd->add_option("--gamma", sf.gamma)->required()->check(CLI::PositiveNumber);

  OptimizeFlags of;
  auto* optimize = app.add_subcommand("optimize", "Best draft KV budget and speculation length");
  add_common(optimize, of.common);
  optimize->add_option("--acceptance", of.acceptance_path)->required();
  optimize->add_option("--method", of.method);
  optimize->add_option("--task", of.task)->required();
  optimize->add_option("--draft", of.draft_path, "Draft JSON giving the strategy (default: static self-speculation)");
  optimize->add_option("--budgets", of.budgets)->required()->delimiter(',');
  optimize->add_option("--batch", of.batch)->required()->check(CLI::PositiveNumber);
  optimize->add_option("--seqlen", of.seqlen)->required()->check(CLI::NonNegativeNumber);
  optimize->add_option("--gamma-max", of.gamma_max)->check(CLI::PositiveNumber);
  optimize->add_option("--target-speedup", of.target_speedup,
                       "Also report the minimum acceptance rate reaching this speedup")
      ->check(CLI::PositiveNumber);

  InflectionFlags inf;
  auto* inflection = app.add_subcommand("inflection", "Critical sequence length");
  add_common(inflection, inf.common);
  inflection->add_option("--draft", inf.draft_path)->required();
  inflection->add_option("--alpha", inf.alpha)->required()->check(CLI::Range(0.0, 1.0));
  inflection->add_option("--batches", inf.batches)->required()->delimiter(',');
  inflection->add_option("--seqlens", inf.seqlens)->required()->delimiter(',');
  inflection->add_option("--gamma", inf.gamma)->required()->check(CLI::PositiveNumber);

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo batch simulation vs analytic prediction");
  add_common(simulate, sim.common);
  simulate->add_option("--draft", sim.draft_path)->required();
  simulate->add_option("--alpha", sim.alpha)->required()->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--batch", sim.batch)->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seqlen", sim.seqlen)->required()->check(CLI::NonNegativeNumber);
  simulate->add_option("--gen-len", sim.gen_len)->required()->check(CLI::PositiveNumber);
  simulate->add_option("--gamma", sim.gamma)->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed)->required();
  simulate->add_option("--trials", sim.trials)->check(CLI::PositiveNumber);

  std::string rows_path;
  auto* validate = app.add_subcommand("validate-table", "Residuals of measured runs against the speedup identities");
  validate->add_option("--rows", rows_path)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*breakdown) return run_breakdown(bf, out);
    if (*sweep_cmd) return run_sweep(sf, out);
    if (*optimize) return run_optimize(of, out, err);
    if (*inflection) return run_inflection(inf, out);
    if (*simulate) return run_simulate(sim, out);
    if (*validate) return run_validate(rows_path, out, err);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace specdec
