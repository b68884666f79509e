#pragma once

// Closed-form speculative decoding arithmetic: expected tokens per
// verification cycle, amortized per-token latency and speedup.

#include <functional>
#include <optional>

namespace specdec {

/// Per-step timing of one speculative decoding configuration and the
/// speedup it implies over plain autoregressive decoding.
struct SpeedupReport {
  double t_target_s = 0.0;  // one autoregressive step
  double t_draft_s = 0.0;   // one draft step, KV selection included
  double t_select_s = 0.0;  // selection share of t_draft_s
  double t_verify_s = 0.0;  // verifying gamma drafted tokens
  int gamma = 1;
  double alpha = 0.0;
  double omega = 1.0;       // expected tokens per cycle
  double t_sd_avg_s = 0.0;  // per generated token
  double speedup = 1.0;
};

inline constexpr int kDefaultGammaMax = 16;

/// Expected tokens produced per draft-and-verify cycle with i.i.d. acceptance.
/// alpha = 1 returns the limit gamma + 1.
double expected_gen_len(int gamma, double alpha);

/// Average latency per generated token: (gamma * (draft + select) + verify) / omega.
double sd_avg_time(double t_draft_s, double t_select_s, double t_verify_s, int gamma, double omega);

double speedup_ratio(double t_target_s, double t_sd_avg_s);

/// Acceptance rate that produces `omega` expected tokens at this gamma, by bisection.
double invert_alpha_from_omega(int gamma, double omega, double tol = 1e-9);

/// Assembles a report whose derived fields satisfy the exact identities.
SpeedupReport make_report(double t_target_s, double t_draft_s, double t_select_s,
                          double t_verify_s, int gamma, double alpha);

/// Best speedup over gamma in [1, gamma_max] at the given acceptance rate,
/// and the smallest gamma achieving it.
struct GammaChoice {
  int gamma = 1;
  double speedup = 0.0;
};
GammaChoice best_gamma_speedup(double t_target_s, double t_draft_s, double t_select_s,
                               const std::function<double(int)>& t_verify_s, double alpha,
                               int gamma_max);

/// Smallest acceptance rate for which some gamma in [1, gamma_max] reaches
/// `target_x`. std::nullopt when even alpha = 1 falls short.
std::optional<double> min_acceptance_for_speedup(double t_target_s, double t_draft_s,
                                                 double t_select_s,
                                                 const std::function<double(int)>& t_verify_s,
                                                 double target_x, int gamma_max = kDefaultGammaMax,
                                                 double tol = 1e-6);

}  // namespace specdec
