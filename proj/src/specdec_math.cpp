#include "specdec/specdec_math.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace specdec {

double expected_gen_len(int gamma, double alpha) {
  if (gamma < 1) throw std::invalid_argument("expected_gen_len: gamma must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("expected_gen_len: alpha must be in [0, 1]");
  }
  if (alpha == 1.0) return gamma + 1.0;
  return (1.0 - std::pow(alpha, gamma + 1)) / (1.0 - alpha);
}

double sd_avg_time(double t_draft_s, double t_select_s, double t_verify_s, int gamma, double omega) {
  if (!(omega >= 1.0)) throw std::invalid_argument("sd_avg_time: omega must be >= 1");
  if (t_draft_s < 0 || t_select_s < 0 || t_verify_s < 0) {
    throw std::invalid_argument("sd_avg_time: times must be >= 0");
  }
  return (gamma * (t_draft_s + t_select_s) + t_verify_s) / omega;
}

double speedup_ratio(double t_target_s, double t_sd_avg_s) {
  if (!(t_target_s > 0) || !(t_sd_avg_s > 0)) {
    throw std::invalid_argument("speedup_ratio: times must be > 0");
  }
  return t_target_s / t_sd_avg_s;
}

double invert_alpha_from_omega(int gamma, double omega, double tol) {
  if (gamma < 1) throw std::invalid_argument("invert_alpha_from_omega: gamma must be >= 1");
  if (!(omega >= 1.0 && omega <= gamma + 1.0)) {
    throw std::invalid_argument("invert_alpha_from_omega: omega " + std::to_string(omega) +
                                " outside [1, " + std::to_string(gamma + 1) + "]");
  }
  if (omega == 1.0) return 0.0;
  if (omega == gamma + 1.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (expected_gen_len(gamma, mid) < omega) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SpeedupReport make_report(double t_target_s, double t_draft_s, double t_select_s,
                          double t_verify_s, int gamma, double alpha) {
  SpeedupReport r;
  r.t_target_s = t_target_s;
  r.t_draft_s = t_draft_s + t_select_s;
  r.t_select_s = t_select_s;
  r.t_verify_s = t_verify_s;
  r.gamma = gamma;
  r.alpha = alpha;
  r.omega = expected_gen_len(gamma, alpha);
  r.t_sd_avg_s = sd_avg_time(t_draft_s, t_select_s, t_verify_s, gamma, r.omega);
  r.speedup = speedup_ratio(t_target_s, r.t_sd_avg_s);
  return r;
}

GammaChoice best_gamma_speedup(double t_target_s, double t_draft_s, double t_select_s,
                               const std::function<double(int)>& t_verify_s, double alpha,
                               int gamma_max) {
  if (gamma_max < 1) throw std::invalid_argument("gamma_max must be >= 1");
  GammaChoice best{1, -1.0};
  for (int g = 1; g <= gamma_max; ++g) {
    const double omega = expected_gen_len(g, alpha);
    const double x = speedup_ratio(t_target_s, sd_avg_time(t_draft_s, t_select_s, t_verify_s(g), g, omega));
    if (x > best.speedup) best = {g, x};
  }
  return best;
}

std::optional<double> min_acceptance_for_speedup(double t_target_s, double t_draft_s,
                                                 double t_select_s,
                                                 const std::function<double(int)>& t_verify_s,
                                                 double target_x, int gamma_max, double tol) {
  if (!(target_x > 0)) throw std::invalid_argument("min_acceptance_for_speedup: target must be > 0");
  auto reaches = [&](double alpha) {
    return best_gamma_speedup(t_target_s, t_draft_s, t_select_s, t_verify_s, alpha, gamma_max).speedup >=
           target_x;
  };
  if (!reaches(1.0)) return std::nullopt;
  if (reaches(0.0)) return 0.0;
  // Best-gamma speedup is non-decreasing in alpha; keep hi feasible.
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (reaches(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace specdec
