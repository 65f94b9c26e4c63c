#include "core/optimal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace forage::optimal {

namespace {

void check_world(double n0, double lambda) {
  if (!(n0 > 0.0)) throw std::domain_error("optimal: n0 must be positive");
  if (lambda < 0.0) throw std::domain_error("optimal: lambda must be non-negative");
}

}  // namespace

double patch_reward(int n, double n0, double lambda) {
  check_world(n0, lambda);
  if (n < 0) throw std::domain_error("patch_reward: n must be non-negative");
  return n0 * std::exp(-lambda * n);
}

double cumulative_patch_reward(int T, double n0, double lambda) {
  check_world(n0, lambda);
  if (T < 0) throw std::domain_error("cumulative_patch_reward: T must be non-negative");
  if (T == 0) return 0.0;
  if (lambda == 0.0) return n0 * T;
  return n0 * (1.0 - std::exp(-lambda * T)) / (1.0 - std::exp(-lambda));
}

double average_rate(int T, int tau, double n0, double lambda) {
  if (T < 1) throw std::domain_error("average_rate: T must be >= 1");
  if (tau < 0) throw std::domain_error("average_rate: tau must be non-negative");
  return cumulative_patch_reward(T, n0, lambda) / static_cast<double>(T + tau);
}

MvtSolution mvt_leave_step(int tau, int t_max, double n0, double lambda) {
  if (tau < 0) throw std::domain_error("mvt_leave_step: tau must be non-negative");
  if (t_max < 1) throw std::domain_error("mvt_leave_step: t_max must be >= 1");
  MvtSolution sol;
  sol.rate_curve.reserve(t_max);
  for (int T = 1; T <= t_max; ++T) {
    const double rate = average_rate(T, tau, n0, lambda);
    sol.rate_curve.push_back(rate);
    if (rate > sol.rate) {
      sol.rate = rate;
      sol.leave_step = T;
    }
  }
  return sol;
}

int empirical_mvt_leave_step(double rho, double n0, double lambda) {
  check_world(n0, lambda);
  if (!(rho > 0.0) || rho > n0)
    throw std::domain_error("empirical_mvt_leave_step: rho must be in (0, n0]");
  if (lambda == 0.0)
    throw std::domain_error("empirical_mvt_leave_step: no crossing when lambda == 0");
  // Analytic guess, then a local integer scan for the exact strict crossing.
  int n = static_cast<int>(std::ceil(std::log(n0 / rho) / lambda));
  n = std::max(0, n - 2);
  while (!(patch_reward(n, n0, lambda) < rho)) ++n;
  return n;
}

double discounted_return_alternating(int m, int P, int tau, double gamma,
                                     int horizon, double n0, double lambda,
                                     bool leave_now) {
  check_world(n0, lambda);
  if (m < 0 || P < 1 || tau < 0 || horizon < 1)
    throw std::domain_error("discounted_return_alternating: bad stream shape");
  if (!(gamma > 0.0) || gamma > 1.0)
    throw std::domain_error("discounted_return_alternating: gamma must be in (0, 1]");

  const int cycle = P + tau;
  double total = 0.0;
  double g = 1.0;
  int t = 0;
  if (!leave_now) {
    total += patch_reward(m, n0, lambda);
    g *= gamma;
    t = 1;
  }
  // Remaining steps follow the leave stream: tau zeros, then (P, tau) cycles.
  const int offset = t;  // leave-stream step index is t - offset
  for (; t < horizon; ++t, g *= gamma) {
    const int s = t - offset;
    if (s < tau) continue;  // initial travel
    const int k = (s - tau) % cycle;
    if (k < P) total += g * patch_reward(k, n0, lambda);
  }
  return total;
}

namespace {

// Horizon truncated to the complete patch/travel cycles that fit.
int complete_cycle_horizon(int P, int tau, int horizon) {
  const int cycle = P + tau;
  int ncyc = (horizon - tau) / cycle;
  if (ncyc < 1) ncyc = 1;
  return tau + ncyc * cycle;
}

}  // namespace

std::optional<int> indifference_step(int P, int tau, double gamma, int horizon,
                                     double n0, double lambda) {
  if (P < 1 || tau < 0 || horizon < 1)
    throw std::domain_error("indifference_step: bad stream shape");
  if (!(gamma > 0.0) || gamma > 1.0)
    throw std::domain_error("indifference_step: gamma must be in (0, 1]");

  // V_stay(m) - V_leave = patch_reward(m) - c with c independent of m.
  double c;
  if (gamma == 1.0) {
    // Undiscounted limit: opportunity cost of the delayed future stream is
    // its cycle-average rate.
    c = cumulative_patch_reward(P, n0, lambda) / static_cast<double>(P + tau);
  } else {
    const int h = complete_cycle_horizon(P, tau, horizon);
    const double v_leave =
        discounted_return_alternating(0, P, tau, gamma, h, n0, lambda, true);
    // V_stay(m) = r(m) + gamma * S_{h-1}; the dropped step h-1 of the shifted
    // stream is a travel zero (complete cycles), so S_{h-1} == S_h == v_leave.
    c = (1.0 - gamma) * v_leave;
  }
  if (!(c > 0.0)) return std::nullopt;
  if (c >= n0) return 0;
  if (lambda == 0.0) return std::nullopt;  // constant reward never crosses below c < n0
  int m = std::max(0, static_cast<int>(std::log(n0 / c) / lambda) - 2);
  while (patch_reward(m, n0, lambda) > c) {
    ++m;
    if (m > 20'000'000) return std::nullopt;
  }
  return m;
}

DiscountedMvtSolution discounted_mvt_leave_step(int tau, double gamma,
                                                int horizon, double n0,
                                                double lambda, int p_max) {
  DiscountedMvtSolution sol;
  sol.gamma = gamma;
  sol.tau = tau;
  sol.horizon = horizon;

  bool have_prev = false;
  double prev_f = 0.0;
  int prev_p = 0;
  for (int P = 1; P <= p_max; ++P) {
    const auto m = indifference_step(P, tau, gamma, horizon, n0, lambda);
    if (m.has_value()) sol.indifference_curve.emplace_back(P, *m);
    // No crossing means staying keeps paying: treat as far above the line.
    const double f = m.has_value() ? static_cast<double>(*m - P)
                                   : std::numeric_limits<double>::infinity();
    if (f <= 0.0) {
      if (!have_prev || !std::isfinite(prev_f)) {
        sol.leave_step = P;
      } else {
        // Interpolate the zero of f between the bracketing integers.
        const double x = prev_p + prev_f / (prev_f - f) * (P - prev_p);
        sol.leave_step = static_cast<int>(std::lround(x));
      }
      return sol;
    }
    prev_f = f;
    prev_p = P;
    have_prev = true;
  }
  throw SolverError(
      "discounted_mvt_leave_step: indifference curve never crosses the unity line");
}

}  // namespace forage::optimal
