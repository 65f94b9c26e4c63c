#pragma once
// Patch-leaving solvers: the undiscounted marginal-value rule (leave when the
// instantaneous patch rate drops to the long-run average rate) and its
// discounted finite-horizon counterpart, which decides between "stay one more
// step" and "leave now" on explicitly simulated reward streams.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace forage::optimal {

// No solution in the searched range (e.g. the indifference curve never
// crosses the unity line in a strongly myopic regime).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultN0 = 1.0 / 30.0;
inline constexpr double kDefaultLambda = 0.01;

// Reward paid by the n-th consumption step of a patch: n0 * exp(-lambda n).
double patch_reward(int n, double n0 = kDefaultN0, double lambda = kDefaultLambda);

// Sum of the first T patch rewards (closed form; lambda = 0 degenerates to T n0).
double cumulative_patch_reward(int T, double n0 = kDefaultN0,
                               double lambda = kDefaultLambda);

// Long-run reward per step of a stay-T policy with travel cost tau.
double average_rate(int T, int tau, double n0 = kDefaultN0,
                    double lambda = kDefaultLambda);

struct MvtSolution {
  int leave_step = 0;       // T*: in-patch steps that maximize the average rate
  double rate = 0.0;        // rho* = average rate at T*
  std::vector<double> rate_curve;  // rate_curve[T-1] = average_rate(T, tau)
};

// Exhaustive scan of T in [1, t_max]; ties resolve to the smallest T.
MvtSolution mvt_leave_step(int tau, int t_max = 3600, double n0 = kDefaultN0,
                           double lambda = kDefaultLambda);

// Smallest n with patch_reward(n) < rho. Throws std::domain_error when rho
// is not in (0, n0] (no crossing or degenerate threshold).
int empirical_mvt_leave_step(double rho, double n0 = kDefaultN0,
                             double lambda = kDefaultLambda);

// Discounted return of the alternating stream this world produces.
//
// leave_now = true:  tau travel zeros, then repeating cycles of P patch steps
//                    paying patch_reward(0..P-1) followed by tau zeros.
// leave_now = false: one step paying patch_reward(m), then the leave_now
//                    stream for the remaining horizon - 1 steps.
//
// Summed term by term over exactly `horizon` steps.
double discounted_return_alternating(int m, int P, int tau, double gamma,
                                     int horizon = 5000,
                                     double n0 = kDefaultN0,
                                     double lambda = kDefaultLambda,
                                     bool leave_now = false);

// Smallest m >= 0 at which staying one more step stops beating leaving now,
// i.e. V_stay(m) - V_leave <= 0; nullopt when the payoff never crosses.
//
// The stay/leave comparison reduces to patch_reward(m) <= c with a cost c
// that is independent of m. For gamma < 1, c comes from the literal
// discounted leave stream, truncated to the complete patch/travel cycles
// that fit the horizon (a partial tail cycle injects horizon-phase noise
// into the comparison). For gamma = 1 the infinite-horizon comparison is
// the cycle-average rate G(P) / (P + tau).
std::optional<int> indifference_step(int P, int tau, double gamma,
                                     int horizon = 5000,
                                     double n0 = kDefaultN0,
                                     double lambda = kDefaultLambda);

struct DiscountedMvtSolution {
  int leave_step = 0;  // P*: fixed point of the indifference curve
  double gamma = 1.0;
  int tau = 0;
  int horizon = 5000;
  // (P, m*(P)) samples of the indifference curve up to the fixed point.
  std::vector<std::pair<int, int>> indifference_curve;
};

// Sweep P upward until the indifference step m*(P) crosses the unity line
// m = P; the fixed point is the linear interpolation of the sign change,
// rounded to the nearest integer. Throws std::runtime_error if no crossing
// occurs by p_max.
DiscountedMvtSolution discounted_mvt_leave_step(int tau, double gamma,
                                                int horizon = 5000,
                                                double n0 = kDefaultN0,
                                                double lambda = kDefaultLambda,
                                                int p_max = 3600);

}  // namespace forage::optimal
