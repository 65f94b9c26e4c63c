#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "core/optimal.hpp"

using namespace forage::optimal;

TEST_CASE("patch reward is geometric with the default decay") {
  CHECK(patch_reward(0) == doctest::Approx(1.0 / 30.0).epsilon(1e-15));
  const double ratio = std::exp(-0.01);
  for (const int n : {0, 1, 10, 100, 500}) {
    CHECK(patch_reward(n + 1) / patch_reward(n) ==
          doctest::Approx(ratio).epsilon(1e-14));
  }
  CHECK(patch_reward(100) ==
        doctest::Approx(0.012262648039048077).epsilon(1e-14));
  CHECK_THROWS_AS(patch_reward(-1), std::domain_error);
  CHECK_THROWS_AS(patch_reward(1, 0.0), std::domain_error);
}

TEST_CASE("cumulative reward equals the running sum of per-visit rewards") {
  double run = 0.0;
  for (int T = 1; T <= 200; ++T) {
    run += patch_reward(T - 1);
    CHECK(cumulative_patch_reward(T) == doctest::Approx(run).epsilon(1e-12));
  }
  CHECK(cumulative_patch_reward(100) ==
        doctest::Approx(2.117621).epsilon(1e-6));
  CHECK(cumulative_patch_reward(0) == 0.0);
  // depleted-free world degenerates to a linear harvest
  CHECK(cumulative_patch_reward(7, 0.5, 0.0) == doctest::Approx(3.5));
}

TEST_CASE("rate-maximizing leave step at the reference travel time") {
  const auto sol = mvt_leave_step(58);
  CHECK(sol.leave_step == 91);
  CHECK(sol.rate == doctest::Approx(0.013433291583953032).epsilon(1e-13));
  CHECK(sol.rate_curve.size() == 3600);
  CHECK(sol.rate_curve[90] == sol.rate);
  for (const double r : sol.rate_curve) CHECK(r <= sol.rate);
  // marginal-value bracketing: r(T*) <= rho* <= r(T* - 1)
  CHECK(patch_reward(91) <= sol.rate);
  CHECK(patch_reward(90) >= sol.rate);
  // the depletion curve crosses rho* exactly at T*
  CHECK(empirical_mvt_leave_step(sol.rate) == sol.leave_step);
}

TEST_CASE("zero travel time collapses the optimum to a single visit") {
  const auto sol = mvt_leave_step(0);
  CHECK(sol.leave_step == 1);
  CHECK(sol.rate == doctest::Approx(1.0 / 30.0).epsilon(1e-15));
}

TEST_CASE("leave step matches an independent exhaustive scan") {
  for (int tau = 0; tau <= 120; tau += 10) {
    double sum = 0.0, best = -1.0;
    int best_t = 0;
    for (int T = 1; T <= 3600; ++T) {
      sum += patch_reward(T - 1);
      const double rate = sum / (T + tau);
      if (rate > best) {
        best = rate;
        best_t = T;
      }
    }
    const auto sol = mvt_leave_step(tau);
    CHECK(sol.leave_step == best_t);
    CHECK(sol.rate == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("longer travel never shortens the optimal stay") {
  int prev = 0;
  for (int tau = 0; tau <= 120; tau += 10) {
    const int t = mvt_leave_step(tau).leave_step;
    CHECK(t >= prev);
    prev = t;
  }
}

TEST_CASE("empirical crossing of a rate threshold") {
  const double n0 = 1.0 / 30.0;
  // r(100) == n0 e^-1 exactly, so the first strict undershoot is 101
  CHECK(empirical_mvt_leave_step(n0 * std::exp(-1.0)) == 101);
  CHECK(empirical_mvt_leave_step(n0) == 1);
  CHECK_THROWS_AS(empirical_mvt_leave_step(n0 * 1.01), std::domain_error);
  CHECK_THROWS_AS(empirical_mvt_leave_step(0.0), std::domain_error);
  CHECK_THROWS_AS(empirical_mvt_leave_step(0.01, 1.0, 0.0), std::domain_error);
}

namespace {

// Literal reward stream: optional stay step paying r(m), then tau travel
// zeros alternating with P fresh-patch steps paying r(0..P-1).
double stream_oracle(int m, int P, int tau, double gamma, int horizon,
                     bool leave_now) {
  std::vector<double> stream;
  stream.reserve(horizon);
  if (!leave_now) stream.push_back(patch_reward(m));
  while (static_cast<int>(stream.size()) < horizon) {
    for (int k = 0; k < tau && static_cast<int>(stream.size()) < horizon; ++k)
      stream.push_back(0.0);
    for (int p = 0; p < P && static_cast<int>(stream.size()) < horizon; ++p)
      stream.push_back(patch_reward(p));
  }
  double total = 0.0, g = 1.0;
  for (int t = 0; t < horizon; ++t, g *= gamma) total += g * stream[t];
  return total;
}

}  // namespace

TEST_CASE("discounted return matches a literal stream for random shapes") {
  std::mt19937_64 rng(20240917);
  std::uniform_int_distribution<int> md(0, 120), pd(1, 200), taud(0, 80),
      hd(500, 3000), gd(0, 3);
  const double gammas[] = {0.9, 0.99, 0.999, 1.0};
  for (int i = 0; i < 100; ++i) {
    const int m = md(rng), P = pd(rng), tau = taud(rng), h = hd(rng);
    const double gamma = gammas[gd(rng)];
    const bool leave = (i % 2) == 0;
    const double got =
        discounted_return_alternating(m, P, tau, gamma, h, 1.0 / 30.0, 0.01, leave);
    const double want = stream_oracle(m, P, tau, gamma, h, leave);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("undiscounted leave stream over whole cycles sums the harvests") {
  const int P = 40, tau = 17;
  // k complete (travel, patch) cycles harvest exactly k G(P)
  for (const int k : {1, 3, 7}) {
    const int h = k * (P + tau);
    const double got =
        discounted_return_alternating(0, P, tau, 1.0, h, 1.0 / 30.0, 0.01, true);
    CHECK(got ==
          doctest::Approx(k * cumulative_patch_reward(P)).epsilon(1e-10));
  }
}

TEST_CASE("undiscounted indifference pins the marginal-value crossing") {
  // At P = T*(58) = 91 the cycle-average rate is rho*, and the first visit
  // paying below rho* is visit 91: the curve touches the unity line.
  CHECK(indifference_step(91, 58, 1.0).value() == 91);
  CHECK(indifference_step(90, 58, 1.0).value() == 91);
  // With no travel cost a single-visit cycle already pays n0: leave at once.
  CHECK(indifference_step(1, 0, 1.0).value() == 0);
  // Constant rewards never sink below the cycle average.
  CHECK_FALSE(indifference_step(10, 5, 1.0, 5000, 0.5, 0.0).has_value());
}

TEST_CASE("discounting below one lengthens the optimal stay") {
  // Discounting penalizes the travel delay before future harvests, so the
  // fixed point can only sit at or above the undiscounted optimum and grows
  // as gamma drops.
  const int expected[] = {91, 94, 96, 104, 119};
  const double gammas[] = {1.0, 0.999, 0.998, 0.995, 0.99};
  const int tstar = mvt_leave_step(58).leave_step;
  int prev = 0;
  for (int i = 0; i < 5; ++i) {
    const auto sol = discounted_mvt_leave_step(58, gammas[i]);
    CHECK(sol.leave_step == expected[i]);
    CHECK(sol.leave_step >= tstar);
    CHECK(sol.leave_step >= prev);
    prev = sol.leave_step;
    // doubling the horizon must not move the fixed point
    const auto sol2 = discounted_mvt_leave_step(58, gammas[i], 10000);
    CHECK(sol2.leave_step == sol.leave_step);
  }
}

TEST_CASE("undiscounted fixed point equals the rate-maximizing leave step") {
  for (const int tau : {0, 15, 58, 90, 120}) {
    CHECK(discounted_mvt_leave_step(tau, 1.0).leave_step ==
          mvt_leave_step(tau).leave_step);
  }
}

TEST_CASE("myopic discounting never meets the unity line") {
  // With gamma this small the future is worthless, staying always wins, and
  // the sweep exhausts p_max without a crossing.
  CHECK_THROWS_AS(
      discounted_mvt_leave_step(58, 0.0001, 2000, 1.0 / 30.0, 0.01, 50),
      SolverError);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(mvt_leave_step(-1), std::domain_error);
  CHECK_THROWS_AS(average_rate(0, 10), std::domain_error);
  CHECK_THROWS_AS(discounted_return_alternating(0, 0, 10, 1.0),
                  std::domain_error);
  CHECK_THROWS_AS(discounted_return_alternating(0, 10, 10, 1.5),
                  std::domain_error);
  CHECK_THROWS_AS(indifference_step(10, 5, 0.0), std::domain_error);
}
