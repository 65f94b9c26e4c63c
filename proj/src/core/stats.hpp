#pragma once
// Self-contained statistical kernel: OLS, t-tests, one-way ANOVA, Pearson
// correlation, PCA, and the t/F tail probabilities they need.  Tail
// probabilities go through the regularized incomplete beta function so the
// kernel has no external dependencies.

#include <cstddef>
#include <span>
#include <vector>

namespace forage::stats {

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, int df);

// Upper tail P(F > f) for an F distribution with (d1, d2) degrees of freedom.
double f_upper_tail_p(double f, int d1, int d2);

// alpha / k. Throws std::domain_error for k <= 0 or alpha outside (0, 1].
double bonferroni(double alpha, int k);

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double t = 0.0;
  double p = 1.0;  // two-sided, slope == 0 null
  int n = 0;
};

// OLS y = a + b x. Requires >= 3 points and non-constant x.
// Zero residual variance reports slope_se = 0 and p = 0.
RegressionResult linear_regression(std::span<const double> x,
                                   std::span<const double> y);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  int df = 0;
  double mean = 0.0;  // sample mean (one-sample) or mean difference
};

// One-sample two-sided t-test against mu0. Requires n >= 2.
TTestResult one_sample_ttest(std::span<const double> v, double mu0);

// Pooled-variance two-sample two-sided t-test. Requires na, nb >= 2.
TTestResult two_sample_ttest(std::span<const double> a,
                             std::span<const double> b);

struct PearsonResult {
  double r = 0.0;
  double t = 0.0;
  double p = 1.0;
  int n = 0;
};

// Pearson correlation with the t-transform p-value. Requires >= 3 points
// and non-constant inputs.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  int df_between = 0;
  int df_within = 0;
  std::vector<double> group_means;
};

// One-way ANOVA. Requires >= 2 groups and a positive within df.
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

struct PcaResult {
  std::vector<std::vector<double>> components;  // components[k] = unit loading vector
  std::vector<double> eigenvalues;              // descending
  std::vector<double> explained_ratio;          // eigenvalue / trace
  std::vector<double> mean;                     // column means
};

// PCA of an n x d row matrix via eigendecomposition of the mean-centered
// covariance. Components are orthonormal, ordered by descending eigenvalue,
// and sign-fixed so each component's largest-magnitude loading is positive.
PcaResult pca(const std::vector<std::vector<double>>& rows);

// Projection of rows onto the first result.components.size() components.
std::vector<std::vector<double>> pca_project(
    const PcaResult& result, const std::vector<std::vector<double>>& rows);

}  // namespace forage::stats
