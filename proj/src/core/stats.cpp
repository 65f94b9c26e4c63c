#include "core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace forage::stats {

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v, double mu) {
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw std::domain_error("incomplete_beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int df) {
  if (df < 1) throw std::domain_error("student_t_two_sided_p: df must be >= 1");
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(df / 2.0, 0.5, x);
}

double f_upper_tail_p(double f, int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw std::domain_error("f_upper_tail_p: df must be >= 1");
  if (f <= 0.0) return 1.0;
  if (!std::isfinite(f)) return 0.0;
  const double x = d2 / (d2 + d1 * f);
  return incomplete_beta(d2 / 2.0, d1 / 2.0, x);
}

double bonferroni(double alpha, int k) {
  if (k <= 0) throw std::domain_error("bonferroni: k must be positive");
  if (!(alpha > 0.0) || alpha > 1.0) throw std::domain_error("bonferroni: alpha must be in (0, 1]");
  return alpha / k;
}

RegressionResult linear_regression(std::span<const double> x,
                                   std::span<const double> y) {
  if (x.size() != y.size()) throw std::domain_error("linear_regression: size mismatch");
  const int n = static_cast<int>(x.size());
  if (n < 3) throw std::domain_error("linear_regression: need at least 3 points");

  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::domain_error("linear_regression: x is constant");

  RegressionResult r;
  r.n = n;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = y[i] - (r.intercept + r.slope * x[i]);
    sse += e * e;
  }
  const double sigma2 = sse / (n - 2);
  r.slope_se = std::sqrt(sigma2 / sxx);
  if (r.slope_se == 0.0) {
    // Perfect fit: report an exact slope with p = 0 (convention for zero
    // residual variance).
    r.t = r.slope == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = r.slope / r.slope_se;
  r.p = student_t_two_sided_p(r.t, n - 2);
  return r;
}

TTestResult one_sample_ttest(std::span<const double> v, double mu0) {
  const int n = static_cast<int>(v.size());
  if (n < 2) throw std::domain_error("one_sample_ttest: need at least 2 values");
  TTestResult res;
  res.df = n - 1;
  res.mean = mean_of(v);
  const double sd = std::sqrt(sample_var(v, res.mean));
  const double se = sd / std::sqrt(static_cast<double>(n));
  if (se == 0.0) {
    res.t = res.mean == mu0 ? 0.0 : std::numeric_limits<double>::infinity();
    res.p = res.mean == mu0 ? 1.0 : 0.0;
    return res;
  }
  res.t = (res.mean - mu0) / se;
  res.p = student_t_two_sided_p(res.t, res.df);
  return res;
}

TTestResult two_sample_ttest(std::span<const double> a,
                             std::span<const double> b) {
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  if (na < 2 || nb < 2) throw std::domain_error("two_sample_ttest: need at least 2 per group");
  TTestResult res;
  res.df = na + nb - 2;
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  res.mean = ma - mb;
  const double pooled =
      ((na - 1) * sample_var(a, ma) + (nb - 1) * sample_var(b, mb)) / res.df;
  const double se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  if (se == 0.0) {
    res.t = res.mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    res.p = res.mean == 0.0 ? 1.0 : 0.0;
    return res;
  }
  res.t = res.mean / se;
  res.p = student_t_two_sided_p(res.t, res.df);
  return res;
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::domain_error("pearson: size mismatch");
  const int n = static_cast<int>(x.size());
  if (n < 3) throw std::domain_error("pearson: need at least 3 points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::domain_error("pearson: constant input");
  PearsonResult res;
  res.n = n;
  res.r = sxy / std::sqrt(sxx * syy);
  const double r2 = std::min(res.r * res.r, 1.0);
  if (r2 >= 1.0) {
    res.t = std::numeric_limits<double>::infinity();
    res.p = 0.0;
    return res;
  }
  res.t = res.r * std::sqrt((n - 2) / (1.0 - r2));
  res.p = student_t_two_sided_p(res.t, n - 2);
  return res;
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  const int k = static_cast<int>(groups.size());
  if (k < 2) throw std::domain_error("one_way_anova: need at least 2 groups");
  int n_total = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) throw std::domain_error("one_way_anova: empty group");
    n_total += static_cast<int>(g.size());
    for (double v : g) grand += v;
  }
  if (n_total - k < 1) throw std::domain_error("one_way_anova: within df must be positive");
  grand /= n_total;

  AnovaResult res;
  res.df_between = k - 1;
  res.df_within = n_total - k;
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    double m = 0.0;
    for (double v : g) m += v;
    m /= static_cast<double>(g.size());
    res.group_means.push_back(m);
    ssb += g.size() * (m - grand) * (m - grand);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  if (ssw == 0.0) {
    res.f = ssb == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    res.p = ssb == 0.0 ? 1.0 : 0.0;
    return res;
  }
  res.f = (ssb / res.df_between) / (ssw / res.df_within);
  res.p = f_upper_tail_p(res.f, res.df_between, res.df_within);
  return res;
}

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. a is overwritten;
// v receives the column eigenvectors.
void jacobi_eigen(std::vector<std::vector<double>>& a,
                  std::vector<std::vector<double>>& v,
                  std::vector<double>& eig) {
  const int n = static_cast<int>(a.size());
  v.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-300) break;
    double diag = 0.0;
    for (int p = 0; p < n; ++p) diag += a[p][p] * a[p][p];
    if (off <= 1e-30 * std::max(diag, 1e-300)) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < n; ++i) {
          const double aip = a[i][p];
          const double aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = a[p][i];
          const double aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v[i][p];
          const double viq = v[i][q];
          v[i][p] = c * vip - s * viq;
          v[i][q] = s * vip + c * viq;
        }
      }
    }
  }
  eig.resize(n);
  for (int i = 0; i < n; ++i) eig[i] = a[i][i];
}

}  // namespace

PcaResult pca(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) throw std::domain_error("pca: need at least 2 rows");
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows[0].size());
  if (d < 1) throw std::domain_error("pca: empty rows");
  for (const auto& r : rows)
    if (static_cast<int>(r.size()) != d) throw std::domain_error("pca: ragged rows");

  PcaResult res;
  res.mean.assign(d, 0.0);
  for (const auto& r : rows)
    for (int j = 0; j < d; ++j) res.mean[j] += r[j];
  for (int j = 0; j < d; ++j) res.mean[j] /= n;

  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& r : rows) {
    for (int i = 0; i < d; ++i) {
      const double ci = r[i] - res.mean[i];
      for (int j = i; j < d; ++j) cov[i][j] += ci * (r[j] - res.mean[j]);
    }
  }
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      cov[i][j] /= (n - 1);
      cov[j][i] = cov[i][j];
    }

  std::vector<std::vector<double>> vecs;
  std::vector<double> eig;
  jacobi_eigen(cov, vecs, eig);

  std::vector<int> order(d);
  for (int i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return eig[a] > eig[b]; });

  double trace = 0.0;
  for (double e : eig) trace += std::max(e, 0.0);
  for (int k = 0; k < d; ++k) {
    const int idx = order[k];
    std::vector<double> comp(d);
    for (int i = 0; i < d; ++i) comp[i] = vecs[i][idx];
    // Sign convention: largest-magnitude loading is positive.
    int arg = 0;
    for (int i = 1; i < d; ++i)
      if (std::fabs(comp[i]) > std::fabs(comp[arg])) arg = i;
    if (comp[arg] < 0.0)
      for (double& c : comp) c = -c;
    res.components.push_back(std::move(comp));
    const double lam = std::max(eig[idx], 0.0);
    res.eigenvalues.push_back(lam);
    res.explained_ratio.push_back(trace > 0.0 ? lam / trace : 0.0);
  }
  return res;
}

std::vector<std::vector<double>> pca_project(
    const PcaResult& result, const std::vector<std::vector<double>>& rows) {
  const int d = static_cast<int>(result.mean.size());
  const int k = static_cast<int>(result.components.size());
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != d) throw std::domain_error("pca_project: row size mismatch");
    std::vector<double> s(k, 0.0);
    for (int c = 0; c < k; ++c)
      for (int j = 0; j < d; ++j) s[c] += (r[j] - result.mean[j]) * result.components[c][j];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace forage::stats
