#include "agglom/stats.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "agglom/error.hpp"
#include "agglom/kernels.hpp"

namespace agglom {

namespace {

// continued fraction for the incomplete beta (Lentz)
double beta_cf(double a, double b, double x) {
  constexpr int max_iter = 300;
  constexpr double eps = 1e-15;
  constexpr double fpmin = 1e-300;

  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (df <= 0.0) fail_numeric("student t: degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) fail_numeric("student t: NaN statistic");
  double x = df / (df + t * t);
  return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

LinearFit ols_fit(std::span<const double> xs, std::span<const double> ys) {
  std::vector<double> ones(xs.size(), 1.0);
  return wls_fit(xs, ys, ones);
}

LinearFit wls_fit(std::span<const double> xs, std::span<const double> ys,
                  std::span<const double> ws) {
  const std::size_t n = xs.size();
  if (ys.size() != n || ws.size() != n) fail_input("fit: input length mismatch");
  if (n < 3) fail_degenerate("fit needs at least 3 observations (got " + std::to_string(n) + ")");

  const double wsum = kernels::vsum(ws.data(), n);
  if (!(wsum > 0.0)) fail_degenerate("fit: weights sum to zero");
  const double xbar = kernels::vdot(ws.data(), xs.data(), n) / wsum;
  const double ybar = kernels::vdot(ws.data(), ys.data(), n) / wsum;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - xbar;
    const double dy = ys[i] - ybar;
    sxx += ws[i] * dx * dx;
    sxy += ws[i] * dx * dy;
    syy += ws[i] * dy * dy;
  }
  if (sxx <= 0.0) fail_degenerate("fit: zero-variance regressor");

  LinearFit fit;
  fit.n = n;
  fit.beta = sxy / sxx;
  fit.alpha = ybar - fit.beta * xbar;

  double ssr = syy - fit.beta * sxy;  // weighted residual sum of squares
  if (ssr < 0.0) ssr = 0.0;           // roundoff on (near-)perfect fits
  const double df = static_cast<double>(n - 2);
  const double sigma2 = ssr / df;
  fit.se = std::sqrt(sigma2 / sxx);
  fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : 0.0;
  if (fit.r2 < 0.0) fit.r2 = 0.0;
  if (fit.r2 > 1.0) fit.r2 = 1.0;

  if (fit.se > 0.0) {
    fit.t_stat = fit.beta / fit.se;
    fit.p_value = student_t_two_sided_p(fit.t_stat, df);
  } else if (fit.beta != 0.0) {
    fit.t_stat = fit.beta > 0.0 ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
    fit.p_value = 0.0;
  } else {
    fit.t_stat = 0.0;
    fit.p_value = 1.0;
  }
  return fit;
}

}  // namespace agglom
