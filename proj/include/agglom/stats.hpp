#pragma once

#include <cstddef>
#include <span>

namespace agglom {

// Univariate least-squares fit y = alpha + beta * x with classical
// (homoskedastic) standard errors and a two-sided p-value from Student's t
// with n-2 degrees of freedom. A perfect fit reports se = 0, t = +/-inf,
// p = 0; a constant response reports beta = 0, r2 = 0, p = 1.
struct LinearFit {
  double alpha = 0.0;
  double beta = 0.0;
  double se = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

LinearFit ols_fit(std::span<const double> xs, std::span<const double> ys);

// Weighted variant: minimizes sum w_i (y_i - alpha - beta x_i)^2 with
// sigma^2 estimated as sum w e^2 / (n - 2). ols_fit is the unit-weight case.
LinearFit wls_fit(std::span<const double> xs, std::span<const double> ys,
                  std::span<const double> ws);

// I_x(a, b) by Lentz continued fraction; |error| < ~1e-14
double regularized_incomplete_beta(double a, double b, double x);

double student_t_two_sided_p(double t, double df);

}  // namespace agglom
