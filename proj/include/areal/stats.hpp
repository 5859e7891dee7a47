#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace areal {

double mean_of(std::span<const double> v);

// Population standard deviation (denominator n). This convention is used
// everywhere a scaler is fit, so a standardized column has population
// standard deviation exactly 1.
double pop_std(std::span<const double> v);

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction.
double reg_incomplete_beta(double a, double b, double x);

// CDF of Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

// Two-sided p-value for a t statistic: P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

// Average ranks (1-based); ties receive the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> v);

}  // namespace areal
