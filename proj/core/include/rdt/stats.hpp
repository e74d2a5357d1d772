#pragma once

#include <span>
#include <vector>

namespace rdt {

double normal_cdf(double z);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability of a Student t statistic with df degrees of
/// freedom. df may be fractional (Welch).
double student_t_two_sided_p(double t, double df);

double sample_mean(std::span<const double> values);

/// Unbiased sample variance (n-1 denominator); requires n >= 2.
double sample_variance(std::span<const double> values);

}  // namespace rdt
