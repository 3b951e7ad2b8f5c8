// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <span>

namespace assemblage {

// Digamma function for x > 0. Shifts x above 6 with the recurrence
// psi(x) = psi(x+1) - 1/x, then applies the asymptotic series.
// Throws ConfigError for x <= 0.
double digamma(double x);

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees of
// freedom.
double student_t_two_sided(double t, double df);

// log(sum(exp(values))) without overflow; -inf for an empty span.
double log_sum_exp(std::span<const double> values);

}  // namespace assemblage
