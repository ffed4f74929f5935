#pragma once

namespace volterra {

// Gamma function on the real line. Poles at 0, -1, -2, ... throw std::domain_error.
double gamma_fn(double x);

// Rising factorial (a)_k = a (a+1) ... (a+k-1); (a)_0 = 1. k >= 0.
// Exact zeros are preserved: if some a+j with 0 <= j < k vanishes, the result is 0.
double pochhammer(double a, int k);

// Gauss hypergeometric function 2F1(alpha, beta; gamma; z) on the real ray z < 1.
// gamma must not be a non-positive integer unless the series terminates first.
// Symmetric in (alpha, beta) to the last bit. Throws NumericError when a series
// fails to converge within the term cap.
double hyp2f1(double alpha, double beta, double gamma, double z);

namespace detail {

// x within 1e-13 (relative) of an integer <= 0.
bool is_nonpositive_integer(double x);

// Direct power series at |z| < 1. Exposed for cross-route validation.
double hyp2f1_series(double alpha, double beta, double gamma, double z);

// Pfaff transformation (1-z)^(-alpha) 2F1(alpha, gamma-beta; gamma; z/(z-1)),
// which maps z < 0 into the convergent range (0, 1). Exposed for cross-route
// validation on overlapping arguments.
double hyp2f1_pfaff(double alpha, double beta, double gamma, double z);

}  // namespace detail

}  // namespace volterra
