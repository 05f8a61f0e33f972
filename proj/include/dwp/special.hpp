#pragma once

namespace dwp {

// log Gamma(x) for x > 0 (Lanczos approximation). Throws DomainError on x <= 0.
double lgamma(double x);

// d/dx log Gamma(x) for x > 0.
double digamma(double x);

// log of the multivariate gamma function Gamma_p(a),
// log Gamma_p(a) = p(p-1)/4 * log pi + sum_{j=1..p} lgamma(a - (j-1)/2).
// Requires a > (p-1)/2.
double log_multigamma(int p, double a);

// Regularized lower incomplete gamma P(a, x), monotone in x, P(a,0)=0.
double reg_inc_gamma(double a, double x);

// Inverse of reg_inc_gamma in x: returns z with P(a, z) = u, u in (0,1).
double gamma_icdf(double a, double u);

// Standard normal quantile and CDF.
double norm_quantile(double u);
double norm_cdf(double x);

// Numerically safe softplus log(1+e^x), its inverse, and the logistic.
double softplus(double x);
double softplus_inv(double y);
double sigmoid(double x);

}  // namespace dwp
