#pragma once

#include <functional>
#include <vector>

#include "dwp/matrix.hpp"

namespace dwp::oracle {

// log |det J| of the map Lambda -> lower-trapezoid(Lambda Lambda^T),
// assembled column by column from central differences. Independent route
// against the closed-form Jacobian of the Bartlett transformation.
double fd_logjac_chol_product(const LowerTrapezoid& lambda, double h = 1e-6);

// log |det J| of A -> L A restricted to the trapezoid coordinates.
double fd_logjac_left_mult(const Matrix& l, const LowerTrapezoid& a, double h = 1e-6);

// Textbook full-rank Wishart log-density W(G; Sigma, nu), nu >= p, evaluated
// directly from G and Sigma without the Bartlett factorization.
double wishart_logpdf_fullrank(const SymMatrix& g, const SymMatrix& sigma, int nu);

// Two-sided Kolmogorov-Smirnov test against a given CDF. Returns the
// asymptotic p-value.
double ks_pvalue(std::vector<double> draws, const std::function<double(double)>& cdf);

// Trapezoid quadrature of f over [lo, hi] with n uniform panels.
double integrate(const std::function<double(double)>& f, double lo, double hi, int n);

// Streaming first/second moments with standard errors.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(int dim) : n_(0), sum_(dim, 0.0), sumsq_(dim, 0.0) {}
  void add(const std::vector<double>& x);
  long count() const { return n_; }
  double mean(int i) const { return sum_[i] / double(n_); }
  double variance(int i) const;
  double mean_stderr(int i) const;
  int dim() const { return int(sum_.size()); }

 private:
  long n_;
  std::vector<double> sum_, sumsq_;
};

}  // namespace dwp::oracle
