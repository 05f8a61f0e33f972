#include "dwp/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "dwp/linalg.hpp"
#include "dwp/special.hpp"

namespace dwp::oracle {

namespace {

// Free coordinates of a lower trapezoid: (i, j) with j <= min(i, cols-1),
// enumerated column-major to match the packing used elsewhere.
std::vector<std::pair<int, int>> trap_coords(int rows, int cols) {
  std::vector<std::pair<int, int>> c;
  for (int j = 0; j < cols; ++j)
    for (int i = j; i < rows; ++i) c.emplace_back(i, j);
  return c;
}

std::vector<double> gather(const Matrix& m, const std::vector<std::pair<int, int>>& coords) {
  std::vector<double> v;
  v.reserve(coords.size());
  for (auto [i, j] : coords) v.push_back(m(i, j));
  return v;
}

}  // namespace

double fd_logjac_chol_product(const LowerTrapezoid& lambda, double h) {
  const auto coords = trap_coords(lambda.rows(), lambda.cols());
  const int n = int(coords.size());
  Matrix jac(n, n);
  Matrix work = lambda.mat();
  for (int k = 0; k < n; ++k) {
    auto [i, j] = coords[k];
    const double orig = work(i, j);
    work(i, j) = orig + h;
    const auto up = gather(matmul_nt(work, work), coords);
    work(i, j) = orig - h;
    const auto dn = gather(matmul_nt(work, work), coords);
    work(i, j) = orig;
    for (int r = 0; r < n; ++r) jac(r, k) = (up[r] - dn[r]) / (2.0 * h);
  }
  return log_abs_det(jac);
}

double fd_logjac_left_mult(const Matrix& l, const LowerTrapezoid& a, double h) {
  const auto coords = trap_coords(a.rows(), a.cols());
  const int n = int(coords.size());
  Matrix jac(n, n);
  Matrix work = a.mat();
  for (int k = 0; k < n; ++k) {
    auto [i, j] = coords[k];
    const double orig = work(i, j);
    work(i, j) = orig + h;
    const auto up = gather(matmul(l, work), coords);
    work(i, j) = orig - h;
    const auto dn = gather(matmul(l, work), coords);
    work(i, j) = orig;
    for (int r = 0; r < n; ++r) jac(r, k) = (up[r] - dn[r]) / (2.0 * h);
  }
  return log_abs_det(jac);
}

double wishart_logpdf_fullrank(const SymMatrix& g, const SymMatrix& sigma, int nu) {
  const int p = g.dim();
  if (sigma.dim() != p) throw ShapeMismatch("wishart_logpdf_fullrank: dimension mismatch");
  if (nu < p) throw DomainError("wishart_logpdf_fullrank requires nu >= p");

  const double logdet_g = log_abs_det(g.mat());
  Matrix ls = cholesky(sigma.mat());
  double logdet_sigma = 0.0;
  for (int i = 0; i < p; ++i) logdet_sigma += 2.0 * std::log(ls(i, i));

  // tr(Sigma^-1 G) = || L^-1 G L^-T ||_trace via two triangular solves.
  Matrix x = tri_solve(ls, g.mat());
  Matrix y = tri_solve(ls, transpose(x));
  double tr = 0.0;
  for (int i = 0; i < p; ++i) tr += y(i, i);

  constexpr double kLog2 = 0.69314718055994530942;
  return 0.5 * (nu - p - 1) * logdet_g - 0.5 * tr - 0.5 * nu * p * kLog2 -
         0.5 * nu * logdet_sigma - log_multigamma(p, 0.5 * nu);
}

double ks_pvalue(std::vector<double> draws, const std::function<double(double)>& cdf) {
  std::sort(draws.begin(), draws.end());
  const double n = double(draws.size());
  double d = 0.0;
  for (size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(draws[i]);
    d = std::max(d, std::fabs(f - double(i) / n));
    d = std::max(d, std::fabs(double(i + 1) / n - f));
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

double integrate(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double dx = (hi - lo) / n;
  double s = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < n; ++i) s += f(lo + i * dx);
  return s * dx;
}

void MomentAccumulator::add(const std::vector<double>& x) {
  for (size_t i = 0; i < sum_.size(); ++i) {
    sum_[i] += x[i];
    sumsq_[i] += x[i] * x[i];
  }
  ++n_;
}

double MomentAccumulator::variance(int i) const {
  const double m = mean(i);
  return std::max(0.0, sumsq_[i] / double(n_) - m * m) * double(n_) / double(n_ - 1);
}

double MomentAccumulator::mean_stderr(int i) const {
  return std::sqrt(variance(i) / double(n_));
}

}  // namespace dwp::oracle
