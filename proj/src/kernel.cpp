#include "dwp/kernel.hpp"

#include <cmath>

namespace dwp::kern {

void KernelConfig::validate() const {
  if (!(variance > 0.0) || !(lengthscale > 0.0))
    throw DomainError("kernel variance and lengthscale must be positive");
  for (double l : ard)
    if (!(l > 0.0)) throw DomainError("ARD lengthscales must be positive");
}

SymMatrix gram_to_sqdist(const SymMatrix& g) {
  const int n = g.dim();
  Matrix r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = g(i, i) - 2.0 * g(i, j) + g(j, j);
      r(i, j) = v > 0.0 ? v : 0.0;
    }
  return SymMatrix(std::move(r), false);
}

namespace {

SymMatrix sqexp_of_sqdist(const SymMatrix& r, double variance, double lengthscale) {
  const int n = r.dim();
  const double coef = -0.5 / (lengthscale * lengthscale);
  Matrix k(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) k(i, j) = variance * std::exp(coef * r(i, j));
  const double jitter = kJitterScale * variance;  // diag of the raw kernel is s^2
  for (int i = 0; i < n; ++i) k(i, i) += jitter;
  return SymMatrix(std::move(k), false);
}

}  // namespace

SymMatrix sqexp_from_gram(const SymMatrix& g, const KernelConfig& cfg) {
  cfg.validate();
  return sqexp_of_sqdist(gram_to_sqdist(g), cfg.variance, cfg.lengthscale);
}

SymMatrix sqexp_ard_from_inputs(const Matrix& x, const KernelConfig& cfg) {
  cfg.validate();
  if (int(cfg.ard.size()) != x.cols())
    throw ShapeMismatch("ARD lengthscale count must match input dimension");
  const int n = x.rows(), d = x.cols();
  Matrix k(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int dd = 0; dd < d; ++dd) {
        const double diff = (x(i, dd) - x(j, dd)) / cfg.ard[dd];
        s += diff * diff;
      }
      const double v = cfg.variance * std::exp(-0.5 * s);
      k(i, j) = k(j, i) = v;
    }
  const double jitter = kJitterScale * cfg.variance;
  for (int i = 0; i < n; ++i) k(i, i) += jitter;
  return SymMatrix(std::move(k), false);
}

SymMatrix sqexp_from_features(const Matrix& f, const KernelConfig& cfg) {
  cfg.validate();
  const int n = f.rows(), w = f.cols();
  Matrix k(n, n);
  const double coef = -0.5 / (cfg.lengthscale * cfg.lengthscale) / double(w);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int c = 0; c < w; ++c) {
        const double diff = f(i, c) - f(j, c);
        s += diff * diff;
      }
      const double v = cfg.variance * std::exp(coef * s);
      k(i, j) = k(j, i) = v;
    }
  const double jitter = kJitterScale * cfg.variance;
  for (int i = 0; i < n; ++i) k(i, i) += jitter;
  return SymMatrix(std::move(k), false);
}

}  // namespace dwp::kern
