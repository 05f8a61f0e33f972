#include "dwp/distributions.hpp"

#include <cmath>

#include "dwp/linalg.hpp"
#include "dwp/special.hpp"

namespace dwp::dist {

double gamma_logpdf(double x, const GammaParams& p) {
  if (!(p.shape > 0.0) || !(p.rate > 0.0)) throw DomainError("gamma_logpdf: invalid parameters");
  if (!(x > 0.0)) throw DomainError("gamma_logpdf requires x > 0");
  return p.shape * std::log(p.rate) - lgamma(p.shape) + (p.shape - 1.0) * std::log(x) -
         p.rate * x;
}

double gamma_sample(const GammaParams& p, RngStream& rng) {
  if (!(p.shape > 0.0) || !(p.rate > 0.0)) throw DomainError("gamma_sample: invalid parameters");
  return rng.gamma(p.shape) / p.rate;
}

LowerTrapezoid bartlett_sample(int P, int nu, RngStream& rng) {
  if (P < 1 || nu < 1) throw DomainError("bartlett_sample requires P >= 1, nu >= 1");
  const int m = std::min(P, nu);
  Matrix a(P, m);
  for (int j = 0; j < m; ++j) {
    a(j, j) = std::sqrt(rng.gamma(0.5 * (nu - j)));  // alpha = (nu - (j+1) + 1)/2
    for (int i = j + 1; i < P; ++i) a(i, j) = rng.normal();
  }
  // Gamma draws divide by rate 1/2, i.e. multiply by 2: A_jj^2 ~ Gamma(.., 1/2).
  for (int j = 0; j < m; ++j) a(j, j) *= std::sqrt(2.0);
  return LowerTrapezoid(std::move(a), false);
}

double logjac_chol_product(const LowerTrapezoid& lambda) {
  const int P = lambda.rows(), m = lambda.cols();
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double d = lambda(i, i);
    if (!(d > 0.0)) throw DomainError("logjac_chol_product requires positive diagonal");
    s += std::log(2.0) + double(P - i) * std::log(d);  // exponent P+1-(i+1)
  }
  return s;
}

double logjac_left_mult(const Matrix& l, int P, int nu) {
  if (l.rows() != P || l.cols() != P) throw ShapeMismatch("logjac_left_mult: L must be P x P");
  double s = 0.0;
  for (int i = 0; i < P; ++i) {
    const double d = l(i, i);
    if (!(d > 0.0)) throw DomainError("logjac_left_mult requires positive diagonal");
    s += double(std::min(i + 1, nu)) * std::log(d);
  }
  return s;
}

double std_singular_wishart_logpdf(const SymMatrix& z, int nu) {
  const int p = z.dim();
  if (p < 1 || nu < 1) throw DomainError("std_singular_wishart_logpdf: bad dimensions");
  const int nt = std::min(nu, p);

  // log |Z_{:nt,:nt}| through the Cholesky of the leading block.
  Matrix lead(nt, nt);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nt; ++j) lead(i, j) = z(i, j);
  double logdet_lead = 0.0;
  try {
    Matrix lc = cholesky(lead);
    for (int i = 0; i < nt; ++i) logdet_lead += 2.0 * std::log(lc(i, i));
  } catch (const NotPositiveDefinite&) {
    throw SingularLeadingBlock("leading block of Z is singular");
  }

  double tr = 0.0;
  for (int i = 0; i < p; ++i) tr += z(i, i);

  constexpr double kLogPi = 1.1447298858494001741;
  constexpr double kLog2 = 0.69314718055994530942;
  return 0.5 * nu * (nt - p) * kLogPi - 0.5 * nu * p * kLog2 - log_multigamma(nt, 0.5 * nu) +
         0.5 * (nu - p - 1) * logdet_lead - 0.5 * tr;
}

int GenWishartParams::offdiag_count() const {
  const int m = rank();
  int n = 0;
  for (int j = 0; j < m; ++j) n += P() - 1 - j;
  return n;
}

void GenWishartParams::validate() const {
  if (scale_chol.rows() != scale_chol.cols()) throw ShapeMismatch("scale_chol must be square");
  if (nu < 1) throw DomainError("nu must be a positive integer");
  const int m = rank();
  if (int(alpha.size()) != m || int(beta.size()) != m)
    throw ShapeMismatch("alpha/beta must have length min(P, nu)");
  if (int(mu.size()) != offdiag_count() || int(sigma.size()) != offdiag_count())
    throw ShapeMismatch("mu/sigma must cover the strict lower trapezoid");
  for (int j = 0; j < m; ++j)
    if (!(alpha[j] > 0.0) || !(beta[j] > 0.0))
      throw DomainError("alpha/beta must be positive");
  for (double s : sigma)
    if (!(s > 0.0)) throw DomainError("sigma must be positive");
  for (int i = 0; i < P(); ++i)
    if (!(scale_chol(i, i) > 0.0)) throw DomainError("scale_chol needs positive diagonal");
}

GenWishartParams GenWishartParams::defaults(Matrix scale_chol, int nu) {
  GenWishartParams p;
  p.scale_chol = std::move(scale_chol);
  p.nu = nu;
  const int m = p.rank();
  p.alpha.resize(m);
  p.beta.assign(m, 0.5);
  for (int j = 0; j < m; ++j) p.alpha[j] = 0.5 * (nu - j);
  p.mu.assign(p.offdiag_count(), 0.0);
  p.sigma.assign(p.offdiag_count(), 1.0);
  return p;
}

std::pair<SymMatrix, LowerTrapezoid> genwishart_sample(const GenWishartParams& p,
                                                       RngStream& rng) {
  p.validate();
  const int P = p.P(), m = p.rank();
  Matrix a(P, m);
  for (int j = 0; j < m; ++j)
    a(j, j) = std::sqrt(gamma_sample({p.alpha[j], p.beta[j]}, rng));
  int k = 0;
  for (int j = 0; j < m; ++j)
    for (int i = j + 1; i < P; ++i) a(i, j) = p.mu[k] + p.sigma[k] * rng.normal(), ++k;

  Matrix lambda = matmul(p.scale_chol, a);
  SymMatrix g = SymMatrix::from_outer(lambda, 1.0);
  return {std::move(g), LowerTrapezoid(std::move(a), false)};
}

double genwishart_logpdf(const LowerTrapezoid& a, const GenWishartParams& p) {
  p.validate();
  const int P = p.P(), m = p.rank();
  if (a.rows() != P || a.cols() != m) throw ShapeMismatch("genwishart_logpdf: factor shape");

  double lp = 0.0;
  for (int j = 0; j < m; ++j) {
    const double d = a(j, j);
    if (!(d > 0.0)) throw DomainError("genwishart_logpdf requires positive factor diagonal");
    lp += gamma_logpdf(d * d, {p.alpha[j], p.beta[j]}) + std::log(2.0 * d);
  }
  constexpr double kLogTwoPi = 1.8378770664093454836;
  int k = 0;
  for (int j = 0; j < m; ++j)
    for (int i = j + 1; i < P; ++i) {
      const double z = (a(i, j) - p.mu[k]) / p.sigma[k];
      lp += -0.5 * kLogTwoPi - std::log(p.sigma[k]) - 0.5 * z * z;
      ++k;
    }

  Matrix lambda = matmul(p.scale_chol, a.mat());
  lp -= logjac_left_mult(p.scale_chol, P, p.nu);
  lp -= logjac_chol_product(LowerTrapezoid(std::move(lambda), false));
  return lp;
}

Matrix matnorm_cond_sample(const CondGaussBlocks& k, const Matrix& f_i, RngStream& rng) {
  const int pi = k.k_ii.rows(), pt = k.k_it.cols();
  if (k.k_it.rows() != pi || k.k_tt_diag.rows() != pt || k.k_tt_diag.cols() != 1)
    throw ShapeMismatch("matnorm_cond_sample: block shapes");
  if (f_i.rows() != pi) throw ShapeMismatch("matnorm_cond_sample: f_i rows");

  Matrix l = cholesky(k.k_ii);
  Matrix b = tri_solve(l, k.k_it);   // L^-1 K_it
  Matrix w = tri_solve(l, f_i);      // L^-1 F_i
  Matrix mean = matmul_tn(b, w);     // K_ti K_ii^-1 F_i, P_t x nu

  Matrix out(pt, f_i.cols());
  for (int r = 0; r < pt; ++r) {
    double cvar = k.k_tt_diag(r, 0);
    for (int i = 0; i < pi; ++i) cvar -= b(i, r) * b(i, r);
    const double sd = cvar > 0.0 ? std::sqrt(cvar) : 0.0;
    for (int c = 0; c < f_i.cols(); ++c) out(r, c) = mean(r, c) + sd * rng.normal();
  }
  return out;
}

}  // namespace dwp::dist
