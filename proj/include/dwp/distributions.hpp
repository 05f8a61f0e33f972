#pragma once

#include <utility>
#include <vector>

#include "dwp/matrix.hpp"
#include "dwp/rng.hpp"

namespace dwp::dist {

struct GammaParams {
  double shape;  // alpha
  double rate;   // beta
};

double gamma_logpdf(double x, const GammaParams& p);

// Reparameterized draw by CDF inversion (rate applied by scaling).
double gamma_sample(const GammaParams& p, RngStream& rng);

// Bartlett factor of a standard (possibly singular) Wishart with identity
// scale: shape P x min(P, nu), squared diagonal Gamma((nu-j+1)/2, 1/2),
// strict lower block standard normal.
LowerTrapezoid bartlett_sample(int P, int nu, RngStream& rng);

// log of the Jacobian |dG / dLambda| for G = Lambda Lambda^T restricted to
// the lower-trapezoid coordinates:
//   sum_{i=1..min(P,nu)} [log 2 + (P+1-i) log Lambda_ii].
double logjac_chol_product(const LowerTrapezoid& lambda);

// log of the Jacobian |dLambda / dA| for Lambda = L A on trapezoid
// coordinates: sum_{i=1..P} min(i, nu) log L_ii.
double logjac_left_mult(const Matrix& l, int P, int nu);

// Closed-form log-density of a standard Wishart W(I, nu) sample of dimension
// p, valid in both the full-rank (nu >= p) and singular (nu < p) regimes:
//   log P(Z) = nu(nu~-p)/2 log pi - nu p/2 log 2 - log Gamma_nu~(nu/2)
//              + (nu-p-1)/2 log |Z_{:nu~,:nu~}| - tr(Z)/2,   nu~ = min(nu,p).
double std_singular_wishart_logpdf(const SymMatrix& z, int nu);

// Parameters of the generalized (possibly singular) Wishart built from the
// Bartlett factor: squared diagonals Gamma(alpha_j, beta_j), strict lower
// entries N(mu_ij, sigma_ij^2), scale Sigma = L L^T, degrees of freedom nu.
// Off-diagonal arrays are packed column-major over the index set
// {(i,j) : j < i <= P, j <= nu}.
struct GenWishartParams {
  Matrix scale_chol;          // P x P lower triangular
  int nu = 0;
  std::vector<double> alpha;  // length min(P, nu)
  std::vector<double> beta;
  std::vector<double> mu;     // length sum_j (P-1-j)
  std::vector<double> sigma;

  int P() const { return scale_chol.rows(); }
  int rank() const { return std::min(P(), nu); }
  int offdiag_count() const;
  void validate() const;

  // Prior parameters: alpha_j = (nu-j+1)/2, beta_j = 1/2, mu = 0, sigma = 1.
  static GenWishartParams defaults(Matrix scale_chol, int nu);
};

// Draws (G, A) with G = L A A^T L^T; the factor is returned because the
// inference path reuses L A as the inducing feature representative.
std::pair<SymMatrix, LowerTrapezoid> genwishart_sample(const GenWishartParams& p, RngStream& rng);

// log Q(G) evaluated through the factor A (the density of G, not of A):
//   sum_j [log Gamma(A_jj^2; a_j, b_j) + log(2 A_jj)]
//   + sum_{i>j} log N(A_ij; mu_ij, sigma_ij)
//   - logjac_left_mult(L) - logjac_chol_product(L A).
double genwishart_logpdf(const LowerTrapezoid& a, const GenWishartParams& p);

// Conditional-prior draw of test-point features given inducing features,
// each test row sampled independently:
//   F_t[r,:] ~ N(Kti_r Kii^-1 Fi, (Ktt - Kti Kii^-1 Kit)_rr I).
struct CondGaussBlocks {
  Matrix k_ii;       // P_i x P_i (positive definite after jitter)
  Matrix k_it;       // P_i x P_t
  Matrix k_tt_diag;  // P_t x 1
};
Matrix matnorm_cond_sample(const CondGaussBlocks& k, const Matrix& f_i, RngStream& rng);

}  // namespace dwp::dist
