#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "dwp/distributions.hpp"
#include "dwp/linalg.hpp"
#include "dwp/oracles.hpp"
#include "dwp/rng.hpp"
#include "dwp/special.hpp"

using namespace dwp;
using namespace dwp::dist;

namespace {

Matrix random_lower(int n, RngStream& rng) {
  Matrix l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) l(i, j) = 0.3 * rng.normal();
    l(i, i) = 0.8 + 0.8 * rng.uniform();
  }
  return l;
}

LowerTrapezoid random_trapezoid(int P, int nu, RngStream& rng) {
  const int m = std::min(P, nu);
  Matrix a(P, m);
  for (int j = 0; j < m; ++j) {
    a(j, j) = 0.5 + rng.uniform();
    for (int i = j + 1; i < P; ++i) a(i, j) = rng.normal();
  }
  return LowerTrapezoid(std::move(a), false);
}

}  // namespace

TEST_CASE("gamma_logpdf closed forms") {
  CHECK(gamma_logpdf(1.0, {1.0, 1.0}) == doctest::Approx(-1.0).epsilon(1e-13));
  const double expect = -0.5 * std::log(2.0) - 0.5 * std::log(M_PI) - 0.5;
  CHECK(gamma_logpdf(1.0, {0.5, 0.5}) == doctest::Approx(expect).epsilon(1e-12));
  CHECK_THROWS_AS(gamma_logpdf(-1.0, {1.0, 1.0}), DomainError);
}

TEST_CASE("gamma pdf integrates to one") {
  const double z = oracle::integrate(
      [](double x) { return std::exp(gamma_logpdf(x, {3.0, 2.0})); }, 1e-4, 50.0, 200000);
  CHECK(z == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("gamma sampler moments and KS") {
  RngStream rng(100);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) {
    const double z = gamma_sample({4.0, 2.0}, rng);
    draws[i] = z;
    s += z;
    s2 += z * z;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  CHECK(mean == doctest::Approx(2.0).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));

  const double p = oracle::ks_pvalue(
      std::move(draws), [](double x) { return boost::math::gamma_p(4.0, 2.0 * x); });
  CHECK(p > 0.01);
}

TEST_CASE("bartlett shape contract and moments") {
  RngStream rng(7);
  LowerTrapezoid a = bartlett_sample(3, 2, rng);
  CHECK(a.rows() == 3);
  CHECK(a.cols() == 2);
  CHECK(a(0, 1) == 0.0);
  CHECK(a(0, 0) > 0.0);
  CHECK(a(1, 1) > 0.0);

  // E[A_jj^2] = nu - j + 1 (1-based j): j=2, nu=5 -> 4.
  const int n = 100000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    LowerTrapezoid b = bartlett_sample(3, 5, rng);
    s += b(1, 1) * b(1, 1);
  }
  CHECK(s / n == doctest::Approx(4.0).epsilon(0.06 / 4.0));

  // E[A A^T] = nu I for P=2, nu=3.
  oracle::MomentAccumulator acc(4);
  for (int i = 0; i < n; ++i) {
    LowerTrapezoid b = bartlett_sample(2, 3, rng);
    Matrix g = matmul_nt(b.mat(), b.mat());
    acc.add({g(0, 0), g(0, 1), g(1, 0), g(1, 1)});
  }
  const double expect[4] = {3.0, 0.0, 0.0, 3.0};
  for (int i = 0; i < 4; ++i)
    CHECK(std::fabs(acc.mean(i) - expect[i]) < 5.0 * acc.mean_stderr(i));
}

TEST_CASE("logjac_chol_product closed values") {
  CHECK(logjac_chol_product(LowerTrapezoid(Matrix::identity(3), false)) ==
        doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(logjac_chol_product(LowerTrapezoid(Matrix{{2.0}}, false)) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK_THROWS_AS(logjac_chol_product(LowerTrapezoid(Matrix{{-1.0}}, false)), DomainError);
}

TEST_CASE("logjac_chol_product matches finite-difference Jacobian") {
  RngStream rng(40);
  for (int trial = 0; trial < 50; ++trial) {
    const int P = 1 + int(rng.next_u64() % 4);
    const int nu = 1 + int(rng.next_u64() % 6);
    LowerTrapezoid lam = random_trapezoid(P, nu, rng);
    const double fd = oracle::fd_logjac_chol_product(lam);
    const double an = logjac_chol_product(lam);
    CHECK(std::fabs(fd - an) / std::max(1.0, std::fabs(an)) < 1e-5);
  }
}

TEST_CASE("logjac_left_mult closed values") {
  CHECK(logjac_left_mult(Matrix::identity(4), 4, 2) == doctest::Approx(0.0));
  const double expect = std::log(2.0) + 2.0 * std::log(3.0);
  CHECK(logjac_left_mult(Matrix{{2, 0}, {1, 3}}, 2, 2) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("logjac_left_mult matches finite-difference Jacobian") {
  RngStream rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int P = 1 + int(rng.next_u64() % 4);
    const int nu = 1 + int(rng.next_u64() % 6);
    Matrix l = random_lower(P, rng);
    LowerTrapezoid a = random_trapezoid(P, nu, rng);
    const double fd = oracle::fd_logjac_left_mult(l, a);
    const double an = logjac_left_mult(l, P, nu);
    CHECK(std::fabs(fd - an) / std::max(1.0, std::fabs(an)) < 1e-5);
  }
}

TEST_CASE("standard singular wishart closed forms") {
  // p=1, nu=1 reduces to chi-square with one degree of freedom.
  for (double z : {0.3, 1.0, 4.2}) {
    const double expect = -0.5 * std::log(2.0 * M_PI * z) - 0.5 * z;
    CHECK(std_singular_wishart_logpdf(SymMatrix(Matrix{{z}}), 1) ==
          doctest::Approx(expect).epsilon(1e-12));
  }
  // p=2, nu=3 at the identity.
  const double expect2 = -3.0 * std::log(2.0) - log_multigamma(2, 1.5) - 1.0;
  CHECK(std_singular_wishart_logpdf(SymMatrix::identity(2), 3) ==
        doctest::Approx(expect2).epsilon(1e-12));
}

TEST_CASE("bartlett density path equals closed form (singular proof grid)") {
  RngStream rng(50);
  for (int P = 1; P <= 5; ++P) {
    for (int nu = 1; nu <= 5; ++nu) {
      for (int rep = 0; rep < 4; ++rep) {
        auto params = GenWishartParams::defaults(Matrix::identity(P), nu);
        auto [g, a] = genwishart_sample(params, rng);
        const double via_factor = genwishart_logpdf(a, params);
        const double closed = std_singular_wishart_logpdf(g, nu);
        CHECK(std::fabs(via_factor - closed) < 1e-8);
      }
    }
  }
}

TEST_CASE("general scale full-rank density matches textbook wishart") {
  RngStream rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 1 + int(rng.next_u64() % 3);
    const int nu = p + int(rng.next_u64() % 3);
    Matrix l = random_lower(p, rng);
    SymMatrix sigma = SymMatrix::from_outer(l, 1.0);
    auto params = GenWishartParams::defaults(cholesky(sigma.mat()), nu);
    auto [g, a] = genwishart_sample(params, rng);
    const double via_factor = genwishart_logpdf(a, params);
    const double textbook = oracle::wishart_logpdf_fullrank(g, sigma, nu);
    CHECK(std::fabs(via_factor - textbook) < 1e-8);
  }
}

TEST_CASE("scalar density integrates to one") {
  // P=1, nu=2, identity scale: G = A_11^2 with A_11^2 ~ Gamma(1, 1/2).
  auto params = GenWishartParams::defaults(Matrix::identity(1), 2);
  auto density = [&](double g) {
    LowerTrapezoid a(Matrix{{std::sqrt(g)}}, false);
    return std::exp(genwishart_logpdf(a, params));
  };
  const double z = oracle::integrate(density, 1e-8, 80.0, 400000);
  CHECK(z == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("sample/logpdf form a valid pair (importance-sampling normalizer)") {
  RngStream rng(52);
  for (int trial = 0; trial < 4; ++trial) {
    const int P = 2 + int(rng.next_u64() % 2);
    const int nu = 1 + int(rng.next_u64() % 4);
    Matrix l_ref = random_lower(P, rng);
    auto ref = GenWishartParams::defaults(l_ref, nu);

    // Random non-default target with a nearby scale so weights stay tame.
    GenWishartParams q = ref;
    Matrix bump = Matrix::identity(P);
    for (int i = 0; i < P; ++i) bump(i, i) = 1.0 + 0.1 * rng.uniform();
    q.scale_chol = matmul(l_ref, bump);
    for (auto& v : q.alpha) v *= 0.9 + 0.2 * rng.uniform();
    for (auto& v : q.beta) v *= 0.9 + 0.2 * rng.uniform();
    for (auto& v : q.mu) v += 0.1 * rng.normal();
    for (auto& v : q.sigma) v *= 0.9 + 0.2 * rng.uniform();

    const int n = 200000;
    double sw = 0.0, sw2 = 0.0;
    for (int i = 0; i < n; ++i) {
      auto [g, a_ref] = genwishart_sample(ref, rng);
      Matrix lambda = matmul(ref.scale_chol, a_ref.mat());
      LowerTrapezoid a_q(tri_solve(q.scale_chol, lambda), false);
      const double w = std::exp(genwishart_logpdf(a_q, q) - genwishart_logpdf(a_ref, ref));
      sw += w;
      sw2 += w * w;
    }
    const double mean = sw / n;
    const double se = std::sqrt(std::max(0.0, sw2 / n - mean * mean) / n);
    CHECK(std::fabs(mean - 1.0) <= 3.0 * se);
  }
}

TEST_CASE("genwishart default moments match the wishart") {
  RngStream rng(53);
  auto params = GenWishartParams::defaults(Matrix::identity(2), 3);
  const int n = 100000;
  oracle::MomentAccumulator acc(3);
  for (int i = 0; i < n; ++i) {
    auto [g, a] = genwishart_sample(params, rng);
    acc.add({g(0, 0), g(0, 1), g(1, 1)});
  }
  const double expect[3] = {3.0, 0.0, 3.0};
  for (int i = 0; i < 3; ++i)
    CHECK(std::fabs(acc.mean(i) - expect[i]) < 5.0 * acc.mean_stderr(i));
}

TEST_CASE("genwishart default variance matches nu(sigma_ij^2 + sigma_ii sigma_jj)") {
  RngStream rng(54);
  const int nu = 4;
  auto params = GenWishartParams::defaults(Matrix::identity(2), nu);
  const int n = 100000;
  oracle::MomentAccumulator acc(3);
  for (int i = 0; i < n; ++i) {
    auto [g, a] = genwishart_sample(params, rng);
    acc.add({g(0, 0), g(0, 1), g(1, 1)});
  }
  // Var[G_ij] = nu (delta_ij + 1) for identity scale.
  const double expect[3] = {2.0 * nu, 1.0 * nu, 2.0 * nu};
  for (int i = 0; i < 3; ++i) {
    const double v = acc.variance(i);
    // Standard error of a variance estimate ~ var * sqrt(2/(n-1)) for
    // Gaussian-ish tails; these are heavier, use a generous 12x.
    CHECK(std::fabs(v - expect[i]) < 12.0 * expect[i] * std::sqrt(2.0 / (n - 1.0)));
  }
}

TEST_CASE("genwishart degenerate limit concentrates") {
  RngStream rng(55);
  GenWishartParams p = GenWishartParams::defaults(Matrix::identity(2), 2);
  const double c = 1.7, big = 1e6;
  p.alpha = {c * big, c * big};
  p.beta = {big, big};
  p.sigma = {1e-8};
  const int n = 2000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    auto [g, a] = genwishart_sample(p, rng);
    s += g(0, 0);
    s2 += g(0, 0) * g(0, 0);
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  CHECK(mean == doctest::Approx(c).epsilon(1e-2));
  CHECK(var < 1e-4);
}

TEST_CASE("matnorm conditional with zero cross-covariance") {
  RngStream rng(60);
  CondGaussBlocks k;
  k.k_ii = Matrix{{1.0, 0.2}, {0.2, 1.5}};
  k.k_it = Matrix::zeros(2, 2);
  k.k_tt_diag = Matrix{{0.7}, {1.3}};
  Matrix f_i{{1.0, 2.0}, {3.0, 4.0}};

  const int n = 50000;
  oracle::MomentAccumulator acc(4);
  for (int i = 0; i < n; ++i) {
    Matrix ft = matnorm_cond_sample(k, f_i, rng);
    acc.add({ft(0, 0), ft(0, 1), ft(1, 0), ft(1, 1)});
  }
  for (int i = 0; i < 4; ++i) CHECK(std::fabs(acc.mean(i)) < 5.0 * acc.mean_stderr(i));
}

TEST_CASE("matnorm duplicate test point is deterministic") {
  RngStream rng(61);
  Matrix l = random_lower(2, rng);
  Matrix kii = matmul_nt(l, l);
  CondGaussBlocks k;
  k.k_ii = kii;
  k.k_it = Matrix(2, 1);
  k.k_it(0, 0) = kii(0, 0);
  k.k_it(1, 0) = kii(1, 0);
  k.k_tt_diag = Matrix{{kii(0, 0)}};
  Matrix f_i{{0.5, -1.0, 2.0}, {1.5, 0.3, -0.7}};
  Matrix ft = matnorm_cond_sample(k, f_i, rng);
  for (int c = 0; c < 3; ++c) CHECK(ft(0, c) == doctest::Approx(f_i(0, c)).epsilon(1e-8));
}

TEST_CASE("matnorm moments match the conditional formulas") {
  RngStream rng(62);
  Matrix l = random_lower(3, rng);
  Matrix kfull = matmul_nt(l, l);  // partition 2 inducing + 1 test
  CondGaussBlocks k;
  k.k_ii = Matrix{{kfull(0, 0), kfull(0, 1)}, {kfull(1, 0), kfull(1, 1)}};
  k.k_it = Matrix{{kfull(0, 2)}, {kfull(1, 2)}};
  k.k_tt_diag = Matrix{{kfull(2, 2)}};
  Matrix f_i{{0.7}, {-1.2}};

  Matrix lc = cholesky(k.k_ii);
  Matrix b = tri_solve(lc, k.k_it);
  Matrix w = tri_solve(lc, f_i);
  const double mean_expect = b(0, 0) * w(0, 0) + b(1, 0) * w(1, 0);
  const double var_expect = kfull(2, 2) - b(0, 0) * b(0, 0) - b(1, 0) * b(1, 0);

  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    Matrix ft = matnorm_cond_sample(k, f_i, rng);
    s += ft(0, 0);
    s2 += ft(0, 0) * ft(0, 0);
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  CHECK(std::fabs(mean - mean_expect) < 5.0 * std::sqrt(var_expect / n));
  CHECK(std::fabs(var - var_expect) < 12.0 * var_expect * std::sqrt(2.0 / (n - 1.0)));
}

TEST_CASE("genwishart parameter validation") {
  auto p = GenWishartParams::defaults(Matrix::identity(3), 2);
  CHECK_NOTHROW(p.validate());
  CHECK(p.alpha.size() == 2);
  CHECK(p.mu.size() == 3);  // (3-1) + (3-2)
  p.alpha[0] = -1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  auto q = GenWishartParams::defaults(Matrix::identity(3), 2);
  q.mu.pop_back();
  CHECK_THROWS_AS(q.validate(), ShapeMismatch);
}
