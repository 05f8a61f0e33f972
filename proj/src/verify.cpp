#include "dwp/verify.hpp"

#include <chrono>
#include <cmath>

#include "dwp/ad/gradcheck.hpp"
#include "dwp/distributions.hpp"
#include "dwp/inference.hpp"
#include "dwp/linalg.hpp"
#include "dwp/model.hpp"
#include "dwp/oracles.hpp"
#include "dwp/special.hpp"

namespace dwp::verify {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

CheckResult make_result(const std::string& name, double measured, double tolerance,
                        Clock::time_point t0, const std::string& detail = "") {
  CheckResult r;
  r.name = name;
  r.measured = measured;
  r.tolerance = tolerance;
  r.pass = measured <= tolerance && std::isfinite(measured);
  r.detail = detail;
  r.millis = ms_since(t0);
  return r;
}

Matrix random_matrix(int r, int c, RngStream& rng) {
  Matrix m(r, c);
  for (auto& x : m.vec()) x = rng.normal();
  return m;
}

Matrix random_lower(int n, RngStream& rng) {
  Matrix l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) l(i, j) = 0.3 * rng.normal();
    l(i, i) = 0.8 + 0.8 * rng.uniform();
  }
  return l;
}

LowerTrapezoid random_trapezoid(int p, int nu, RngStream& rng) {
  const int m = std::min(p, nu);
  Matrix a(p, m);
  for (int j = 0; j < m; ++j) {
    a(j, j) = 0.5 + rng.uniform();
    for (int i = j + 1; i < p; ++i) a(i, j) = rng.normal();
  }
  return LowerTrapezoid(std::move(a), false);
}

model::DwpModel tiny_model(int depth, int inducing, int width, const Matrix& x, RngStream& rng) {
  model::ModelConfig cfg;
  cfg.depth = depth;
  cfg.widths.assign(size_t(depth), width);
  cfg.inducing = inducing;
  cfg.batch = x.rows();
  return model::DwpModel::init(cfg, x, rng);
}

// Variance estimates with standard errors by batch means.
class VarBatcher {
 public:
  VarBatcher(int dim, int batches) : dim_(dim), batches_(batches), acc_(batches) {
    for (auto& a : acc_) a.assign(size_t(dim) * 2, 0.0);
    counts_.assign(batches, 0);
  }
  void add(const std::vector<double>& x) {
    auto& a = acc_[next_ % batches_];
    for (int i = 0; i < dim_; ++i) {
      a[2 * i] += x[i];
      a[2 * i + 1] += x[i] * x[i];
    }
    ++counts_[next_ % batches_];
    ++next_;
  }
  // Mean and stderr of the per-batch variance estimates for coordinate i.
  std::pair<double, double> variance(int i) const {
    double s = 0.0, s2 = 0.0;
    for (int b = 0; b < batches_; ++b) {
      const double n = double(counts_[b]);
      const double m = acc_[b][2 * i] / n;
      const double v = acc_[b][2 * i + 1] / n - m * m;
      s += v;
      s2 += v * v;
    }
    const double mean = s / batches_;
    const double sd = std::sqrt(std::max(0.0, s2 / batches_ - mean * mean));
    return {mean, sd / std::sqrt(double(batches_))};
  }

 private:
  int dim_, batches_;
  long next_ = 0;
  std::vector<std::vector<double>> acc_;
  std::vector<long> counts_;
};

}  // namespace

// --- jacobians ---------------------------------------------------------------

std::vector<CheckResult> suite_jacobians(uint64_t seed) {
  std::vector<CheckResult> out;
  RngStream rng(seed, 1);

  {
    auto t0 = Clock::now();
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const int p = 1 + int(rng.next_u64() % 4);
      const int nu = 1 + int(rng.next_u64() % 6);
      LowerTrapezoid lam = random_trapezoid(p, nu, rng);
      const double fd = oracle::fd_logjac_chol_product(lam);
      const double an = dist::logjac_chol_product(lam);
      worst = std::max(worst, std::fabs(fd - an) / std::max(1.0, std::fabs(an)));
    }
    out.push_back(make_result("jacobian_factor_to_gram_fd", worst, 1e-5, t0,
                              "50 instances, dims <= 4, singular and full rank"));
  }
  {
    auto t0 = Clock::now();
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const int p = 1 + int(rng.next_u64() % 4);
      const int nu = 1 + int(rng.next_u64() % 6);
      Matrix l = random_lower(p, rng);
      LowerTrapezoid a = random_trapezoid(p, nu, rng);
      const double fd = oracle::fd_logjac_left_mult(l, a);
      const double an = dist::logjac_left_mult(l, p, nu);
      worst = std::max(worst, std::fabs(fd - an) / std::max(1.0, std::fabs(an)));
    }
    out.push_back(make_result("jacobian_left_mult_fd", worst, 1e-5, t0,
                              "50 instances, dims <= 4, singular and full rank"));
  }
  return out;
}

// --- density -----------------------------------------------------------------

std::vector<CheckResult> suite_density(uint64_t seed) {
  std::vector<CheckResult> out;
  RngStream rng(seed, 2);

  {
    auto t0 = Clock::now();
    double worst = 0.0;
    for (int p = 1; p <= 5; ++p)
      for (int nu = 1; nu <= 5; ++nu)
        for (int rep = 0; rep < 4; ++rep) {
          auto params = dist::GenWishartParams::defaults(Matrix::identity(p), nu);
          auto [g, a] = dist::genwishart_sample(params, rng);
          const double via = dist::genwishart_logpdf(a, params);
          const double closed = dist::std_singular_wishart_logpdf(g, nu);
          worst = std::max(worst, std::fabs(via - closed));
        }
    out.push_back(make_result("density_closed_form_grid", worst, 1e-8, t0,
                              "all P <= 5, nu <= 5, default parameters, identity scale"));
  }
  {
    auto t0 = Clock::now();
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const int p = 1 + int(rng.next_u64() % 3);
      const int nu = p + int(rng.next_u64() % 3);
      Matrix l = random_lower(p, rng);
      SymMatrix sigma = SymMatrix::from_outer(l, 1.0);
      auto params = dist::GenWishartParams::defaults(cholesky(sigma.mat()), nu);
      auto [g, a] = dist::genwishart_sample(params, rng);
      worst = std::max(worst, std::fabs(dist::genwishart_logpdf(a, params) -
                                        oracle::wishart_logpdf_fullrank(g, sigma, nu)));
    }
    out.push_back(make_result("density_general_scale_fullrank", worst, 1e-8, t0,
                              "textbook Wishart oracle, random PD scales"));
  }
  {
    auto t0 = Clock::now();
    auto params = dist::GenWishartParams::defaults(Matrix::identity(1), 2);
    auto density = [&](double g) {
      LowerTrapezoid a(Matrix{{std::sqrt(g)}}, false);
      return std::exp(dist::genwishart_logpdf(a, params));
    };
    const double z = oracle::integrate(density, 1e-8, 80.0, 400000);
    out.push_back(make_result("density_scalar_quadrature", std::fabs(z - 1.0), 1e-4, t0,
                              "P=1, nu=2 normalizer"));
  }
  {
    auto t0 = Clock::now();
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      const int p = 2 + int(rng.next_u64() % 2);
      const int nu = 1 + int(rng.next_u64() % 4);
      Matrix l_ref = random_lower(p, rng);
      auto ref = dist::GenWishartParams::defaults(l_ref, nu);
      dist::GenWishartParams q = ref;
      Matrix bump = Matrix::identity(p);
      for (int i = 0; i < p; ++i) bump(i, i) = 1.0 + 0.1 * rng.uniform();
      q.scale_chol = matmul(l_ref, bump);
      for (auto& v : q.alpha) v *= 0.9 + 0.2 * rng.uniform();
      for (auto& v : q.beta) v *= 0.9 + 0.2 * rng.uniform();
      for (auto& v : q.mu) v += 0.1 * rng.normal();
      for (auto& v : q.sigma) v *= 0.9 + 0.2 * rng.uniform();

      const int n = 100000;
      double sw = 0.0, sw2 = 0.0;
      for (int i = 0; i < n; ++i) {
        auto [g, a_ref] = dist::genwishart_sample(ref, rng);
        Matrix lambda = matmul(ref.scale_chol, a_ref.mat());
        LowerTrapezoid a_q(tri_solve(q.scale_chol, lambda), false);
        const double w =
            std::exp(dist::genwishart_logpdf(a_q, q) - dist::genwishart_logpdf(a_ref, ref));
        sw += w;
        sw2 += w * w;
      }
      const double mean = sw / n;
      const double se = std::sqrt(std::max(1e-300, sw2 / n - mean * mean) / n);
      worst = std::max(worst, std::fabs(mean - 1.0) / (3.0 * se));
    }
    out.push_back(make_result("density_importance_normalizer", worst, 1.0, t0,
                              "|Z-1| in units of 3 MC stderr, random parameters"));
  }
  {
    auto t0 = Clock::now();
    double worst = 0.0;
    for (double z : {0.3, 1.0, 4.2}) {
      const double expect = -0.5 * std::log(2.0 * M_PI * z) - 0.5 * z;
      worst = std::max(worst, std::fabs(dist::std_singular_wishart_logpdf(
                                            SymMatrix(Matrix{{z}}), 1) -
                                        expect));
    }
    out.push_back(make_result("density_chi_square_reduction", worst, 1e-12, t0,
                              "scalar case equals the chi-square density"));
  }
  return out;
}

// --- invariance ---------------------------------------------------------------

std::vector<CheckResult> suite_invariance(uint64_t seed) {
  std::vector<CheckResult> out;
  RngStream rng(seed, 3);

  {
    // Conditional-prior pipeline moments for two factors of the same Gram.
    auto t0 = Clock::now();
    const int pi = 3, pt = 2, nu = 2, draws = 100000;

    Matrix f5 = random_matrix(pi + pt, 3, rng);
    SymMatrix s_full = SymMatrix::from_outer(f5, 1.0);
    for (int i = 0; i < pi + pt; ++i) s_full.mat()(i, i) += 0.1;
    dist::CondGaussBlocks blocks;
    blocks.k_ii = Matrix(pi, pi);
    blocks.k_it = Matrix(pi, pt);
    blocks.k_tt_diag = Matrix(pt, 1);
    for (int i = 0; i < pi; ++i)
      for (int j = 0; j < pi; ++j) blocks.k_ii(i, j) = s_full(i, j);
    for (int i = 0; i < pi; ++i)
      for (int j = 0; j < pt; ++j) blocks.k_it(i, j) = s_full(i, pi + j);
    for (int j = 0; j < pt; ++j) blocks.k_tt_diag(j, 0) = s_full(pi + j, pi + j);

    LowerTrapezoid lam = random_trapezoid(pi, nu, rng);
    Matrix f_a = lam.mat();
    const double th = 2.0 * M_PI * rng.uniform();
    Matrix u{{std::cos(th), -std::sin(th)}, {std::sin(th), std::cos(th)}};
    Matrix f_b = matmul(f_a, u);

    // First and second moments of (G_ti, G_tt) entries.
    const int nstat = pt * pi + pt * (pt + 1) / 2;
    const int dim = nstat + nstat * (nstat + 1) / 2;
    oracle::MomentAccumulator acc_a(dim), acc_b(dim);
    std::vector<double> v(nstat), row(dim);
    for (int d = 0; d < draws; ++d) {
      for (auto pack : {std::make_pair(&f_a, &acc_a), std::make_pair(&f_b, &acc_b)}) {
        Matrix f_t = dist::matnorm_cond_sample(blocks, *pack.first, rng);
        Matrix g_ti = matmul_nt(f_t, *pack.first);
        Matrix g_tt = matmul_nt(f_t, f_t);
        int k = 0;
        for (int i = 0; i < pt; ++i)
          for (int j = 0; j < pi; ++j) v[k++] = g_ti(i, j);
        for (int i = 0; i < pt; ++i)
          for (int j = 0; j <= i; ++j) v[k++] = g_tt(i, j);
        k = 0;
        for (int i = 0; i < nstat; ++i) row[k++] = v[i];
        for (int i = 0; i < nstat; ++i)
          for (int j = 0; j <= i; ++j) row[k++] = v[i] * v[j];
        pack.second->add(row);
      }
    }
    double worst_z = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double se = std::sqrt(acc_a.mean_stderr(i) * acc_a.mean_stderr(i) +
                                  acc_b.mean_stderr(i) * acc_b.mean_stderr(i));
      worst_z = std::max(worst_z, std::fabs(acc_a.mean(i) - acc_b.mean(i)) / se);
    }
    out.push_back(make_result("invariance_factor_choice", worst_z, 5.0, t0,
                              "G_ti/G_tt moments across rotated factors (z-score units)"));
  }
  {
    auto t0 = Clock::now();
    Matrix f = random_matrix(4, 3, rng);
    Matrix fd = f;
    for (int j = 0; j < 3; j += 2)
      for (int i = 0; i < 4; ++i) fd(i, j) = -fd(i, j);
    const bool bitwise = SymMatrix::from_outer(f, 1.0 / 3).mat().vec() ==
                         SymMatrix::from_outer(fd, 1.0 / 3).mat().vec();
    out.push_back(make_result("invariance_gram_sign_flip", bitwise ? 0.0 : 1.0, 0.0, t0,
                              "bit-identical Gram under sign-flip features"));
  }
  {
    auto t0 = Clock::now();
    Matrix f = random_matrix(4, 3, rng);
    const double th = 0.9;
    Matrix u{{std::cos(th), -std::sin(th), 0}, {std::sin(th), std::cos(th), 0}, {0, 0, 1}};
    const double dev = frobenius_distance(SymMatrix::from_outer(f, 1.0 / 3).mat(),
                                          SymMatrix::from_outer(matmul(f, u), 1.0 / 3).mat());
    out.push_back(
        make_result("invariance_gram_rotation", dev, 1e-12, t0, "rotation to roundoff"));
  }
  {
    auto t0 = Clock::now();
    Matrix x = random_matrix(5, 3, rng);
    std::vector<kern::KernelConfig> kcs(1);
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      auto s = model::dwp_prior_sample(x, {2}, kcs, kern::KernelConfig{}, 1, rng);
      auto evals = sym_eigenvalues(s.grams[0].mat());
      const double top = evals.back();
      for (int i = 0; i < 3; ++i) worst = std::max(worst, std::fabs(evals[i]) / top);
    }
    out.push_back(make_result("invariance_sample_rank", worst, 1e-8, t0,
                              "rank-nu Grams have vanishing trailing spectrum"));
  }
  return out;
}

// --- gradients ----------------------------------------------------------------

std::vector<CheckResult> suite_gradients(uint64_t seed) {
  std::vector<CheckResult> out;
  RngStream rng(seed, 4);

  {
    auto t0 = Clock::now();
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const int n = 2 + int(rng.next_u64() % 4);
      Matrix l = random_lower(n, rng);
      Matrix g = matmul_nt(l, l);
      Matrix b = random_matrix(n, 2, rng);
      auto f = [](ad::Tape&, const std::vector<ad::Var>& p) {
        ad::Var lc = ad::cholesky(p[0]);
        return ad::add(ad::sum(ad::square(ad::tri_solve(lc, p[1]))), ad::log_diag_sum(lc));
      };
      worst = std::max(worst, ad::gradcheck(f, {g, b}, 1e-5).max_rel_err);
    }
    out.push_back(make_result("grad_cholesky_solve_primitives", worst, 1e-5, t0,
                              "cholesky and triangular-solve adjoints"));
  }
  {
    auto t0 = Clock::now();
    RngStream base(seed ^ 0x1234);
    Matrix x = random_matrix(4, 2, rng);
    Matrix y = random_matrix(4, 1, rng);
    RngStream init(seed ^ 0x77);
    auto m = tiny_model(1, 3, 2, x, init);
    RngStream prt(seed ^ 0x99);
    for (const auto& name : m.params.names()) {
      if (name == "inducing_inputs") continue;
      for (auto& v : m.params.at(name).vec()) v += 0.1 * prt.normal();
    }
    std::vector<Matrix> point;
    for (const auto& name : m.params.names()) point.push_back(m.params.at(name));
    auto f = [&, base](ad::Tape& tape, const std::vector<ad::Var>& leaves) {
      RngStream noise = base;
      return m
          .elbo_sample_vars(tape, leaves, x, y, 4, 1.0,
                            model::StlFlags{false, false, false, false}, noise)
          .objective;
    };
    const double err = ad::gradcheck(f, point, {1e-5, 1e-6}).max_rel_err;
    out.push_back(make_result("grad_full_elbo_fd", err, 1e-3, t0,
                              "single-layer ELBO, common random numbers, all groups"));
  }
  {
    auto t0 = Clock::now();
    RngStream base(seed ^ 0xabc);
    auto f = [base](ad::Tape&, const std::vector<ad::Var>& p) {
      RngStream r = base;
      return ad::sum(ad::square(ad::gamma_sample(ad::softplus(p[0]), ad::softplus(p[1]), r)));
    };
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      Matrix a(3, 1), b(3, 1);
      for (auto& v : a.vec()) v = 0.2 + 2.0 * rng.uniform();
      for (auto& v : b.vec()) v = 0.2 + 2.0 * rng.uniform();
      worst = std::max(worst, ad::gradcheck(f, {a, b}, 1e-5).max_rel_err);
    }
    out.push_back(make_result("grad_gamma_implicit_reparam", worst, 1e-3, t0,
                              "implicit-function gradients through the Gamma CDF"));
  }
  {
    auto t0 = Clock::now();
    Matrix x = random_matrix(5, 2, rng);
    Matrix y = random_matrix(5, 1, rng);
    RngStream init(seed ^ 0x55);
    auto m = tiny_model(1, 3, 2, x, init);
    auto eval = [&](const model::StlFlags& stl) {
      ad::Tape tape;
      auto leaves = m.bind(tape);
      RngStream noise(seed ^ 0x31);
      auto ev = m.elbo_sample_vars(tape, leaves, x, y, 5, 1.0, stl, noise);
      return tape.value(ev.objective)(0, 0);
    };
    const double diff =
        std::fabs(eval(model::StlFlags{}) - eval(model::StlFlags{false, false, false, false}));
    out.push_back(make_result("grad_stl_primal_invariant", diff, 0.0, t0,
                              "sticking-the-landing leaves the estimate bit-identical"));
  }
  {
    auto t0 = Clock::now();
    ad::Tape tape;
    ad::Var v = tape.leaf(random_matrix(3, 3, rng));
    ad::Var obj = ad::sum(ad::square(ad::exp(ad::mul_const(v, 0.1))));
    const size_t visited = tape.backward(obj);
    out.push_back(make_result("grad_backward_touch_once",
                              double(visited) - double(tape.size()), 0.0, t0,
                              "reverse pass visits each node exactly once"));
  }
  return out;
}

// --- prior equivalence ----------------------------------------------------------

std::vector<CheckResult> suite_prior_equiv(uint64_t seed) {
  std::vector<CheckResult> out;
  RngStream rng(seed, 5);

  {
    auto t0 = Clock::now();
    Matrix x = random_matrix(3, 2, rng);
    std::vector<int> widths{2, 2};
    std::vector<kern::KernelConfig> kcs(2);
    kern::KernelConfig out_kc;
    const int draws = 100000;
    oracle::MomentAccumulator a_dwp(18), a_dgp(18);
    VarBatcher v_dwp(18, 50), v_dgp(18, 50);
    std::vector<double> va(18), vb(18);
    for (int i = 0; i < draws; ++i) {
      auto sa = model::dwp_prior_sample(x, widths, kcs, out_kc, 1, rng);
      auto sb = model::dgp_prior_sample(x, widths, kcs, out_kc, 1, rng);
      int k = 0;
      for (int l = 0; l < 2; ++l)
        for (double t : sa.grams[l].mat().vec()) va[k++] = t;
      k = 0;
      for (int l = 0; l < 2; ++l)
        for (double t : sb.grams[l].mat().vec()) vb[k++] = t;
      a_dwp.add(va);
      a_dgp.add(vb);
      v_dwp.add(va);
      v_dgp.add(vb);
    }
    double worst_z = 0.0;
    for (int i = 0; i < 18; ++i) {
      const double se_m = std::sqrt(a_dwp.mean_stderr(i) * a_dwp.mean_stderr(i) +
                                    a_dgp.mean_stderr(i) * a_dgp.mean_stderr(i));
      worst_z = std::max(worst_z, std::fabs(a_dwp.mean(i) - a_dgp.mean(i)) / se_m);
      auto [va_i, sa_i] = v_dwp.variance(i);
      auto [vb_i, sb_i] = v_dgp.variance(i);
      const double se_v = std::sqrt(sa_i * sa_i + sb_i * sb_i);
      worst_z = std::max(worst_z, std::fabs(va_i - vb_i) / se_v);
    }
    out.push_back(make_result("prior_dwp_dgp_equivalence", worst_z, 4.0, t0,
                              "G_1, G_2 entry means and variances (z-score units)"));
  }
  {
    auto t0 = Clock::now();
    const int nu = 3, draws = 100000;
    double worst_z = 0.0;
    for (int variant = 0; variant < 2; ++variant) {
      Matrix l = variant == 0 ? Matrix::identity(2) : random_lower(2, rng);
      Matrix sigma = matmul_nt(l, l);
      auto params = dist::GenWishartParams::defaults(l, nu);
      oracle::MomentAccumulator acc(4);
      for (int i = 0; i < draws; ++i) {
        auto [g, a] = dist::genwishart_sample(params, rng);
        acc.add({g(0, 0), g(0, 1), g(1, 0), g(1, 1)});
      }
      const double expect[4] = {nu * sigma(0, 0), nu * sigma(0, 1), nu * sigma(1, 0),
                                nu * sigma(1, 1)};
      for (int i = 0; i < 4; ++i)
        worst_z = std::max(worst_z, std::fabs(acc.mean(i) - expect[i]) / acc.mean_stderr(i));
    }
    out.push_back(make_result("prior_wishart_mean", worst_z, 4.0, t0,
                              "E[G] = nu Sigma, identity and random PD scales"));
  }
  {
    auto t0 = Clock::now();
    const int nu = 4, draws = 100000;
    double worst_z = 0.0;
    for (int variant = 0; variant < 2; ++variant) {
      Matrix l = variant == 0 ? Matrix::identity(2) : random_lower(2, rng);
      Matrix sigma = matmul_nt(l, l);
      auto params = dist::GenWishartParams::defaults(l, nu);
      VarBatcher vb(4, 50);
      for (int i = 0; i < draws; ++i) {
        auto [g, a] = dist::genwishart_sample(params, rng);
        vb.add({g(0, 0), g(0, 1), g(1, 0), g(1, 1)});
      }
      int k = 0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const double expect = nu * (sigma(i, j) * sigma(i, j) + sigma(i, i) * sigma(j, j));
          auto [v, se] = vb.variance(k);
          worst_z = std::max(worst_z, std::fabs(v - expect) / se);
          ++k;
        }
    }
    out.push_back(make_result("prior_wishart_variance", worst_z, 4.0, t0,
                              "Var[G_ij] = nu (Sigma_ij^2 + Sigma_ii Sigma_jj)"));
  }
  {
    auto t0 = Clock::now();
    Matrix x = random_matrix(3, 2, rng);
    std::vector<kern::KernelConfig> kcs(1);
    SymMatrix k1 = kern::sqexp_from_gram(SymMatrix::from_outer(x, 0.5), kcs[0]);
    const int draws = 50000;
    oracle::MomentAccumulator acc(9);
    for (int i = 0; i < draws; ++i) {
      auto s = model::dwp_prior_sample(x, {2}, kcs, kern::KernelConfig{}, 1, rng);
      acc.add(std::vector<double>(s.grams[0].mat().vec().begin(),
                                  s.grams[0].mat().vec().end()));
    }
    double worst_z = 0.0;
    for (int i = 0; i < 9; ++i)
      worst_z =
          std::max(worst_z, std::fabs(acc.mean(i) - k1.mat().vec()[i]) / acc.mean_stderr(i));
    out.push_back(make_result("prior_layer_mean_is_kernel", worst_z, 4.0, t0,
                              "E[G_1] = K(G_0)"));
  }
  {
    auto t0 = Clock::now();
    const int draws = 100000;
    double s = 0.0;
    RngStream r(seed, 6);
    for (int i = 0; i < draws; ++i) {
      auto a = dist::bartlett_sample(3, 5, r);
      s += a(1, 1) * a(1, 1);
    }
    out.push_back(make_result("prior_bartlett_diag_moment", std::fabs(s / draws - 4.0), 0.06,
                              t0, "E[A_22^2] = nu - 2 + 1"));
  }
  return out;
}

std::vector<CheckResult> suite_all(uint64_t seed) {
  std::vector<CheckResult> out;
  for (const auto& name : {"jacobians", "density", "invariance", "gradients", "prior-equiv"}) {
    auto r = run_suite(name, seed);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

std::vector<std::string> suite_names() {
  return {"jacobians", "density", "invariance", "gradients", "prior-equiv", "all"};
}

std::vector<CheckResult> run_suite(const std::string& name, uint64_t seed) {
  if (name == "jacobians") return suite_jacobians(seed);
  if (name == "density") return suite_density(seed);
  if (name == "invariance") return suite_invariance(seed);
  if (name == "gradients") return suite_gradients(seed);
  if (name == "prior-equiv") return suite_prior_equiv(seed);
  if (name == "all") return suite_all(seed);
  throw DomainError("unknown verify suite: " + name);
}

}  // namespace dwp::verify
