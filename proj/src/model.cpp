#include "dwp/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "dwp/linalg.hpp"
#include "dwp/special.hpp"

namespace dwp::model {

using ad::Tape;
using ad::Var;

void ModelConfig::finalize(int data_dim) {
  input_dim = data_dim;
  if (widths.empty()) widths.assign(size_t(depth), data_dim);
  if (int(widths.size()) != depth) throw ShapeMismatch("widths must have one entry per layer");
  validate();
}

void ModelConfig::validate() const {
  if (depth < 0) throw DomainError("depth must be >= 0");
  if (inducing < 1 || batch < 1 || train_samples < 1 || eval_samples < 1 || input_dim < 1 ||
      output_dim < 1)
    throw DomainError("model configuration values must be positive");
  for (int w : widths)
    if (w < 1) throw DomainError("layer widths must be positive");
}

void ParamStore::add(const std::string& name, Matrix value) {
  if (values_.count(name)) throw DomainError("duplicate parameter name " + name);
  order_.push_back(name);
  values_.emplace(name, std::move(value));
}

Matrix& ParamStore::at(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw DomainError("unknown parameter " + name);
  return it->second;
}

const Matrix& ParamStore::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw DomainError("unknown parameter " + name);
  return it->second;
}

size_t ParamStore::scalar_count() const {
  size_t n = 0;
  for (const auto& name : order_) n += values_.at(name).size();
  return n;
}

namespace {

std::string layer_prefix(int layer) { return "layer" + std::to_string(layer) + "."; }

int trap_offdiag_count(int rows, int cols) {
  int n = 0;
  for (int j = 0; j < cols; ++j) n += rows - 1 - j;
  return n;
}

Matrix filled(int r, int c, double v) { return Matrix::constant(r, c, v); }

}  // namespace

SymMatrix build_scale(const SymMatrix& k, int nu, const Matrix& v, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("build_scale requires p in [0,1]");
  Matrix vv = matmul_nt(v, v);
  Matrix out = add(scale(k.mat(), (1.0 - p) / double(nu)), scale(vv, p));
  return SymMatrix(std::move(out), false);
}

DwpModel DwpModel::init(ModelConfig cfg, const Matrix& x_train, RngStream& rng) {
  cfg.finalize(x_train.cols());
  DwpModel model;
  model.cfg = cfg;

  const int pi = cfg.inducing, d = cfg.input_dim;

  // Inducing inputs: seeded subset of the training rows (with jittered
  // resampling when there are fewer rows than inducing points).
  Matrix xi(pi, d);
  std::vector<int> perm(x_train.rows());
  for (int i = 0; i < x_train.rows(); ++i) perm[i] = i;
  for (int i = x_train.rows() - 1; i > 0; --i)
    std::swap(perm[i], perm[int(rng.next_u64() % uint64_t(i + 1))]);
  for (int i = 0; i < pi; ++i) {
    const int src = perm[i % x_train.rows()];
    for (int j = 0; j < d; ++j)
      xi(i, j) = x_train(src, j) + (i >= x_train.rows() ? 0.01 * rng.normal() : 0.0);
  }
  model.params.add("inducing_inputs", xi);

  const double unit_raw = softplus_inv(1.0);

  // Prior-mean scales for the V initialization, so q starts at the prior.
  // Layer 1 sees the deterministic input kernel; deeper layers use a Monte
  // Carlo average of the prior kernel (the kernel of the mean Gram is badly
  // biased when sampled Grams have rank nu << P_i).
  kern::KernelConfig kc0;
  kc0.ard.assign(size_t(d), 1.0);
  SymMatrix k1 = kern::sqexp_ard_from_inputs(xi, kc0);
  std::vector<Matrix> mean_kernel(size_t(cfg.depth) + 1);
  mean_kernel[0] = k1.mat();
  if (cfg.depth >= 2) {
    const int ndraw = 32;
    for (int l = 2; l <= cfg.depth; ++l) mean_kernel[l - 1] = Matrix(pi, pi);
    for (int s = 0; s < ndraw; ++s) {
      SymMatrix k = k1;
      for (int l = 2; l <= cfg.depth; ++l) {
        const int nu_prev = cfg.widths[l - 2];
        Matrix ls = cholesky(scale(k.mat(), 1.0 / double(nu_prev)));
        LowerTrapezoid a = dist::bartlett_sample(pi, nu_prev, rng);
        k = kern::sqexp_from_gram(SymMatrix::from_outer(matmul(ls, a.mat()), 1.0),
                                  kern::KernelConfig{});
        add_in_place(mean_kernel[l - 1], k.mat());
      }
    }
    for (int l = 2; l <= cfg.depth; ++l)
      mean_kernel[l - 1] = scale(mean_kernel[l - 1], 1.0 / double(ndraw));
  }

  for (int l = 1; l <= cfg.depth; ++l) {
    const int nu = cfg.widths[l - 1];
    const int m = std::min(pi, nu);
    const int noff = trap_offdiag_count(pi, m);
    const std::string pre = layer_prefix(l);

    Matrix v = cholesky(scale(mean_kernel[l - 1], 1.0 / double(nu)));
    model.params.add(pre + "V", std::move(v));
    model.params.add(pre + "p_logit", Matrix{{0.0}});

    Matrix alpha_raw(m, 1), beta_raw(m, 1);
    for (int j = 0; j < m; ++j) {
      alpha_raw(j, 0) = softplus_inv(0.5 * (nu - j));
      beta_raw(j, 0) = softplus_inv(0.5);
    }
    model.params.add(pre + "alpha_raw", std::move(alpha_raw));
    model.params.add(pre + "beta_raw", std::move(beta_raw));
    model.params.add(pre + "mu", Matrix(noff, 1));
    model.params.add(pre + "sigma_raw", filled(noff, 1, unit_raw));

    model.params.add(pre + "kernel_variance_raw", Matrix{{unit_raw}});
    if (l == 1)
      model.params.add(pre + "kernel_ard_raw", filled(d, 1, unit_raw));
    else
      model.params.add(pre + "kernel_lengthscale_raw", Matrix{{unit_raw}});
  }

  model.params.add("out.kernel_variance_raw", Matrix{{unit_raw}});
  model.params.add("out.kernel_lengthscale_raw", Matrix{{unit_raw}});
  model.params.add("out.inducing_means", Matrix(pi, cfg.output_dim));
  // Small initial q variance: deep kernels of rank-nu Grams are close to
  // singular, so inducing outputs drawn from a unit-covariance q would sit
  // far outside the prior's support at the start.
  Matrix cov_raw(pi, pi);
  for (int i = 0; i < pi; ++i) cov_raw(i, i) = softplus_inv(1e-2);
  model.params.add("out.cov_chol_raw", std::move(cov_raw));
  model.params.add("out.noise_raw", Matrix{{softplus_inv(0.1)}});

  return model;
}

std::vector<Var> DwpModel::bind(Tape& tape) const {
  std::vector<Var> leaves;
  leaves.reserve(params.names().size());
  for (const auto& name : params.names()) leaves.push_back(tape.leaf(params.at(name)));
  return leaves;
}

// --- ELBO pipeline ----------------------------------------------------------

namespace {

struct LeafLookup {
  const std::vector<std::string>* names;
  const std::vector<Var>* leaves;
  Var operator()(const std::string& name) const {
    for (size_t i = 0; i < names->size(); ++i)
      if ((*names)[i] == name) return (*leaves)[i];
    throw DomainError("unbound parameter " + name);
  }
};

struct KernelBlocksVar {
  Var k_ii;   // P_i x P_i, jitter included
  Var k_it;   // P_i x B
  Var k_tt;   // B x 1 diagonal, jitter included
};

// Latent state flowing between layers: the inducing Gram block, the
// inducing/batch cross block, and the batch diagonal.
struct GramState {
  Var g_ii;
  Var g_it;
  Var g_tt;
};

Var positive(Var raw) { return ad::softplus(raw); }

// K = s^2 exp(coef * R) with coef = -1/(2 l^2); jitter 1e-8 s^2 on diagonals.
KernelBlocksVar sqexp_blocks(Tape& tape, Var r_ii, Var r_it, Var s2, Var coef, int batch) {
  Var k_ii = ad::mul_scalar(ad::exp(ad::mul_scalar(r_ii, coef)), s2);
  Var jitter = ad::mul_const(s2, kern::kJitterScale);
  Var eye = tape.constant(Matrix::identity(r_ii.rows));
  k_ii = ad::add(k_ii, ad::mul_scalar(eye, jitter));
  Var k_it = ad::mul_scalar(ad::exp(ad::mul_scalar(r_it, coef)), s2);
  Var ones_b = tape.constant(filled(batch, 1, 1.0));
  Var k_tt = ad::mul_scalar(ones_b, ad::mul_const(s2, 1.0 + kern::kJitterScale));
  return {k_ii, k_it, k_tt};
}

// Adds 1e-8 * mean(diag) to the diagonal before factorization.
Var jittered(Tape& tape, Var s) {
  Var j = ad::mul_const(ad::trace(s), kern::kJitterScale / double(s.rows));
  Var eye = tape.constant(Matrix::identity(s.rows));
  return ad::add(s, ad::mul_scalar(eye, j));
}

Var col_sum_squares(Tape& tape, Var b) {
  Var ones = tape.constant(filled(1, b.rows, 1.0));
  return ad::transpose(ad::matmul(ones, ad::square(b)));
}

Var row_sum_squares(Tape& tape, Var f) {
  Var ones = tape.constant(filled(f.cols, 1, 1.0));
  return ad::matmul(ad::square(f), ones);
}

struct LayerOutcome {
  GramState state;
  Var kl;
};

}  // namespace

struct ElboBuilder {
  Tape& tape;
  const DwpModel& model;
  LeafLookup leaf;
  RngStream& rng;
  const StlFlags& stl;
  int batch;

  Var maybe_stop(Var v, bool flag) const { return flag ? ad::stop_gradient(v) : v; }

  KernelBlocksVar input_kernel_blocks(Var x_i, Var x_t) const {
    Var s2 = positive(leaf("layer1.kernel_variance_raw"));
    Var w = ad::recip(ad::square(positive(leaf("layer1.kernel_ard_raw"))));
    Var r_ii = ad::ard_sqdist(x_i, x_i, w);
    Var r_it = ad::ard_sqdist(x_i, x_t, w);
    Var minus_half = tape.scalar(-0.5);
    return sqexp_blocks(tape, r_ii, r_it, s2, minus_half, batch);
  }

  KernelBlocksVar gram_kernel_blocks(const GramState& s, const std::string& pre) const {
    Var s2 = positive(leaf(pre + "kernel_variance_raw"));
    Var len = positive(leaf(pre + "kernel_lengthscale_raw"));
    Var coef = ad::mul_const(ad::recip(ad::square(len)), -0.5);
    Var d_i = ad::take_diag(s.g_ii);
    Var r_ii = ad::gram_to_sqdist(s.g_ii);
    Var r_it = ad::cross_sqdist(d_i, s.g_it, s.g_tt);
    return sqexp_blocks(tape, r_ii, r_it, s2, coef, batch);
  }

  // One Wishart layer: sample the inducing Gram from q, accumulate the prior
  // and posterior densities on the shared factor, then draw the batch rows
  // from the conditional prior.
  LayerOutcome wishart_layer(int layer, const KernelBlocksVar& k) const {
    const std::string pre = layer_prefix(layer);
    const int pi = model.cfg.inducing;
    const int nu = model.cfg.widths[layer - 1];
    const int m = std::min(pi, nu);

    // Scales: prior (1/nu) K_ii; posterior mixes in V V^T by weight p.
    Var s_prior = jittered(tape, ad::mul_const(k.k_ii, 1.0 / double(nu)));
    Var v = leaf(pre + "V");
    Var p = ad::sigmoid(leaf(pre + "p_logit"));
    Var one = tape.scalar(1.0);
    Var s_q = ad::add(ad::mul_scalar(ad::mul_const(k.k_ii, 1.0 / double(nu)), ad::sub(one, p)),
                      ad::mul_scalar(ad::matmul(v, ad::transpose(v)), p));
    s_q = jittered(tape, s_q);

    Var l_q = ad::cholesky(s_q);
    Var l_p = ad::cholesky(s_prior);

    // Sample the generalized Bartlett factor.
    Var alpha = positive(leaf(pre + "alpha_raw"));
    Var beta = positive(leaf(pre + "beta_raw"));
    Var mu = leaf(pre + "mu");
    Var sigma = positive(leaf(pre + "sigma_raw"));

    Var z = ad::gamma_sample(alpha, beta, rng);
    Var diag_a = ad::sqrt(z);
    const int noff = trap_offdiag_count(pi, m);
    Matrix eps(noff, 1);
    for (auto& x : eps.vec()) x = rng.normal();
    Var off_a = ad::add(mu, ad::hadamard(sigma, tape.constant(std::move(eps))));
    Var a = ad::assemble_lower_trap(diag_a, off_a, pi, m);
    Var lambda = ad::matmul(l_q, a);

    // Jacobian weights shared by both densities.
    Matrix w_lm(pi, 1), w_cp(m, 1);
    for (int i = 0; i < pi; ++i) w_lm(i, 0) = double(std::min(i + 1, nu));
    for (int i = 0; i < m; ++i) w_cp(i, 0) = double(pi - i);
    Var w_lm_c = tape.constant(std::move(w_lm));
    Var w_cp_c = tape.constant(std::move(w_cp));
    Var logjac_cp = ad::add(ad::sum(ad::hadamard(w_cp_c, ad::log(ad::take_diag(lambda)))),
                            tape.scalar(m * std::log(2.0)));

    // log Q(G): sticking-the-landing stops the density path through the
    // variational parameters, never the sampling path.
    Var alpha_d = maybe_stop(alpha, stl.alpha);
    Var beta_d = maybe_stop(beta, stl.beta);
    Var mu_d = maybe_stop(mu, stl.mu);
    Var sigma_d = maybe_stop(sigma, stl.sigma);
    Var log_q = ad::sum(ad::gamma_logpdf(z, alpha_d, beta_d));
    log_q = ad::add(log_q, ad::sum(ad::log(ad::mul_const(diag_a, 2.0))));
    if (noff > 0) log_q = ad::add(log_q, ad::sum(ad::normal_logpdf(off_a, mu_d, sigma_d)));
    log_q = ad::sub(log_q, ad::sum(ad::hadamard(w_lm_c, ad::log(ad::take_diag(l_q)))));
    log_q = ad::sub(log_q, logjac_cp);

    // log P(G): same Gram matrix through the prior factorization
    // A' = L_p^-1 Lambda, default Bartlett parameters.
    Var a_p = ad::tri_solve(l_p, lambda);
    Var diag_ap = ad::take_diag(a_p);
    Var z_p = ad::square(diag_ap);
    Matrix alpha0(m, 1), beta0(m, 1);
    for (int j = 0; j < m; ++j) {
      alpha0(j, 0) = 0.5 * (nu - j);
      beta0(j, 0) = 0.5;
    }
    Var log_p = ad::sum(ad::gamma_logpdf(z_p, tape.constant(std::move(alpha0)),
                                         tape.constant(std::move(beta0))));
    log_p = ad::add(log_p, ad::sum(ad::log(ad::mul_const(diag_ap, 2.0))));
    if (noff > 0) {
      Var off_ap = ad::extract_lower_offdiag(a_p);
      log_p = ad::add(log_p, ad::sum(ad::normal_logpdf(off_ap, tape.constant(Matrix(noff, 1)),
                                                       tape.constant(filled(noff, 1, 1.0)))));
    }
    log_p = ad::sub(log_p, ad::sum(ad::hadamard(w_lm_c, ad::log(ad::take_diag(l_p)))));
    log_p = ad::sub(log_p, logjac_cp);

    Var kl = ad::sub(log_p, log_q);

    // Conditional prior for the batch rows, one test point at a time.
    Var s_it = ad::mul_const(k.k_it, 1.0 / double(nu));
    Var s_tt = ad::mul_const(k.k_tt, 1.0 / double(nu));
    Var f_i = lambda;
    if (nu > pi) f_i = ad::concat_cols(lambda, tape.constant(Matrix(pi, nu - pi)));

    Var b = ad::tri_solve(l_p, s_it);
    Var w_f = ad::tri_solve(l_p, f_i);
    Var mean_t = ad::matmul(ad::transpose(b), w_f);
    Var cvar = ad::clamp_min0(ad::sub(s_tt, col_sum_squares(tape, b)));
    Matrix noise(batch, nu);
    for (auto& x : noise.vec()) x = rng.normal();
    Var f_t = ad::add(mean_t, ad::row_scale(tape.constant(std::move(noise)), ad::sqrt(cvar)));

    GramState next;
    next.g_ii = ad::matmul(f_i, ad::transpose(f_i));
    next.g_it = ad::matmul(f_i, ad::transpose(f_t));
    next.g_tt = row_sum_squares(tape, f_t);
    return {next, kl};
  }

  // Final GP layer: q over inducing outputs, conditional-prior predictions.
  struct OutputVars {
    Var kl;
    Var pred_mean;  // B x out
    Var pred_var;   // B x 1 conditional variance
    Var noise_var;  // 1 x 1
  };

  OutputVars output_layer(const KernelBlocksVar& k) const {
    const int pi = model.cfg.inducing;
    const int out = model.cfg.output_dim;

    Var l_k = ad::cholesky(k.k_ii);

    Var raw = leaf("out.cov_chol_raw");
    Matrix mask(pi, pi);
    for (int i = 0; i < pi; ++i)
      for (int j = 0; j < i; ++j) mask(i, j) = 1.0;
    Var c = ad::add(ad::hadamard(raw, tape.constant(std::move(mask))),
                    ad::diag_from_vec(ad::softplus(ad::take_diag(raw))));
    Var means = leaf("out.inducing_means");

    Matrix eps(pi, out);
    for (auto& x : eps.vec()) x = rng.normal();
    Var eps_c = tape.constant(std::move(eps));
    Var f_i = ad::add(means, ad::matmul(c, eps_c));

    // Entropy term at the sample: C^-1 (F - M) is the driving noise by
    // construction, and the total reparameterized gradient of the quadratic
    // form w.r.t. the mean and covariance vanishes identically, so the
    // closed form is exact for both value and gradient. Solving for it
    // instead loses catastrophically when the optimizer shrinks the
    // covariance diagonal under the unsquashed off-diagonal entries.
    Var log_q = ad::sub(ad::mul_const(ad::log_diag_sum(c), -double(out)),
                        ad::mul_const(ad::sum(ad::square(eps_c)), 0.5));
    Var wp = ad::tri_solve(l_k, f_i);
    Var log_p = ad::sub(ad::mul_const(ad::log_diag_sum(l_k), -double(out)),
                        ad::mul_const(ad::sum(ad::square(wp)), 0.5));
    // The -out*pi/2 log(2pi) constants cancel in log P - log Q.
    Var kl = ad::sub(log_p, log_q);

    Var b = ad::tri_solve(l_k, k.k_it);
    Var w_f = ad::tri_solve(l_k, f_i);
    Var pred_mean = ad::matmul(ad::transpose(b), w_f);
    Var pred_var = ad::clamp_min0(ad::sub(k.k_tt, col_sum_squares(tape, b)));
    // Floored observation noise: keeps the likelihood precision finite if the
    // optimizer drives the raw parameter far negative.
    Var noise_var = ad::add(positive(leaf("out.noise_raw")), tape.scalar(1e-6));
    return {kl, pred_mean, pred_var, noise_var};
  }

  OutputVars run(Var x_i, Var x_t, std::vector<Var>* kls) const {
    KernelBlocksVar k = input_kernel_blocks(x_i, x_t);
    GramState state;
    for (int l = 1; l <= model.cfg.depth; ++l) {
      try {
        if (l > 1) k = gram_kernel_blocks(state, layer_prefix(l));
        LayerOutcome lo = wishart_layer(l, k);
        state = lo.state;
        kls->push_back(lo.kl);
      } catch (const Error& e) {
        throw Error("wishart layer " + std::to_string(l) + ": " + e.what());
      }
    }
    try {
      KernelBlocksVar k_out = gram_kernel_blocks(state, "out.");
      return output_layer(k_out);
    } catch (const Error& e) {
      throw Error(std::string("gp output layer: ") + e.what());
    }
  }
};

DwpModel::ElboVars DwpModel::elbo_sample_vars(Tape& tape, const std::vector<Var>& leaves,
                                              const Matrix& xb, const Matrix& yb, long n_total,
                                              double anneal, const StlFlags& stl,
                                              RngStream& rng) const {
  if (xb.rows() < 1) throw DomainError("elbo requires a nonempty batch");
  if (yb.rows() != xb.rows() || yb.cols() != cfg.output_dim)
    throw ShapeMismatch("target shape mismatch");

  ElboBuilder builder{tape, *this, LeafLookup{&params.names(), &leaves}, rng, stl, xb.rows()};
  Var x_i = builder.leaf("inducing_inputs");
  Var x_t = tape.constant(xb);

  std::vector<Var> kls;
  auto out = builder.run(x_i, x_t, &kls);
  kls.push_back(out.kl);

  // Gaussian likelihood with predictive noise drawn from the conditional.
  const int b = xb.rows(), nout = cfg.output_dim;
  Matrix eps(b, nout);
  for (auto& x : eps.vec()) x = rng.normal();
  Var f_t = ad::add(out.pred_mean,
                    ad::row_scale(tape.constant(std::move(eps)), ad::sqrt(out.pred_var)));
  constexpr double kLogTwoPi = 1.8378770664093454836;
  Var resid = ad::sum(ad::square(ad::sub(tape.constant(yb), f_t)));
  Var loglik = ad::add(ad::mul_const(ad::log(out.noise_var), -0.5 * b * nout),
                       tape.scalar(-0.5 * b * nout * kLogTwoPi));
  loglik = ad::sub(loglik, ad::mul_const(ad::div_scalar(resid, out.noise_var), 0.5));
  Var loglik_scaled = ad::mul_const(loglik, double(n_total) / double(b));

  Var kl_total = kls[0];
  for (size_t i = 1; i < kls.size(); ++i) kl_total = ad::add(kl_total, kls[i]);
  Var objective = ad::add(loglik_scaled, ad::mul_const(kl_total, anneal));

  return {objective, loglik_scaled, std::move(kls)};
}

DwpModel::PredictiveDraw DwpModel::predict_sample(const Matrix& x, RngStream& rng) const {
  Tape tape;
  auto leaves = bind(tape);
  StlFlags stl;
  ElboBuilder builder{tape, *this, LeafLookup{&params.names(), &leaves}, rng, stl, x.rows()};
  Var x_i = builder.leaf("inducing_inputs");
  Var x_t = tape.constant(x);
  std::vector<Var> kls;
  auto out = builder.run(x_i, x_t, &kls);
  return {tape.value(out.pred_mean), tape.value(out.pred_var),
          tape.value(out.noise_var)(0, 0)};
}

// --- prior samplers ---------------------------------------------------------

namespace {

SymMatrix gram0(const Matrix& x) { return SymMatrix::from_outer(x, 1.0 / double(x.cols())); }

Matrix gaussian_features(const SymMatrix& k, int cols, RngStream& rng) {
  Matrix l = cholesky(k.mat());
  Matrix xi(k.dim(), cols);
  for (auto& v : xi.vec()) v = rng.normal();
  return matmul(l, xi);
}

}  // namespace

PriorSample dwp_prior_sample(const Matrix& x, const std::vector<int>& widths,
                             const std::vector<kern::KernelConfig>& layer_kernels,
                             const kern::KernelConfig& out_kernel, int out_cols,
                             RngStream& rng) {
  if (layer_kernels.size() != widths.size())
    throw ShapeMismatch("one kernel config per layer required");
  PriorSample out;
  SymMatrix g = gram0(x);
  const int p = x.rows();
  for (size_t l = 0; l < widths.size(); ++l) {
    const int nu = widths[l];
    SymMatrix k = kern::sqexp_from_gram(g, layer_kernels[l]);
    Matrix ls = cholesky(scale(k.mat(), 1.0 / double(nu)));
    LowerTrapezoid a = dist::bartlett_sample(p, nu, rng);
    Matrix lambda = matmul(ls, a.mat());
    g = SymMatrix::from_outer(lambda, 1.0);
    out.grams.push_back(g);
  }
  out.f_out = gaussian_features(kern::sqexp_from_gram(g, out_kernel), out_cols, rng);
  return out;
}

PriorSample dgp_prior_sample(const Matrix& x, const std::vector<int>& widths,
                             const std::vector<kern::KernelConfig>& layer_kernels,
                             const kern::KernelConfig& out_kernel, int out_cols,
                             RngStream& rng) {
  if (layer_kernels.size() != widths.size())
    throw ShapeMismatch("one kernel config per layer required");
  PriorSample out;
  SymMatrix g = gram0(x);
  for (size_t l = 0; l < widths.size(); ++l) {
    const int nu = widths[l];
    SymMatrix k = kern::sqexp_from_gram(g, layer_kernels[l]);
    Matrix f = gaussian_features(k, nu, rng);
    g = SymMatrix::from_outer(f, 1.0 / double(nu));
    out.grams.push_back(g);
  }
  out.f_out = gaussian_features(kern::sqexp_from_gram(g, out_kernel), out_cols, rng);
  return out;
}

// --- checkpoints ------------------------------------------------------------

void save_checkpoint(const DwpModel& model, const std::string& path) {
  nlohmann::json j;
  j["format"] = "dwp-checkpoint-v1";
  j["config"] = {{"depth", model.cfg.depth},
                 {"widths", model.cfg.widths},
                 {"inducing", model.cfg.inducing},
                 {"batch", model.cfg.batch},
                 {"train_samples", model.cfg.train_samples},
                 {"eval_samples", model.cfg.eval_samples},
                 {"input_dim", model.cfg.input_dim},
                 {"output_dim", model.cfg.output_dim}};
  j["param_order"] = model.params.names();
  nlohmann::json params = nlohmann::json::object();
  for (const auto& name : model.params.names()) {
    const Matrix& m = model.params.at(name);
    params[name] = {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.vec()}};
  }
  j["params"] = std::move(params);
  std::ofstream f(path);
  if (!f) throw Error("cannot write checkpoint to " + path);
  f << j.dump(2) << "\n";
}

DwpModel load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read checkpoint from " + path);
  nlohmann::json j;
  f >> j;
  if (j.value("format", "") != "dwp-checkpoint-v1")
    throw Error("unrecognized checkpoint format");

  DwpModel model;
  const auto& c = j.at("config");
  model.cfg.depth = c.at("depth").get<int>();
  model.cfg.widths = c.at("widths").get<std::vector<int>>();
  model.cfg.inducing = c.at("inducing").get<int>();
  model.cfg.batch = c.at("batch").get<int>();
  model.cfg.train_samples = c.at("train_samples").get<int>();
  model.cfg.eval_samples = c.at("eval_samples").get<int>();
  model.cfg.input_dim = c.at("input_dim").get<int>();
  model.cfg.output_dim = c.at("output_dim").get<int>();
  model.cfg.validate();

  for (const auto& name : j.at("param_order").get<std::vector<std::string>>()) {
    const auto& pj = j.at("params").at(name);
    Matrix m(pj.at("rows").get<int>(), pj.at("cols").get<int>(),
             pj.at("data").get<std::vector<double>>());
    model.params.add(name, std::move(m));
  }
  return model;
}

}  // namespace dwp::model
