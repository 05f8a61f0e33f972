#include <cmath>

#include "dwp/inference.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dwp::infer {

namespace {

struct SampleOut {
  double loglik = 0.0;
  std::vector<double> kl;
  std::vector<Matrix> grads;
};

SampleOut one_sample(const model::DwpModel& m, const Matrix& xb, const Matrix& yb, long n_total,
                     const ElboOptions& opts, RngStream rng) {
  ad::Tape tape;
  auto leaves = m.bind(tape);
  auto ev = m.elbo_sample_vars(tape, leaves, xb, yb, n_total, opts.anneal, opts.stl, rng);

  SampleOut out;
  out.loglik = tape.value(ev.loglik)(0, 0);
  out.kl.reserve(ev.kl.size());
  for (auto k : ev.kl) out.kl.push_back(tape.value(k)(0, 0));
  if (opts.want_grads) {
    tape.backward(ev.objective);
    out.grads.reserve(leaves.size());
    for (auto v : leaves) out.grads.push_back(tape.adjoint(v));
  }
  return out;
}

}  // namespace

ElboResult elbo_batch(const model::DwpModel& m, const Matrix& xb, const Matrix& yb, long n_total,
                      int s, RngStream& rng, const ElboOptions& opts) {
  if (s < 1) throw DomainError("elbo_batch requires at least one sample");

  std::vector<RngStream> streams;
  streams.reserve(s);
  for (int i = 0; i < s; ++i) streams.push_back(rng.split());

  std::vector<SampleOut> outs(s);
#ifdef _OPENMP
  if (opts.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < s; ++i) outs[i] = one_sample(m, xb, yb, n_total, opts, streams[i]);
  } else {
    for (int i = 0; i < s; ++i) outs[i] = one_sample(m, xb, yb, n_total, opts, streams[i]);
  }
#else
  for (int i = 0; i < s; ++i) outs[i] = one_sample(m, xb, yb, n_total, opts, streams[i]);
#endif

  // Ordered reduction: identical results for any thread count.
  ElboResult result;
  result.estimate.kl_terms.assign(outs[0].kl.size(), 0.0);
  if (opts.want_grads) {
    result.grads.reserve(outs[0].grads.size());
    for (const auto& g : outs[0].grads) result.grads.push_back(Matrix::zeros(g.rows(), g.cols()));
  }
  for (int i = 0; i < s; ++i) {
    result.estimate.loglik_term += outs[i].loglik;
    for (size_t k = 0; k < outs[i].kl.size(); ++k) result.estimate.kl_terms[k] += outs[i].kl[k];
    if (opts.want_grads)
      for (size_t p = 0; p < outs[i].grads.size(); ++p)
        add_in_place(result.grads[p], outs[i].grads[p]);
  }
  const double inv = 1.0 / double(s);
  result.estimate.loglik_term *= inv;
  for (auto& k : result.estimate.kl_terms) {
    k *= inv;
    result.estimate.total += k;
  }
  result.estimate.total += result.estimate.loglik_term;
  if (opts.want_grads)
    for (auto& g : result.grads)
      for (auto& x : g.vec()) x *= inv;
  return result;
}

double gaussian_mixture_loglik(const std::vector<double>& means, const std::vector<double>& vars,
                               double y) {
  if (means.empty() || means.size() != vars.size())
    throw ShapeMismatch("gaussian_mixture_loglik: component mismatch");
  constexpr double kLogTwoPi = 1.8378770664093454836;
  const size_t s = means.size();
  std::vector<double> lls(s);
  double max_ll = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < s; ++i) {
    const double d = y - means[i];
    lls[i] = -0.5 * kLogTwoPi - 0.5 * std::log(vars[i]) - 0.5 * d * d / vars[i];
    max_ll = std::max(max_ll, lls[i]);
  }
  double acc = 0.0;
  for (size_t i = 0; i < s; ++i) acc += std::exp(lls[i] - max_ll);
  return max_ll + std::log(acc) - std::log(double(s));
}

double test_loglik(const model::DwpModel& m, const Matrix& x_test, const Matrix& y_test, int s,
                   RngStream& rng, double target_std) {
  if (s < 1) throw DomainError("test_loglik requires at least one sample");
  if (y_test.rows() != x_test.rows()) throw ShapeMismatch("test targets do not match inputs");
  const int n = x_test.rows();

  std::vector<RngStream> streams;
  streams.reserve(s);
  for (int i = 0; i < s; ++i) streams.push_back(rng.split());

  std::vector<model::DwpModel::PredictiveDraw> draws(s);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < s; ++i) {
    RngStream stream = streams[i];
    draws[i] = m.predict_sample(x_test, stream);
  }

  double total = 0.0;
  std::vector<double> means(s), vars(s);
  for (int p = 0; p < n; ++p) {
    for (int i = 0; i < s; ++i) {
      means[i] = draws[i].mean(p, 0);
      vars[i] = draws[i].gp_var(p, 0) + draws[i].noise_var;
    }
    total += gaussian_mixture_loglik(means, vars, y_test(p, 0));
  }
  return total / double(n) - std::log(target_std);
}

}  // namespace dwp::infer
