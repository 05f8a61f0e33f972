#pragma once

#include <functional>
#include <vector>

#include "dwp/model.hpp"

namespace dwp::infer {

// One doubly-stochastic ELBO estimate with its per-term breakdown. The
// likelihood term is scaled to the full dataset; kl entries hold the
// log P - log Q contribution of each layer (Wishart layers, then the GP
// layer). total = loglik_term + sum(kl_terms), with no annealing applied.
struct ElboEstimate {
  double total = 0.0;
  double loglik_term = 0.0;
  std::vector<double> kl_terms;
};

struct ElboOptions {
  double anneal = 1.0;  // multiplies the KL terms in the optimized objective
  model::StlFlags stl;
  bool want_grads = true;
  bool parallel = true;  // evaluate Monte Carlo samples on parallel tapes
};

struct ElboResult {
  ElboEstimate estimate;
  // Gradient of [loglik + anneal * sum(kl)] w.r.t. each parameter, in
  // ParamStore order, averaged over samples with a fixed reduction order.
  std::vector<Matrix> grads;
};

// Averages `s` reparameterized samples. Each sample owns a tape and a child
// RNG stream; results reduce in sample order so the estimate is independent
// of thread count.
ElboResult elbo_batch(const model::DwpModel& m, const Matrix& xb, const Matrix& yb,
                      long n_total, int s, RngStream& rng, const ElboOptions& opts = {});

// log [ (1/S) sum_s N(y; mean_s, var_s) ] via logsumexp.
double gaussian_mixture_loglik(const std::vector<double>& means, const std::vector<double>& vars,
                               double y);

// Mixture predictive log-likelihood: per point, logsumexp over `s` posterior
// samples of the Gaussian predictive density, minus log s; averaged over
// points. `target_std` converts back to the original target units.
double test_loglik(const model::DwpModel& m, const Matrix& x_test, const Matrix& y_test, int s,
                   RngStream& rng, double target_std = 1.0);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m, v;
  long t = 0;
  static AdamState init(const model::ParamStore& params);
};

// Standard bias-corrected update, minimizing along `grads`. Throws
// NonFiniteGradient naming the offending parameter before touching any state.
void adam_step(model::ParamStore& params, const std::vector<Matrix>& grads, AdamState& state,
               double lr, const AdamConfig& cfg = {});

struct TrainSchedule {
  long steps = 20000;
  double lr_initial = 1e-2;
  long lr_drop_step = 10000;
  double lr_final = 1e-3;
  long kl_anneal_steps = 1000;
  AdamConfig adam;
};

double kl_anneal_factor(long step, const TrainSchedule& sched);
double learning_rate(long step, const TrainSchedule& sched);

struct StepRecord {
  long step = 0;
  double elbo = 0.0;
  double loglik_term = 0.0;
  std::vector<double> kl_terms;
  double lr = 0.0;
  double anneal = 0.0;
};

using StepCallback = std::function<void(const StepRecord&)>;

// Optimizes the model in place; deterministic given the seed. Returns the
// per-step trace. Non-finite losses or gradients abort by throwing, leaving
// the parameters at their last finite state.
std::vector<StepRecord> train(model::DwpModel& m, const Matrix& x, const Matrix& y,
                              const TrainSchedule& sched, RngStream& rng,
                              const StepCallback& callback = nullptr);

}  // namespace dwp::infer
