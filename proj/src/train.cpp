#include <cmath>

#include "dwp/inference.hpp"

namespace dwp::infer {

namespace {

// Seeded minibatch without replacement (partial Fisher-Yates).
std::vector<int> minibatch_indices(int n, int batch, RngStream& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  const int take = std::min(batch, n);
  for (int i = 0; i < take; ++i) {
    const int j = i + int(rng.next_u64() % uint64_t(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  return idx;
}

}  // namespace

std::vector<StepRecord> train(model::DwpModel& m, const Matrix& x, const Matrix& y,
                              const TrainSchedule& sched, RngStream& rng,
                              const StepCallback& callback) {
  if (x.rows() != y.rows()) throw ShapeMismatch("train: target rows mismatch");
  const int n = x.rows();
  const int batch = std::min(m.cfg.batch, n);

  AdamState adam = AdamState::init(m.params);
  RngStream batch_rng = rng.split();
  RngStream sample_rng = rng.split();

  std::vector<StepRecord> trace;
  trace.reserve(size_t(sched.steps));

  for (long step = 0; step < sched.steps; ++step) {
    const auto idx = minibatch_indices(n, batch, batch_rng);
    Matrix xb(int(idx.size()), x.cols()), yb(int(idx.size()), y.cols());
    for (size_t r = 0; r < idx.size(); ++r) {
      for (int c = 0; c < x.cols(); ++c) xb(int(r), c) = x(idx[r], c);
      for (int c = 0; c < y.cols(); ++c) yb(int(r), c) = y(idx[r], c);
    }

    ElboOptions opts;
    opts.anneal = kl_anneal_factor(step, sched);
    const double lr = learning_rate(step, sched);

    ElboResult res = elbo_batch(m, xb, yb, n, m.cfg.train_samples, sample_rng, opts);
    if (!std::isfinite(res.estimate.total))
      throw Error("non-finite ELBO at step " + std::to_string(step));

    // Ascend the ELBO: Adam minimizes, so feed the negated gradient. A
    // non-finite gradient throws before any state is touched, leaving the
    // parameters at their last finite values.
    for (auto& g : res.grads)
      for (auto& v : g.vec()) v = -v;
    adam_step(m.params, res.grads, adam, lr, sched.adam);

    StepRecord rec;
    rec.step = step;
    rec.elbo = res.estimate.total;
    rec.loglik_term = res.estimate.loglik_term;
    rec.kl_terms = res.estimate.kl_terms;
    rec.lr = lr;
    rec.anneal = opts.anneal;
    if (callback) callback(rec);
    trace.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace dwp::infer
