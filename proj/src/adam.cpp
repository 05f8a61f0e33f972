#include <cmath>

#include "dwp/inference.hpp"

namespace dwp::infer {

AdamState AdamState::init(const model::ParamStore& params) {
  AdamState st;
  for (const auto& name : params.names()) {
    const Matrix& p = params.at(name);
    st.m.push_back(Matrix::zeros(p.rows(), p.cols()));
    st.v.push_back(Matrix::zeros(p.rows(), p.cols()));
  }
  return st;
}

void adam_step(model::ParamStore& params, const std::vector<Matrix>& grads, AdamState& state,
               double lr, const AdamConfig& cfg) {
  const auto& names = params.names();
  if (grads.size() != names.size() || state.m.size() != names.size())
    throw ShapeMismatch("adam_step: parameter/gradient/state size mismatch");

  for (size_t p = 0; p < names.size(); ++p)
    for (double g : grads[p].vec())
      if (!std::isfinite(g)) throw NonFiniteGradient(names[p]);

  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, double(state.t));
  for (size_t p = 0; p < names.size(); ++p) {
    Matrix& theta = params.at(names[p]);
    const auto& g = grads[p].vec();
    auto& m = state.m[p].vec();
    auto& v = state.v[p].vec();
    for (size_t i = 0; i < g.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      theta.vec()[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

double kl_anneal_factor(long step, const TrainSchedule& sched) {
  if (step < 0) throw DomainError("kl_anneal_factor requires step >= 0");
  if (sched.kl_anneal_steps <= 0) return 1.0;
  return std::min(1.0, double(step) / double(sched.kl_anneal_steps));
}

double learning_rate(long step, const TrainSchedule& sched) {
  return step < sched.lr_drop_step ? sched.lr_initial : sched.lr_final;
}

}  // namespace dwp::infer
