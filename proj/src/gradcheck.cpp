#include "dwp/ad/gradcheck.hpp"

#include <cmath>
#include <limits>

namespace dwp::ad {

namespace {

std::pair<double, std::vector<Matrix>> run(const TapeFn& f, const std::vector<Matrix>& point,
                                           bool want_grads) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (const auto& m : point) leaves.push_back(tape.leaf(m));
  Var out = f(tape, leaves);
  const double value = tape.value(out)(0, 0);
  std::vector<Matrix> grads;
  if (want_grads) {
    tape.backward(out);
    for (Var v : leaves) grads.push_back(tape.adjoint(v));
  }
  return {value, std::move(grads)};
}

}  // namespace

double eval_scalar(const TapeFn& f, const std::vector<Matrix>& point) {
  return run(f, point, false).first;
}

std::vector<Matrix> eval_gradients(const TapeFn& f, const std::vector<Matrix>& point,
                                   double* value) {
  auto [v, g] = run(f, point, true);
  if (value) *value = v;
  return g;
}

GradCheckReport gradcheck(const TapeFn& f, const std::vector<Matrix>& point,
                          const std::vector<double>& steps) {
  const auto grads = eval_gradients(f, point);
  GradCheckReport report;
  std::vector<Matrix> perturbed = point;
  for (size_t p = 0; p < point.size(); ++p) {
    for (size_t k = 0; k < point[p].size(); ++k) {
      const double orig = point[p].vec()[k];
      const double analytic = grads[p].vec()[k];
      double rel = std::numeric_limits<double>::infinity();
      for (double h : steps) {
        perturbed[p].vec()[k] = orig + h;
        const double fp = eval_scalar(f, perturbed);
        perturbed[p].vec()[k] = orig - h;
        const double fm = eval_scalar(f, perturbed);
        perturbed[p].vec()[k] = orig;
        const double numeric = (fp - fm) / (2.0 * h);
        rel = std::min(rel, std::fabs(analytic - numeric) / (std::fabs(analytic) + 1e-8));
      }
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = int(p);
        report.worst_coord = int(k);
      }
    }
  }
  return report;
}

GradCheckReport gradcheck(const TapeFn& f, const std::vector<Matrix>& point, double h) {
  return gradcheck(f, point, std::vector<double>{h});
}

}  // namespace dwp::ad
