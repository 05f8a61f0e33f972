#pragma once

#include <functional>
#include <vector>

#include "dwp/ad/tape.hpp"

namespace dwp::ad {

// A scalar objective built fresh on a tape from parameter leaves. The builder
// must be deterministic in its inputs (fix any sampling noise by copying an
// RngStream into the closure) so that central differences see a smooth
// function.
using TapeFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckReport {
  double max_rel_err = 0.0;
  int worst_param = -1;
  int worst_coord = -1;
};

// Max over coordinates of |analytic - central difference| / (|analytic| + 1e-8).
GradCheckReport gradcheck(const TapeFn& f, const std::vector<Matrix>& point, double h);

// Per-coordinate best over several steps: truncation error dominates large
// steps and roundoff small ones, so a correct gradient matches at least one.
GradCheckReport gradcheck(const TapeFn& f, const std::vector<Matrix>& point,
                          const std::vector<double>& steps);

double eval_scalar(const TapeFn& f, const std::vector<Matrix>& point);
std::vector<Matrix> eval_gradients(const TapeFn& f, const std::vector<Matrix>& point,
                                   double* value = nullptr);

}  // namespace dwp::ad
