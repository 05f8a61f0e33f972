#pragma once

#include <map>
#include <string>
#include <vector>

#include "dwp/ad/tape.hpp"
#include "dwp/distributions.hpp"
#include "dwp/kernel.hpp"
#include "dwp/matrix.hpp"
#include "dwp/rng.hpp"

namespace dwp::model {

struct ModelConfig {
  int depth = 2;             // number of Wishart layers
  std::vector<int> widths;   // nu per layer; filled with input_dim when empty
  int inducing = 50;         // P_i
  int batch = 256;
  int train_samples = 10;
  int eval_samples = 100;
  int input_dim = 0;
  int output_dim = 1;

  void finalize(int data_dim);
  void validate() const;
};

// Sticking-the-landing flags: stop gradients through the named variational
// parameter groups inside the approximate-posterior density evaluation. The
// sampling path is never stopped.
struct StlFlags {
  bool alpha = true;
  bool beta = true;
  bool mu = true;
  bool sigma = true;
};

// Ordered name -> value map for every learnable array in the model.
class ParamStore {
 public:
  void add(const std::string& name, Matrix value);
  Matrix& at(const std::string& name);
  const Matrix& at(const std::string& name) const;
  bool has(const std::string& name) const { return values_.count(name) != 0; }
  const std::vector<std::string>& names() const { return order_; }
  size_t scalar_count() const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, Matrix> values_;
};

class DwpModel {
 public:
  ModelConfig cfg;
  ParamStore params;

  // Builds a model with q matched to the prior: V from the mean-propagated
  // prior scale, logit(p) = 0, Bartlett parameters at their prior values,
  // inducing inputs on a seeded subset of the training rows.
  static DwpModel init(ModelConfig cfg, const Matrix& x_train, RngStream& rng);

  std::vector<ad::Var> bind(ad::Tape& tape) const;

  struct ElboVars {
    ad::Var objective;          // loglik + anneal * sum(kl)
    ad::Var loglik;             // likelihood term scaled to the full dataset
    std::vector<ad::Var> kl;    // per Wishart layer, then the GP output layer
  };

  // One reparameterized ELBO sample over a minibatch, built on the caller's
  // tape from bound parameter leaves.
  ElboVars elbo_sample_vars(ad::Tape& tape, const std::vector<ad::Var>& leaves,
                            const Matrix& xb, const Matrix& yb, long n_total,
                            double anneal, const StlFlags& stl, RngStream& rng) const;

  // One posterior predictive draw at the given inputs (no gradients):
  // returns the predictive mean column and the conditional variance column
  // (GP conditional variance; observation noise is reported separately).
  struct PredictiveDraw {
    Matrix mean;      // P_t x 1
    Matrix gp_var;    // P_t x 1
    double noise_var; // sigma^2
  };
  PredictiveDraw predict_sample(const Matrix& x, RngStream& rng) const;

  int layer_width(int layer) const { return cfg.widths.at(layer); }

 private:
  friend struct ElboBuilder;
};

// Convex scale combination of Eq-20 form: (1-p)/nu K + p V V^T.
SymMatrix build_scale(const SymMatrix& k, int nu, const Matrix& v, double p);

// Full-covariance prior samplers used by the equivalence tests and the
// sample-prior command. Kernel configs: layer 1..L then the output GP layer.
struct PriorSample {
  std::vector<SymMatrix> grams;  // G_1 .. G_L
  Matrix f_out;                  // P x output columns
};

PriorSample dwp_prior_sample(const Matrix& x, const std::vector<int>& widths,
                             const std::vector<kern::KernelConfig>& layer_kernels,
                             const kern::KernelConfig& out_kernel, int out_cols,
                             RngStream& rng);

PriorSample dgp_prior_sample(const Matrix& x, const std::vector<int>& widths,
                             const std::vector<kern::KernelConfig>& layer_kernels,
                             const kern::KernelConfig& out_kernel, int out_cols,
                             RngStream& rng);

// Checkpoint container: JSON with config and a flat name -> array map.
void save_checkpoint(const DwpModel& model, const std::string& path);
DwpModel load_checkpoint(const std::string& path);

}  // namespace dwp::model
