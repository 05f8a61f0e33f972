#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dwp/dataset.hpp"
#include "dwp/inference.hpp"
#include "dwp/model.hpp"
#include "dwp/verify.hpp"
#include "dwp/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
  return buf;
}

struct DataFlags {
  std::string path;
  int target_col = -1;
  bool skip_header = false;
  uint64_t split_seed = 0;
  int split_index = 0;
  double train_fraction = 0.9;
  std::string train_idx, test_idx;

  void attach(CLI::App* cmd) {
    cmd->add_option("--data", path, "CSV dataset path")->required();
    cmd->add_option("--target-col", target_col, "target column index (default: last)");
    cmd->add_flag("--skip-header", skip_header, "skip the first CSV row");
    cmd->add_option("--split-seed", split_seed, "seed for the random train/test split");
    cmd->add_option("--split-index", split_index, "split replicate index");
    cmd->add_option("--train-fraction", train_fraction, "train fraction for random splits");
    cmd->add_option("--train-idx", train_idx, "file with train row indices");
    cmd->add_option("--test-idx", test_idx, "file with test row indices");
  }

  dwp::io::DatasetSpec spec() const {
    dwp::io::DatasetSpec s;
    s.path = path;
    s.target_column = target_col;
    s.skip_header = skip_header;
    s.split_seed = split_seed;
    s.split_index = split_index;
    s.train_fraction = train_fraction;
    s.train_index_file = train_idx;
    s.test_index_file = test_idx;
    return s;
  }
};

json data_flags_json(const DataFlags& d) {
  return {{"data", d.path},
          {"target_col", d.target_col},
          {"skip_header", d.skip_header},
          {"split_seed", d.split_seed},
          {"split_index", d.split_index},
          {"train_fraction", d.train_fraction},
          {"train_idx", d.train_idx},
          {"test_idx", d.test_idx}};
}

int cmd_train(const DataFlags& data, dwp::model::ModelConfig cfg, dwp::infer::TrainSchedule sched,
              uint64_t seed, const std::string& out_dir, int record_samples) {
  using namespace dwp;
  const auto t_start = std::chrono::steady_clock::now();

  io::Dataset full = io::load_csv(data.path, data.target_col, data.skip_header);
  io::Split split = io::split_dataset(full, data.spec());
  io::Standardizer stats = io::Standardizer::fit(split.train);
  io::Dataset train_std = stats.apply(split.train);
  io::Dataset test_std = stats.apply(split.test);

  fs::create_directories(out_dir);

  RngStream rng(seed);
  RngStream init_rng = rng.split();
  RngStream train_rng = rng.split();
  RngStream record_rng = rng.split();

  model::DwpModel m = model::DwpModel::init(cfg, train_std.x, init_rng);

  std::ofstream metrics(out_dir + "/metrics.jsonl");
  auto callback = [&](const infer::StepRecord& r) {
    json line = {{"step", r.step},          {"elbo", r.elbo}, {"loglik_term", r.loglik_term},
                 {"kl_per_layer", r.kl_terms}, {"lr", r.lr},  {"anneal", r.anneal}};
    metrics << line.dump() << "\n";
    if (r.step % 500 == 0)
      std::cerr << "step " << r.step << " elbo/N " << r.elbo / train_std.rows() << "\n";
  };

  try {
    infer::train(m, train_std.x, train_std.y, sched, train_rng, callback);
  } catch (const Error&) {
    model::save_checkpoint(m, out_dir + "/checkpoint.abort.json");
    metrics.flush();
    throw;
  }
  metrics.flush();

  model::save_checkpoint(m, out_dir + "/checkpoint.json");

  // Final metrics: full-train ELBO per datapoint at anneal 1, test LL in
  // the original target units.
  infer::ElboOptions opts;
  opts.want_grads = false;
  auto final_est = infer::elbo_batch(m, train_std.x, train_std.y, train_std.rows(),
                                     record_samples, record_rng, opts);
  const double elbo_per_n = final_est.estimate.total / train_std.rows();
  double test_ll = std::numeric_limits<double>::quiet_NaN();
  if (test_std.rows() > 0)
    test_ll = infer::test_loglik(m, test_std.x, test_std.y, cfg.eval_samples, record_rng,
                                 stats.y_std);

  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  json config = {{"command", "train"},
                 {"dataset", data_flags_json(data)},
                 {"depth", cfg.depth},
                 {"widths", m.cfg.widths},
                 {"inducing", cfg.inducing},
                 {"batch", cfg.batch},
                 {"train_samples", cfg.train_samples},
                 {"eval_samples", cfg.eval_samples},
                 {"steps", sched.steps},
                 {"lr_initial", sched.lr_initial},
                 {"lr_drop_step", sched.lr_drop_step},
                 {"lr_final", sched.lr_final},
                 {"kl_anneal_steps", sched.kl_anneal_steps}};
  const std::string hashed = config.dump() + "|" + std::to_string(seed) + "|" +
                             std::to_string(elbo_per_n) + "|" + std::to_string(test_ll) + "|" +
                             dwp::kCodeHash;
  json record = {{"config", config},
                 {"seed", seed},
                 {"final_elbo_per_n", elbo_per_n},
                 {"test_loglik", test_ll},
                 {"wall_time_s", wall_s},
                 {"code_hash", dwp::kCodeHash},
                 {"record_hash", hex64(fnv1a64(hashed))}};
  std::ofstream run(out_dir + "/run.json");
  run << record.dump(2) << "\n";

  std::cout << record.dump(2) << "\n";
  return 0;
}

int cmd_eval(const DataFlags& data, const std::string& checkpoint, uint64_t seed, int samples) {
  using namespace dwp;
  model::DwpModel m = model::load_checkpoint(checkpoint);

  io::Dataset full = io::load_csv(data.path, data.target_col, data.skip_header);
  io::Split split = io::split_dataset(full, data.spec());
  io::Standardizer stats = io::Standardizer::fit(split.train);
  io::Dataset test_std = stats.apply(split.test);

  RngStream rng(seed);
  const int s = samples > 0 ? samples : m.cfg.eval_samples;
  const double ll = infer::test_loglik(m, test_std.x, test_std.y, s, rng, stats.y_std);

  json out = {{"checkpoint", checkpoint}, {"test_points", test_std.rows()},
              {"samples", s},             {"seed", seed},
              {"test_loglik", ll}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_verify(const std::string& suite, uint64_t seed) {
  auto results = dwp::verify::run_suite(suite, seed);
  bool all_pass = true;
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    std::printf("[%s] %-34s measured=%-12.4g tol=%-10.4g (%.0f ms)  %s\n",
                r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured, r.tolerance, r.millis,
                r.detail.c_str());
  }
  std::printf("%zu checks, %s\n", results.size(), all_pass ? "all passed" : "FAILURES present");
  return all_pass ? 0 : 1;
}

int cmd_sample_prior(int depth, int points, int dim, int width, uint64_t seed,
                     const std::string& out_path) {
  using namespace dwp;
  RngStream rng(seed);
  Matrix x(points, dim);
  for (auto& v : x.vec()) v = rng.normal();

  std::vector<int> widths(size_t(depth), width > 0 ? width : dim);
  std::vector<kern::KernelConfig> kcs{size_t(depth), kern::KernelConfig{}};
  auto s = model::dwp_prior_sample(x, widths, kcs, kern::KernelConfig{}, 1, rng);
  const SymMatrix& g = depth > 0 ? s.grams.back() : SymMatrix::from_outer(x, 1.0 / dim);
  g.validate_psd();

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw Error("cannot write " + out_path);
    os = &file;
  }
  for (int i = 0; i < g.dim(); ++i) {
    for (int j = 0; j < g.dim(); ++j) {
      if (j) *os << ",";
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", g(i, j));
      *os << buf;
    }
    *os << "\n";
  }
  std::cerr << "wrote " << g.dim() << "x" << g.dim() << " PSD Gram sample\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deep Wishart process library CLI"};
  app.require_subcommand(1);

  DataFlags train_data, eval_data;
  dwp::model::ModelConfig cfg;
  dwp::infer::TrainSchedule sched;
  uint64_t train_seed = 0, eval_seed = 0, verify_seed = 20240, prior_seed = 0;
  int width = 0;
  std::string out_dir = "runs/latest";
  int record_samples = 50;

  auto* train = app.add_subcommand("train", "fit a deep Wishart process");
  train_data.attach(train);
  train->add_option("--depth", cfg.depth, "number of Wishart layers");
  train->add_option("--inducing", cfg.inducing, "number of inducing points");
  train->add_option("--width", width, "layer width nu (default: input dimension)");
  train->add_option("--batch", cfg.batch, "minibatch size");
  train->add_option("--samples", cfg.train_samples, "Monte Carlo samples per step");
  train->add_option("--eval-samples", cfg.eval_samples, "Monte Carlo samples at evaluation");
  train->add_option("--steps", sched.steps, "gradient steps");
  train->add_option("--lr", sched.lr_initial, "initial learning rate");
  train->add_option("--lr-drop-step", sched.lr_drop_step, "step at which lr drops");
  train->add_option("--lr-final", sched.lr_final, "learning rate after the drop");
  train->add_option("--kl-anneal-steps", sched.kl_anneal_steps, "linear KL annealing steps");
  train->add_option("--seed", train_seed, "run seed");
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--record-samples", record_samples, "samples for the final ELBO record");

  std::string checkpoint;
  int eval_samples = 0;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_data.attach(eval);
  eval->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
  eval->add_option("--samples", eval_samples, "posterior samples (default: checkpoint value)");
  eval->add_option("--seed", eval_seed, "evaluation seed");

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run the numerical verification suites");
  verify->add_option("--suite", suite, "jacobians|density|invariance|gradients|prior-equiv|all")
      ->check(CLI::IsMember(dwp::verify::suite_names()));
  verify->add_option("--seed", verify_seed, "suite seed");

  int prior_depth = 2, prior_points = 4, prior_dim = 4, prior_width = 0;
  std::string prior_out;
  auto* sample = app.add_subcommand("sample-prior", "draw a Gram matrix from the prior");
  sample->add_option("--depth", prior_depth, "number of Wishart layers");
  sample->add_option("--points", prior_points, "number of points P");
  sample->add_option("--dim", prior_dim, "input dimension");
  sample->add_option("--width", prior_width, "layer width (default: dim)");
  sample->add_option("--seed", prior_seed, "seed");
  sample->add_option("--out", prior_out, "output CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      if (width > 0) cfg.widths.assign(size_t(cfg.depth), width);
      return cmd_train(train_data, cfg, sched, train_seed, out_dir, record_samples);
    }
    if (eval->parsed()) return cmd_eval(eval_data, checkpoint, eval_seed, eval_samples);
    if (verify->parsed()) return cmd_verify(suite, verify_seed);
    if (sample->parsed())
      return cmd_sample_prior(prior_depth, prior_points, prior_dim, prior_width, prior_seed,
                              prior_out);
  } catch (const dwp::ParseError& e) {
    nlohmann::json err = {{"error", {{"type", "ParseError"}, {"message", e.what()},
                                     {"row", e.row}, {"col", e.col}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json err = {{"error", {{"type", "Error"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
