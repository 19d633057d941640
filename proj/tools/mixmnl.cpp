// Copyright 2026 The mixmnl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: generate, learn, evaluate, sweep, check, fig1.
//
// Exit codes: 0 success, 2 validation error, 3 numerical-stage failure.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mixmnl/mixmnl.hpp"

namespace {

using mixmnl::json;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
  } else {
    mixmnl::write_file(out_path, content);
  }
}

struct GenerateArgs {
  int n = 30;
  double dbar = 8.0;
  int r = 2;
  int ell = 10;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  double w_lo = 1.0;
  double w_hi = 2.0;
  std::string out;
};

void run_generate(const GenerateArgs& a) {
  mixmnl::Rng rng(a.seed);
  mixmnl::Dataset d;
  d.graph = mixmnl::erdos_renyi(a.n, a.dbar, rng);
  d.ground_truth = mixmnl::random_uniform_model(a.n, a.r, a.w_lo, a.w_hi, rng);
  d.batch = mixmnl::sample_batch(*d.ground_truth, d.graph, a.ell, a.samples, rng);
  emit(a.out, mixmnl::dump(mixmnl::dataset_to_json(d), /*pretty=*/false));
}

struct LearnArgs {
  std::string dataset;
  std::string out;
  int r = 2;
  std::optional<int> t1;
  std::optional<int> t2;
  std::uint64_t seed = 1;
  bool exact_moments = false;
  bool dump_intermediates = false;
};

void run_learn(const LearnArgs& a) {
  const mixmnl::Dataset d = mixmnl::load_dataset(a.dataset);
  mixmnl::LearnConfig cfg;
  cfg.r = a.r;
  cfg.t1 = a.t1;
  cfg.t2 = a.t2;
  cfg.seed = a.seed;
  if (a.exact_moments) {
    if (!d.ground_truth) throw mixmnl::ValidationError("--exact-moments needs a dataset with ground_truth");
    if (d.ground_truth->num_components() != a.r)
      throw mixmnl::ValidationError("--exact-moments needs --r equal to the ground-truth component count");
    cfg.exact_moments_from = &*d.ground_truth;
  }
  const mixmnl::ComponentEstimates est = mixmnl::learn_mixed_mnl(d.batch, d.graph, cfg);
  json out = mixmnl::estimates_to_json(est, a.dump_intermediates);
  if (d.ground_truth && d.ground_truth->num_components() == a.r)
    out["matching"] = mixmnl::match_to_json(mixmnl::match_components(est, *d.ground_truth));
  emit(a.out, mixmnl::dump(out));
}

struct EvaluateArgs {
  std::string dataset;
  std::string results;
  std::string out;
};

void run_evaluate(const EvaluateArgs& a) {
  const mixmnl::Dataset d = mixmnl::load_dataset(a.dataset);
  if (!d.ground_truth) throw mixmnl::ValidationError("evaluate needs a dataset with ground_truth");
  const auto [q_hat, w_hat] =
      mixmnl::estimates_from_json(mixmnl::parse_json_text(mixmnl::read_file(a.results), a.results));
  const mixmnl::MatchResult match = mixmnl::match_components(q_hat, w_hat, *d.ground_truth);
  const mixmnl::ConditionReport cond = mixmnl::check_conditions(*d.ground_truth, d.graph, d.batch.ell);
  json out = {{"matching", mixmnl::match_to_json(match)},
              {"samples", d.batch.size()},
              {"conditions", mixmnl::conditions_to_json(cond)}};
  emit(a.out, mixmnl::dump(out));
}

struct SweepArgs {
  mixmnl::SweepConfig cfg;
  std::vector<std::size_t> samples{2000, 20000, 200000};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string out;
};

void run_sweep(const SweepArgs& a) {
  emit(a.out, mixmnl::sweep_to_csv(mixmnl::run_sweep(a.cfg, a.samples, a.seeds)));
}

struct CheckArgs {
  std::string dataset;
  int n = 30;
  double dbar = 8.0;
  int r = 2;
  int ell = 10;
  std::uint64_t seed = 1;
  double delta = 0.1;
  double epsilon = 0.1;
  std::string out;
};

void run_check(const CheckArgs& a) {
  mixmnl::ComparisonGraph g;
  mixmnl::MixedMNLModel m;
  int ell = a.ell;
  if (!a.dataset.empty()) {
    mixmnl::Dataset d = mixmnl::load_dataset(a.dataset);
    if (!d.ground_truth) throw mixmnl::ValidationError("check needs a dataset with ground_truth");
    g = d.graph;
    m = *d.ground_truth;
    ell = d.batch.ell;
  } else {
    mixmnl::Rng rng(a.seed);
    g = mixmnl::erdos_renyi(a.n, a.dbar, rng);
    m = mixmnl::random_uniform_model(a.n, a.r, 1.0, 2.0, rng);
  }
  emit(a.out, mixmnl::dump(mixmnl::conditions_to_json(mixmnl::check_conditions(m, g, ell, a.delta, a.epsilon))));
}

void run_fig1(const std::string& out_path) {
  const mixmnl::Fig1Marginals f = mixmnl::fig1_pairwise_marginals();
  json out = {{"items", {"a", "b", "c", "d"}},
              {"case1", mixmnl::matrix_rows_to_json(f.case1)},
              {"case2", mixmnl::matrix_rows_to_json(f.case2)},
              {"identical", f.case1 == f.case2}};
  emit(out_path, mixmnl::dump(out));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn mixed MNL models from pairwise comparisons"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a synthetic dataset with ground truth");
  generate->add_option("--n", gen.n, "Number of items")->check(CLI::PositiveNumber);
  generate->add_option("--dbar", gen.dbar, "Mean degree of the Erdos-Renyi comparison graph");
  generate->add_option("--r", gen.r, "Number of mixture components")->check(CLI::PositiveNumber);
  generate->add_option("--ell", gen.ell, "Pairs per observation")->check(CLI::PositiveNumber);
  generate->add_option("--samples", gen.samples, "Number of observations");
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--wmin", gen.w_lo, "Lower end of the weight range");
  generate->add_option("--wmax", gen.w_hi, "Upper end of the weight range");
  generate->add_option("--out", gen.out, "Output dataset JSON (stdout if omitted)");

  LearnArgs learn;
  auto* learn_cmd = app.add_subcommand("learn", "Estimate mixture weights and MNL parameters");
  learn_cmd->add_option("--dataset", learn.dataset, "Dataset JSON")->required();
  learn_cmd->add_option("--out", learn.out, "Output results JSON (stdout if omitted)");
  learn_cmd->add_option("--r", learn.r, "Number of mixture components")->check(CLI::PositiveNumber);
  learn_cmd->add_option("--t1", learn.t1, "Alternating-minimization iterations");
  learn_cmd->add_option("--t2", learn.t2, "RankCentrality power iterations");
  learn_cmd->add_option("--seed", learn.seed, "Seed for the tensor power method");
  learn_cmd->add_flag("--exact-moments", learn.exact_moments, "Use exact moments of the ground truth (debug)");
  learn_cmd->add_flag("--dump-intermediates", learn.dump_intermediates, "Include intermediate quantities");

  EvaluateArgs eval;
  auto* evaluate = app.add_subcommand("evaluate", "Compare learned estimates with the ground truth");
  evaluate->add_option("--dataset", eval.dataset, "Dataset JSON with ground_truth")->required();
  evaluate->add_option("--results", eval.results, "Results JSON from learn")->required();
  evaluate->add_option("--out", eval.out, "Output JSON (stdout if omitted)");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Error versus sample size on synthetic instances");
  sweep->add_option("--n", sw.cfg.n, "Number of items");
  sweep->add_option("--dbar", sw.cfg.dbar, "Mean degree");
  sweep->add_option("--r", sw.cfg.r, "Number of mixture components");
  sweep->add_option("--ell", sw.cfg.ell, "Pairs per observation");
  sweep->add_option("--samples", sw.samples, "Comma-separated sample sizes")->delimiter(',');
  sweep->add_option("--seeds", sw.seeds, "Comma-separated instance seeds")->delimiter(',');
  sweep->add_option("--seed", sw.cfg.base_seed, "Base seed");
  sweep->add_option("--t1", sw.cfg.t1, "Alternating-minimization iterations");
  sweep->add_option("--t2", sw.cfg.t2, "RankCentrality power iterations");
  sweep->add_option("--workers", sw.cfg.workers, "Parallel cells (0: hardware concurrency)");
  sweep->add_option("--out", sw.out, "Output CSV (stdout if omitted)");

  CheckArgs chk;
  auto* check = app.add_subcommand("check", "Report learnability conditions and sample-size expression");
  check->add_option("--dataset", chk.dataset, "Dataset JSON with ground_truth");
  check->add_option("--n", chk.n, "Items (when generating)");
  check->add_option("--dbar", chk.dbar, "Mean degree (when generating)");
  check->add_option("--r", chk.r, "Components (when generating)");
  check->add_option("--ell", chk.ell, "Pairs per observation (when generating)");
  check->add_option("--seed", chk.seed, "Random seed (when generating)");
  check->add_option("--delta", chk.delta, "Failure probability in the sample-size expression");
  check->add_option("--epsilon", chk.epsilon, "Target error in the sample-size expression");
  check->add_option("--out", chk.out, "Output JSON (stdout if omitted)");

  std::string fig1_out;
  auto* fig1 = app.add_subcommand("fig1", "Pairwise marginals of two indistinguishable ranking mixtures");
  fig1->add_option("--out", fig1_out, "Output JSON (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*generate) run_generate(gen);
    if (*learn_cmd) run_learn(learn);
    if (*evaluate) run_evaluate(eval);
    if (*sweep) run_sweep(sw);
    if (*check) run_check(chk);
    if (*fig1) run_fig1(fig1_out);
  } catch (const mixmnl::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const mixmnl::NumericalError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
