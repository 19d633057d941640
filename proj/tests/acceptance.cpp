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


// Acceptance suite. Prints one PASS/FAIL line per criterion; pass a criterion
// number to run only that one. Exit status is nonzero if any selected
// criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mixmnl/mixmnl.hpp"
#include "test_support.hpp"

namespace mixmnl {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Pinned tolerances.
constexpr double kSigma1MaxFraction = 0.02;
constexpr double kSigma2MinFraction = 0.017;
constexpr double kIncoherenceMax = 15.0;
constexpr double kP1NormCenter = 0.0189;
constexpr double kP1NormHalfWidth = 0.0015;
constexpr double kSeedSecondsMax = 120.0;
constexpr double kExactRecoveryTol = 1e-6;
constexpr double kExactRecoverySecondsMax = 5.0;
constexpr double kStationaryRelTol = 1e-8;
constexpr double kStationaryOracleTol = 1e-10;
constexpr double kStandardErrors = 4.0;
constexpr double kStreamingTol = 1e-12;
constexpr double kAltMinSpectralTol = 1e-6;
constexpr double kRtpmTol = 1e-6;
constexpr double kPilotSlack = 1.1;
constexpr double kSweepSecondsMax = 15.0 * 60.0;
constexpr double kFig1Tol = 1e-15;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Instances shared by criteria 1 and 2: n = 1000, dbar = ceil(ln n), weights
// uniform on [1, 2], r = 2, q = (1/2, 1/2).
struct LargeInstance {
  ComparisonGraph graph;
  MixedMNLModel model;
};

LargeInstance large_instance(std::uint64_t seed) {
  const int n = 1000;
  Rng rng(derive_seed(seed, {1000}));
  LargeInstance inst;
  inst.graph = erdos_renyi(n, std::ceil(std::log(static_cast<double>(n))), rng);
  inst.model = random_uniform_model(n, 2, 1.0, 2.0, rng);
  return inst;
}

Outcome criterion_1() {
  Outcome out{true, ""};
  std::ostringstream detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto start = Clock::now();
    const LargeInstance inst = large_instance(seed);
    const double n_pairs = inst.graph.num_edges();
    const M2Spectrum m2s = m2_spectrum(inst.model, inst.graph);
    const double s1 = m2s.sigma(0) / n_pairs;
    const double s2 = m2s.sigma(1) / n_pairs;
    const double mu = incoherence_of_basis(m2s.u.leftCols(2));
    const double secs = seconds_since(start);
    const bool ok = s1 <= kSigma1MaxFraction && s2 >= kSigma2MinFraction && mu <= kIncoherenceMax &&
                    secs < kSeedSecondsMax;
    out.pass = out.pass && ok;
    detail << " seed" << seed << "[N=" << n_pairs << " s1/N=" << fmt(s1) << " s2/N=" << fmt(s2)
           << " mu=" << fmt(mu) << " t=" << fmt(secs) << "s]";
  }
  out.detail = "sigma1<=0.02N, sigma2>=0.017N, mu<=15:" + detail.str();
  return out;
}

Outcome criterion_2() {
  Outcome out{true, ""};
  std::ostringstream detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LargeInstance inst = large_instance(seed);
    const VectorXd p1 = component_p_vector(inst.model, 0, inst.graph);
    const double v = p1.squaredNorm() / inst.graph.num_edges();
    out.pass = out.pass && std::abs(v - kP1NormCenter) <= kP1NormHalfWidth;
    detail << " seed" << seed << "=" << fmt(v);
  }
  out.detail = "||P1||^2/N in 0.0189 +/- 0.0015:" + detail.str();
  return out;
}

Outcome criterion_3() {
  const auto start = Clock::now();
  const auto g = testing::complete_graph(15);  // N = 105
  int passed = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(derive_seed(seed, {3}));
    const MixedMNLModel m = testing::random_model(15, 3, rng, 1.0, 4.0, 0.2);
    const MatrixXd p = p_matrix(m, g);
    const MixtureMomentsEstimate est = consistency_from_exact(exact_m2(m, g), exact_m3(m, g, 128), 3, rng);
    const MatrixXd cost = [&] {
      MatrixXd c(3, 3);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          c(a, b) = std::max(std::abs(est.q_hat(b) - m.q()(a)), (est.p_hat.col(b) - p.col(a)).cwiseAbs().maxCoeff());
      return c;
    }();
    const std::vector<int> perm = min_cost_assignment(cost);
    double err = 0.0;
    for (int a = 0; a < 3; ++a) err = std::max(err, cost(a, perm[static_cast<std::size_t>(a)]));
    worst = std::max(worst, err);
    if (err <= kExactRecoveryTol) ++passed;
  }
  const double secs = seconds_since(start);
  return {passed == 10 && secs < kExactRecoverySecondsMax,
          std::to_string(passed) + "/10 seeds recover q and P to 1e-6 (worst " + fmt(worst) + "), " + fmt(secs) +
              "s total"};
}

Outcome criterion_4() {
  int passed = 0;
  double worst_rel = 0.0, worst_oracle = 0.0;
  for (int s = 1; s <= 10; ++s) {
    const int n = 20 * s;
    Rng rng(derive_seed(s, {4}));
    const ComparisonGraph g = erdos_renyi(n, 6.0, rng);
    const MixedMNLModel m = testing::random_model(n, 1, rng, 1.0, 3.0);
    const GraphDiagnostics d = diagnostics(g);
    const int t2 = default_power_iterations(m.dynamic_range(), d.d_max, d.d_min, d.spectral_gap, n);
    const VectorXd p = component_p_vector(m, 0, g);
    const RankCentralityResult rc = rank_centrality(g, p, t2);
    const VectorXd oracle = testing::eigen_stationary(build_transition(g, p).to_dense());
    const double rel = (rc.weights - m.weights(0)).norm() / m.weights(0).norm();
    const double gap = (rc.weights - oracle).norm();
    worst_rel = std::max(worst_rel, rel);
    worst_oracle = std::max(worst_oracle, gap);
    if (rel <= kStationaryRelTol && gap <= kStationaryOracleTol) ++passed;
  }
  return {passed == 10, std::to_string(passed) + "/10 graphs (n=20..200): worst relative error " + fmt(worst_rel) +
                            ", worst gap to eigensolve " + fmt(worst_oracle)};
}

Outcome criterion_5() {
  Rng rng(5);
  const auto g = testing::complete_graph(6);  // N = 15
  const MixedMNLModel m = testing::random_model(6, 2, rng);
  const int ell = 3;
  const std::size_t count = 1000000;
  const ObservationBatch batch = sample_batch(m, g, ell, count, rng);
  const MatrixXd est = empirical_s2(batch, {0, count}).matrix;
  const MatrixXd truth = exact_m2(m, g);
  const double scale = second_moment_scale(15, ell);
  double worst_z = 0.0;
  for (int k = 0; k < 15; ++k)
    for (int l = k + 1; l < 15; ++l) {
      const double se = std::sqrt((scale - truth(k, l) * truth(k, l)) / static_cast<double>(count));
      worst_z = std::max(worst_z, std::abs(est(k, l) - truth(k, l)) / se);
    }
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd w(15, 3);
  for (int i = 0; i < w.size(); ++i) w.data()[i] = gauss(rng);
  double worst_stream = 0.0;
  for (std::size_t t = 0; t < 100; ++t) {
    Tensor3 got(3);
    accumulate_projected_s3(batch.observations[t], w, got);
    const Tensor3 want = testing::brute_projected_outer(testing::dense(batch.observations[t], 15), w);
    for (std::size_t i = 0; i < got.size(); ++i)
      worst_stream = std::max(worst_stream, std::abs(got.data()[i] - want.data()[i]));
  }
  return {worst_z <= kStandardErrors && worst_stream <= kStreamingTol,
          "S2 worst |z| = " + fmt(worst_z) + " (limit 4), streaming S3 vs triple loop max diff " + fmt(worst_stream)};
}

Outcome criterion_6() {
  Rng rng(6);
  const ComparisonGraph g = erdos_renyi(30, 8.0, rng);
  const MixedMNLModel m = random_uniform_model(30, 2, 1.0, 2.0, rng);
  const MatrixXd m2 = exact_m2(m, g);
  MatrixXd off = m2;
  off.diagonal().setZero();
  const AltMinResult res = matrix_alt_min(off, 2, default_altmin_iterations(off));
  const MatrixXd completed = 0.5 * (res.completed + res.completed.transpose());
  const double altmin_err = Eigen::JacobiSVD<MatrixXd>(completed - m2).singularValues()(0);

  double rtpm_err = 0.0;
  for (int r = 1; r <= 5; ++r) {
    Rng trng(derive_seed(r, {6}));
    const MatrixXd v = testing::random_orthogonal(r, trng);
    std::uniform_real_distribution<double> unit(0.5, 3.0);
    VectorXd lambda(r);
    for (int a = 0; a < r; ++a) lambda(a) = unit(trng);
    Tensor3 t(r);
    for (int a = 0; a < r; ++a) t += Tensor3::rank_one(v.col(a), lambda(a));
    const TensorEigenpairs e = rtpm(t, r, trng);
    for (int b = 0; b < r; ++b) {
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < r; ++a)
        best = std::min(best, std::abs(e.lambda(a) - lambda(b)) + (e.v.col(a) - v.col(b)).norm());
      rtpm_err = std::max(rtpm_err, best);
    }
  }
  return {altmin_err <= kAltMinSpectralTol && rtpm_err <= kRtpmTol,
          "AltMin spectral error " + fmt(altmin_err) + ", RTPM worst error (r<=5) " + fmt(rtpm_err)};
}

struct PilotMedians {
  double q = std::numeric_limits<double>::quiet_NaN();
  double w = std::numeric_limits<double>::quiet_NaN();
};

PilotMedians read_pilot(const std::string& path, std::size_t samples) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open pilot fixture " + path);
  std::string line;
  PilotMedians out;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() >= 6 && cells[0] == "median" && cells[1] == std::to_string(samples)) {
      out.q = std::stod(cells[4]);
      out.w = std::stod(cells[5]);
    }
  }
  return out;
}

Outcome criterion_7() {
  const auto start = Clock::now();
  SweepConfig cfg;  // n = 30, r = 2, dbar = 8, ell = 10, base seed 1
  const std::vector<std::size_t> grid = {2000, 20000, 200000};
  const SweepResult res = run_sweep(cfg, grid, {1, 2, 3, 4, 5});
  const double secs = seconds_since(start);
  bool decreasing = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < res.summary.size(); ++i) {
    const SweepSummary& s = res.summary[i];
    detail << " |S|=" << s.samples << ":q=" << fmt(s.median_q_error) << ",w=" << fmt(s.median_w_error);
    if (i > 0) {
      decreasing = decreasing && s.median_q_error < res.summary[i - 1].median_q_error &&
                   s.median_w_error < res.summary[i - 1].median_w_error;
    }
  }
  const PilotMedians pilot = read_pilot(MIXMNL_FIXTURE_DIR "/pilot_sweep.csv", grid.back());
  const double q_limit = kPilotSlack * pilot.q;
  const double w_limit = kPilotSlack * pilot.w;
  const SweepSummary& last = res.summary.back();
  const bool within = last.median_q_error <= q_limit && last.median_w_error <= w_limit;
  detail << "; strictly decreasing=" << (decreasing ? "yes" : "no") << "; limits at 2e5 q<=" << fmt(q_limit)
         << " w<=" << fmt(w_limit) << (within ? " met" : " missed") << "; " << fmt(secs) << "s";
  return {decreasing && within && secs < kSweepSecondsMax, "medians" + detail.str()};
}

Outcome criterion_8() {
  const Fig1Marginals f = fig1_pairwise_marginals();
  const double diff = (f.case1 - f.case2).cwiseAbs().maxCoeff();
  return {f.case1 == f.case2 && diff <= kFig1Tol, "max |case1 - case2| = " + fmt(diff)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_9() {
  const fs::path dir = fs::temp_directory_path() / "mixmnl_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = MIXMNL_CLI_PATH;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"generate --n 30 --dbar 8 --r 2 --ell 10 --samples 5000 --seed 9 --out ", "data.json"},
      {"learn --dataset " + (dir / "data.json").string() + " --r 2 --seed 9 --dump-intermediates --out ",
       "learn.json"},
      {"evaluate --dataset " + (dir / "data.json").string() + " --results " + (dir / "learn.json").string() +
           " --out ",
       "eval.json"},
      {"sweep --n 20 --dbar 6 --samples 1000,4000 --seeds 1,2 --seed 9 --out ", "sweep.csv"},
      {"check --n 30 --dbar 8 --seed 9 --out ", "check.json"},
      {"fig1 --out ", "fig1.json"},
  };
  int identical = 0;
  std::string first_bad;
  for (const auto& [args, file] : commands) {
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path target = dir / file;
      const std::string cmd = cli + " " + args + target.string();
      if (std::system(cmd.c_str()) != 0) {
        outputs[run] = "<failed>" + std::to_string(run);
        continue;
      }
      outputs[run] = slurp(target);
      // Keep the first run's file so later commands read the same input.
      if (run == 0) fs::copy_file(target, dir / (file + ".first"));
    }
    if (outputs[0] == outputs[1] && !outputs[0].empty()) {
      ++identical;
    } else if (first_bad.empty()) {
      first_bad = file;
    }
  }
  fs::remove_all(dir);
  return {identical == static_cast<int>(commands.size()),
          std::to_string(identical) + "/" + std::to_string(commands.size()) +
              " CLI invocations byte-identical across two runs" + (first_bad.empty() ? "" : " (first mismatch: " + first_bad + ")")};
}

const std::map<int, std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<std::string, std::function<Outcome()>>> table = {
      {1, {"second-moment spectrum and incoherence at n=1000", criterion_1}},
      {2, {"||P1||^2/N constant at n=1000", criterion_2}},
      {3, {"noise-free recovery on K15 with r=3", criterion_3}},
      {4, {"RankCentrality exactness", criterion_4}},
      {5, {"moment estimator unbiasedness and streaming S3", criterion_5}},
      {6, {"noiseless AltMin and RTPM", criterion_6}},
      {7, {"end-to-end error decay with sample size", criterion_7}},
      {8, {"indistinguishable ranking mixtures", criterion_8}},
      {9, {"CLI determinism", criterion_9}},
  };
  return table;
}

}  // namespace
}  // namespace mixmnl

int main(int argc, char** argv) {
  using mixmnl::criteria;
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& [id, _] : criteria()) selected.push_back(id);
  bool all = true;
  for (int id : selected) {
    const auto it = criteria().find(id);
    if (it == criteria().end()) {
      std::printf("FAIL criterion %d: unknown criterion\n", id);
      all = false;
      continue;
    }
    mixmnl::Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, it->second.first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
