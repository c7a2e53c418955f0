// End-to-end gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "svgd/baselines.hpp"
#include "svgd/dataio.hpp"
#include "svgd/diagnostics.hpp"
#include "svgd/kernels.hpp"
#include "svgd/ksd.hpp"
#include "svgd/svgd.hpp"
#include "svgd/targets.hpp"

using namespace svgd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

bool run_criterion(int id, double budget_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_seconds;
  const bool pass = o.pass && in_time;
  std::printf("criterion %d: %s  %s  [%.2f s, budget %.0f s%s]\n", id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
              budget_seconds, in_time ? "" : ", over budget");
  std::fflush(stdout);
  return pass;
}

VectorField scalar_field(std::function<double(double)> f, std::function<double(double)> df) {
  return {[f](std::span<const double> x, std::span<double> out) { out[0] = f(x[0]); },
          [df](std::span<const double> x) { return df(x[0]); }};
}

struct BlrProblem {
  StandardizedSplit split;
  Matrix train_design;
  Matrix test_design;
};

BlrProblem synthetic_blr(std::size_t n, std::size_t d, double w_norm, std::uint64_t data_seed) {
  RngStream rng(data_seed, 0x77);
  std::vector<double> w(d);
  for (double& v : w) v = rng.normal();
  const double len = norm(w);
  for (double& v : w) v *= w_norm / len;
  const auto data = synth_logistic(n, w, 0.0, data_seed);
  auto [train, test] = train_test_split(data, 0.2, data_seed);
  auto split = standardize(train, test);
  Matrix train_design = append_intercept(split.train.features);
  Matrix test_design = append_intercept(split.test.features);
  return {std::move(split), std::move(train_design), std::move(test_design)};
}

// ---- 1 ---------------------------------------------------------------------

Outcome single_particle_is_map() {
  const std::size_t iters = 200;
  const PolynomialDecay sched{0.05, 0.55, 1.0};
  std::size_t mismatches = 0;
  std::size_t compared = 0;

  auto compare = [&](const TargetDensity& target, std::span<const double> x0, std::uint64_t seed) {
    SvgdConfig cfg;
    cfg.iterations = iters;
    cfg.schedule = sched;
    cfg.seed = seed;
    cfg.record_every = 1;
    const auto res = run_svgd(cfg, target, ParticleEnsemble(1, x0.size(), {x0.begin(), x0.end()}));
    const auto traj = map_gradient_ascent(x0, target, sched, iters, seed);
    if (res.snapshots.size() != traj.size()) {
      ++mismatches;
      return;
    }
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const auto x = res.snapshots[t].ensemble.particle(0);
      ++compared;
      if (!std::equal(x.begin(), x.end(), traj[t].begin(), traj[t].end())) ++mismatches;
    }
  };

  const auto gmm = GaussianMixture::toy_bimodal();
  const std::vector<double> g0{-1.3};
  compare(gmm, g0, 1);

  const auto prob = synthetic_blr(400, 3, 2.0, 4);
  const BlrPosterior post(prob.train_design, prob.split.train.labels, GammaPrior{}, 20);
  RngStream rng(9);
  std::vector<double> b0(post.dim());
  post.sample_prior(rng, b0);
  compare(post, b0, 11);

  return {mismatches == 0, std::to_string(compared) + " states compared bitwise (GMM, minibatch BLR), " +
                               std::to_string(mismatches) + " mismatches"};
}

// ---- 2 ---------------------------------------------------------------------

Outcome kl_checks() {
  const Gaussian1D q{0.0, 1.0};
  const auto shifted = GaussianMixture::isotropic(1, 1.0, 1.0);
  const auto mixture = GaussianMixture::toy_bimodal();
  const ScalarField constant{[](double) { return 1.0; }, [](double) { return 0.0; }};
  const ScalarField linear{[](double x) { return x; }, [](double) { return 1.0; }};
  const ScalarField bump{[](double x) { return std::exp(-0.5 * x * x); },
                         [](double x) { return -x * std::exp(-0.5 * x * x); }};
  const KlCheckOptions opt;
  const TheoryCheckReport reports[] = {kl_perturbation_gradient_check(q, shifted, constant, opt),
                                       kl_perturbation_gradient_check(q, shifted, linear, opt),
                                       kl_perturbation_gradient_check(q, mixture, bump, opt)};
  bool pass = std::abs(reports[0].analytic - (-1.0)) < 1e-12 && std::abs(reports[1].analytic) < 1e-12;
  std::string detail = "rel errors";
  for (const auto& r : reports) {
    pass = pass && r.rel_error <= 1e-4;
    detail += " " + num(r.rel_error, 3);
  }
  detail += " (<= 1e-4); analytic " + num(reports[0].analytic) + ", " + num(reports[1].analytic) + ", " +
            num(reports[2].analytic, 6);
  return {pass, detail};
}

// ---- 3 ---------------------------------------------------------------------

Outcome fisher_checks() {
  const Gaussian1D q{0.0, 1.0};
  const Gaussian1D ps[] = {{0.0, 1.0}, {1.0, 1.0}, {0.0, 4.0}};
  const double expected[] = {0.0, -1.0, -9.0 / 16.0};
  const std::size_t m = 100000;
  bool pass = true;
  std::string detail = "identity |err|/SE";
  for (int k = 0; k < 3; ++k) {
    RngStream rng(1, 0x6669 + k);
    const auto r = fisher_identity_check(q, ps[k], m, rng);
    const double z = r.standard_error > 0.0 ? r.abs_error / r.standard_error : (r.abs_error <= 1e-12 ? 0.0 : 1e9);
    pass = pass && std::abs(r.analytic - expected[k]) < 1e-12 && z <= 3.0;
    detail += " " + num(z, 3);
  }
  detail += "; closed form vs MC |err|/SE";
  for (int k = 0; k < 3; ++k) {
    RngStream rng(1, 0x6669 + 3 + k);
    const auto mc = fisher_divergence_monte_carlo(q, ps[k], m, rng);
    const double err = std::abs(fisher_divergence_gaussian(q, ps[k]) - mc.mean);
    const double z = mc.standard_error > 0.0 ? err / mc.standard_error : (err <= 1e-12 ? 0.0 : 1e9);
    pass = pass && z <= 3.0;
    detail += " " + num(z, 3);
  }
  return {pass, detail + " (<= 3, m = 1e5)"};
}

// ---- 4 ---------------------------------------------------------------------

Outcome stein_identity() {
  const auto p = GaussianMixture::isotropic(1, 0.0, 1.0);
  const std::vector<VectorField> fields{
      scalar_field([](double) { return 1.0; }, [](double) { return 0.0; }),
      scalar_field([](double x) { return x; }, [](double) { return 1.0; }),
      scalar_field([](double x) { return x * x; }, [](double x) { return 2.0 * x; })};
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (const auto& phi : fields) {
      RngStream rng(seed, 0x7374);
      const auto r = stein_identity_residual(p, phi, 100000, rng);
      // phi = 1 gives residual -x, whose SE is never zero; guard anyway
      const double z = r.standard_error > 0.0 ? std::abs(r.mean) / r.standard_error : (r.mean == 0.0 ? 0.0 : 1e9);
      worst = std::max(worst, z);
    }
  }
  return {worst <= 3.0, "worst |residual|/SE over 10 seeds x {1, x, x^2} = " + num(worst, 3) + " (<= 3)"};
}

// ---- 5 ---------------------------------------------------------------------

Outcome ksd_sanity() {
  const auto null_p = GaussianMixture::isotropic(1, 0.0, 1.0);
  const auto alt_p = GaussianMixture::isotropic(1, 2.0, 1.0);
  double worst_z = 0.0;
  double worst_ratio = 1e300;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream draw(seed, 0x67656e);
    const auto x = ensemble_from_gaussian(1000, 1, 0.0, 1.0, draw);
    const RbfKernel k(median_bandwidth(x));
    const auto s0 = evaluate_scores(null_p, x, nullptr);
    const auto s1 = evaluate_scores(alt_p, x, nullptr);
    const double u0 = ksd_from_scores(x, s0, k, KsdEstimator::u_statistic).value;
    const double u1 = ksd_from_scores(x, s1, k, KsdEstimator::u_statistic).value;
    RngStream boot(seed, 0x626f6f74);
    const double se = ksd_bootstrap_se(x, s0, k, KsdEstimator::u_statistic, 200, boot);
    worst_z = std::max(worst_z, std::abs(u0) / se);
    worst_ratio = std::min(worst_ratio, std::abs(u1) / std::max(std::abs(u0), 1e-300));
  }
  return {worst_z <= 5.0 && worst_ratio >= 10.0,
          "null worst |U|/SE = " + num(worst_z, 3) + " (<= 5); alternative min |U1|/|U0| = " + num(worst_ratio, 3) +
              " (>= 10)"};
}

// ---- 6 ---------------------------------------------------------------------

ParticleEnsemble gmm_run(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, 0x696e6974);
  const auto init = ensemble_from_gaussian(n, 1, -10.0, 1.0, rng);
  SvgdConfig cfg;
  cfg.iterations = 2000;
  cfg.schedule = AdaGrad{0.05, 0.9};
  cfg.seed = seed;
  return run_svgd(cfg, GaussianMixture::toy_bimodal(), init).final_ensemble;
}

Outcome gmm_transport() {
  const auto target = GaussianMixture::toy_bimodal();
  const double m1 = gmm_moments(target, TestFunction::identity());
  const double m2 = gmm_moments(target, TestFunction::square());
  double e1 = 0.0, e2 = 0.0, positive = 0.0;
  const int seeds = 20;
  for (int s = 1; s <= seeds; ++s) {
    const auto e = gmm_run(100, s);
    e1 += estimate_expectation(e, TestFunction::identity());
    e2 += estimate_expectation(e, TestFunction::square());
    double pos = 0.0;
    for (std::size_t i = 0; i < e.n(); ++i) pos += e.particle(i)[0] > 0.0 ? 1.0 : 0.0;
    positive += pos / static_cast<double>(e.n());
  }
  e1 /= seeds;
  e2 /= seeds;
  positive /= seeds;
  std::vector<double> small, large;
  for (int s = 1; s <= seeds; ++s) {
    small.push_back(estimate_expectation(gmm_run(10, 1000 + s), TestFunction::identity()));
    large.push_back(estimate_expectation(gmm_run(250, 2000 + s), TestFunction::identity()));
  }
  const double mse10 = mse_over_trials(small, m1);
  const double mse250 = mse_over_trials(large, m1);
  const bool a = std::abs(e1 - m1) <= 0.15 && std::abs(e2 - m2) <= 0.75;
  const bool b = positive >= 0.55 && positive <= 0.80;
  const bool c = mse250 < mse10;
  return {a && b && c, "(a) E[x] = " + num(e1) + " vs " + num(m1) + ", E[x^2] = " + num(e2) + " vs " + num(m2) +
                           " (" + (a ? "ok" : "fail") + "); (b) P(x>0) = " + num(positive, 3) + " (" +
                           (b ? "ok" : "fail") + "); (c) MSE n=250 " + num(mse250, 3) + " < n=10 " + num(mse10, 3) +
                           " (" + (c ? "ok" : "fail") + ")"};
}

// ---- 7 ---------------------------------------------------------------------

Outcome logistic_regression() {
  const auto prob = synthetic_blr(2000, 5, 3.0, 0);
  const auto& train = prob.split.train;
  const auto& test = prob.split.test;
  const BlrPosterior post(prob.train_design, train.labels, GammaPrior{}, 50);

  Matrix init_m(100, post.dim());
  RngStream init_rng(1, 0x696e6974);
  for (std::size_t i = 0; i < 100; ++i) post.sample_prior(init_rng, init_m.row(i));
  const ParticleEnsemble init(std::move(init_m));

  SvgdConfig cfg;
  cfg.iterations = 3000;
  cfg.schedule = AdaGrad{0.05, 0.9};
  cfg.seed = 1;
  const auto svgd_fit = run_svgd(cfg, post, init).final_ensemble;
  const auto svgd_m = classification_metrics(blr_predictive(svgd_fit, prob.test_design), test.labels);

  // Long-run MAP: full-batch gradients, well past convergence.
  const BlrPosterior full(prob.train_design, train.labels, GammaPrior{});
  const auto traj = map_gradient_ascent(init.particle(0), full, AdaGrad{0.05, 0.9}, 20000, 1);
  const auto& w = traj.back();
  const auto map_m =
      classification_metrics(blr_predictive(ParticleEnsemble(1, w.size(), w), prob.test_design), test.labels);

  const bool acc_ok = std::abs(svgd_m.accuracy - map_m.accuracy) <= 0.02;
  const bool ll_ok = svgd_m.avg_log_likelihood >= map_m.avg_log_likelihood - 0.02;
  return {acc_ok && ll_ok, "SVGD acc " + num(svgd_m.accuracy) + " ll " + num(svgd_m.avg_log_likelihood) +
                               "; MAP acc " + num(map_m.accuracy) + " ll " + num(map_m.avg_log_likelihood) +
                               " (|dacc| <= 0.02, ll >= MAP - 0.02)"};
}

// ---- 8 ---------------------------------------------------------------------

Outcome norm_identity() {
  RngStream rng(8);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 1 + rng.uniform_index(50);
    const std::size_t d = 1 + rng.uniform_index(5);
    const double mean = rng.normal();
    const double var = 0.25 + 2.0 * rng.uniform();
    const auto target = GaussianMixture::isotropic(d, mean, var);
    const auto x = ensemble_from_gaussian(n, d, rng.normal(), 0.5 + rng.uniform(), rng);
    const RbfKernel k(0.1 + 3.0 * rng.uniform());
    const auto s = evaluate_scores(target, x, nullptr);
    const double lhs = svgd_direction_norm_squared(x, s, k);
    const double rhs = ksd_from_scores(x, s, k, KsdEstimator::v_statistic).value;
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300));
  }
  return {worst <= 1e-10, "worst relative gap over 100 cases = " + num(worst, 3) + " (<= 1e-10)"};
}

// ---- 9 ---------------------------------------------------------------------

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[entry.path().filename().string()] = ss.str();
  }
  return files;
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "svgd_acceptance_cli";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> commands{
      {"gmm1d", "--sweep-n", "10,100", "--trials", "2", "--mc", "--track-ksd"},
      {"logreg", "--synthetic", "N=2000,d=5,norm=3", "--baseline", "map,sgld-parallel,sgld-seq"},
      {"theory-check", "--json"},
      {"ksd", "--generate", "normal:1000,0,1"},
  };
  std::size_t files = 0;
  std::string bad;
  for (const auto& cmd : commands) {
    std::map<std::string, std::string> runs[2];
    std::string stdouts[2];
    for (int r = 0; r < 2; ++r) {
      const fs::path dir = root / (cmd[0] + std::to_string(r));
      auto args = cmd;
      args.insert(args.end(), {"--seed", "3", "--out", dir.string()});
      std::ostringstream out, err;
      const int code = svgd::cli::run(args, out, err);
      if (code != 0) bad += " " + cmd[0] + "(exit " + std::to_string(code) + ")";
      runs[r] = snapshot_dir(dir);
      stdouts[r] = out.str();
    }
    if (runs[0] != runs[1] || stdouts[0] != stdouts[1] || runs[0].empty()) bad += " " + cmd[0];
    files += runs[0].size();
  }
  fs::remove_all(root);
  return {bad.empty(), std::to_string(commands.size()) + " commands, " + std::to_string(files) +
                           " output files byte-identical across reruns" + (bad.empty() ? "" : "; differs:" + bad)};
}

}  // namespace

int main() {
  bool all = true;
  all &= run_criterion(1, 1.0, single_particle_is_map);
  all &= run_criterion(2, 5.0, kl_checks);
  all &= run_criterion(3, 5.0, fisher_checks);
  all &= run_criterion(4, 5.0, stein_identity);
  all &= run_criterion(5, 10.0, ksd_sanity);
  all &= run_criterion(6, 60.0, gmm_transport);
  all &= run_criterion(7, 120.0, logistic_regression);
  all &= run_criterion(8, 1e9, norm_identity);
  all &= run_criterion(9, 1e9, cli_determinism);
  std::printf("%s\n", all ? "all criteria passed" : "some criteria failed");
  return all ? 0 : 1;
}
