#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "svgd/baselines.hpp"
#include "svgd/error.hpp"
#include "svgd/targets.hpp"

using namespace svgd;

TEST(Sgld, StepSizeSequence) {
  SgldConfig cfg;
  cfg.a = 1.0;
  EXPECT_EQ(sgld_step_size(cfg, 0), 1.0);
  EXPECT_NEAR(sgld_step_size(cfg, 1), 0.6830201283771977, 1e-15);
  cfg.a = 0.0;
  EXPECT_THROW(validate(cfg), InvalidArgument);
}

TEST(Sgld, NoiseOnlyVariance) {
  // gradient scale 0: every step adds N(0, eps_t) per coordinate
  const auto p = GaussianMixture::isotropic(2, 0.0, 1.0);
  SgldConfig cfg;
  cfg.a = 0.5;
  cfg.gradient_scale = 0.0;
  auto noise = sgld_chain_streams(3, 1);
  const std::size_t t = 4;
  const double eps = sgld_step_size(cfg, t);
  const int steps = 10000;
  double s1[2] = {0.0, 0.0}, s2[2] = {0.0, 0.0};
  const ParticleEnsemble origin(1, 2, {0.0, 0.0});
  for (int i = 0; i < steps; ++i) {
    const auto next = sgld_step(origin, p, t, cfg, noise, nullptr);
    for (int c = 0; c < 2; ++c) {
      s1[c] += next.particle(0)[c];
      s2[c] += next.particle(0)[c] * next.particle(0)[c];
    }
  }
  for (int c = 0; c < 2; ++c) {
    const double mean = s1[c] / steps;
    const double var = s2[c] / steps - mean * mean;
    EXPECT_NEAR(var, eps, 0.05 * eps);
    EXPECT_NEAR(mean, 0.0, 5.0 * std::sqrt(eps / steps));
  }
}

TEST(Sgld, DeterministicAndChainsIndependent) {
  const auto p = GaussianMixture::toy_bimodal();
  SgldConfig cfg;
  cfg.a = 0.1;
  cfg.chains = 3;
  cfg.seed = 12;
  const ParticleEnsemble init(3, 1, {0.0, 0.0, 0.0});
  const auto a = run_sgld(cfg, p, init, 100, 10);
  const auto b = run_sgld(cfg, p, init, 100, 10);
  EXPECT_EQ(a.final_chains, b.final_chains);
  EXPECT_EQ(a.snapshots.size(), 11u);
  EXPECT_NE(a.final_chains.particle(0)[0], a.final_chains.particle(1)[0]);
  EXPECT_THROW(run_sgld(cfg, p, ParticleEnsemble(2, 1, {0.0, 0.0}), 10), InvalidArgument);
}

TEST(Sgld, SamplesTargetLongRun) {
  const auto p = GaussianMixture::isotropic(1, 3.0, 1.0);
  SgldConfig cfg;
  cfg.a = 0.05;
  cfg.exponent = 0.0;
  cfg.chains = 200;
  cfg.seed = 5;
  std::vector<double> zeros(200, 0.0);
  const auto res = run_sgld(cfg, p, ParticleEnsemble(200, 1, zeros), 1000);
  double mean = 0.0;
  for (std::size_t c = 0; c < 200; ++c) mean += res.final_chains.particle(c)[0];
  mean /= 200.0;
  EXPECT_NEAR(mean, 3.0, 0.3);
}

TEST(Map, ConvergesMonotonically) {
  const auto p = GaussianMixture::isotropic(1, 2.0, 1.0);
  const std::vector<double> x0{-4.0};
  const auto traj = map_gradient_ascent(x0, p, PolynomialDecay{0.2, 0.0, 1.0}, 100);
  ASSERT_EQ(traj.size(), 101u);
  for (std::size_t t = 1; t < traj.size(); ++t) {
    EXPECT_LE(std::abs(traj[t][0] - 2.0), std::abs(traj[t - 1][0] - 2.0));
  }
  EXPECT_NEAR(traj.back()[0], 2.0, 1e-6);
  const std::vector<double> at_mode{2.0};
  const auto fixed = map_gradient_ascent(at_mode, p, PolynomialDecay{0.2, 0.0, 1.0}, 10);
  EXPECT_EQ(fixed.back()[0], 2.0);
}

TEST(Map, ZeroStepConstant) {
  const auto p = GaussianMixture::toy_bimodal();
  const std::vector<double> x0{-1.0};
  const auto traj = map_gradient_ascent(x0, p, PolynomialDecay{0.0}, 20);
  for (const auto& x : traj) EXPECT_EQ(x[0], -1.0);
}
