#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "svgd/baselines.hpp"
#include "svgd/error.hpp"
#include "svgd/svgd.hpp"
#include "svgd/targets.hpp"

using namespace svgd;

namespace {

Matrix scores_of(const TargetDensity& p, const ParticleEnsemble& e) { return evaluate_scores(p, e, nullptr); }

}  // namespace

TEST(Direction, SingleParticleIsScore) {
  const auto p = GaussianMixture::toy_bimodal();
  const std::vector<double> xs{0.3};
  const auto e = ParticleEnsemble::from_scalars(xs);
  const auto s = scores_of(p, e);
  EXPECT_EQ(svgd_direction(e, s, RbfKernel(1.7))(0, 0), s(0, 0));
}

TEST(Direction, TwoParticleHandValue) {
  const auto p = GaussianMixture::isotropic(1, 0.0, 1.0);
  const std::vector<double> xs{-1.0, 1.0};
  const auto e = ParticleEnsemble::from_scalars(xs);
  const auto phi = svgd_direction(e, scores_of(p, e), RbfKernel(1.0));
  EXPECT_NEAR(phi(1, 0), -0.45421090277816456, 1e-15);
  EXPECT_NEAR(phi(0, 0), 0.45421090277816456, 1e-15);
}

TEST(Direction, CoincidentParticlesFollowScore) {
  const auto p = GaussianMixture::toy_bimodal();
  const std::vector<double> xs{0.8, 0.8};
  const auto e = ParticleEnsemble::from_scalars(xs);
  const auto s = scores_of(p, e);
  const auto terms = svgd_direction_terms(e, s, RbfKernel(2.0));
  EXPECT_EQ(terms.direction(0, 0), s(0, 0));
  EXPECT_EQ(terms.direction(1, 0), s(0, 0));
  EXPECT_EQ(terms.repulsive(0, 0), 0.0);
}

TEST(Direction, MatchesFiniteDifferenceOracle) {
  RngStream rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(12);
    const std::size_t d = 1 + rng.uniform_index(4);
    const auto e = ensemble_from_gaussian(n, d, 0.5, 1.5, rng);
    const auto p = GaussianMixture::isotropic(d, 1.0, 2.0);
    const auto s = scores_of(p, e);
    const double h = 0.5 + 3.0 * rng.uniform();
    const auto terms = svgd_direction_terms(e, s, RbfKernel(h), Execution::serial);
    const auto rows = oracle::to_rows({e.matrix().values().begin(), e.matrix().values().end()}, d);
    const auto srows = oracle::to_rows({s.values().begin(), s.values().end()}, d);
    const auto expect = oracle::svgd_direction(rows, srows, h);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < d; ++c) {
        EXPECT_NEAR(terms.direction(i, c), expect[i][c], 1e-8);
        EXPECT_EQ(terms.direction(i, c), terms.driving(i, c) + terms.repulsive(i, c));
      }
    }
  }
}

TEST(Direction, RejectsShapeMismatch) {
  const std::vector<double> xs{0.0, 1.0};
  const auto e = ParticleEnsemble::from_scalars(xs);
  EXPECT_THROW(svgd_direction(e, Matrix(3, 1), RbfKernel(1.0)), InvalidArgument);
}

TEST(Schedule, AdaGradFirstCallAndRecurrence) {
  AdaGrad ada{1.0, 0.9, 1e-6, {}};
  const Matrix g(1, 1, 1.0);
  Matrix s1 = adagrad_step(ada, g);
  EXPECT_EQ(ada.history(0, 0), 1.0);
  EXPECT_EQ(s1(0, 0), 1.0 / (1e-6 + 1.0));
  Matrix s2 = adagrad_step(ada, g);
  EXPECT_DOUBLE_EQ(ada.history(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s2(0, 0), 1.0 / (1e-6 + 1.0));

  AdaGrad first{0.05, 0.9, 1e-6, {}};
  const Matrix neg(1, 2, std::vector<double>{-3.0, 2.0});
  const Matrix s = adagrad_step(first, neg);
  EXPECT_DOUBLE_EQ(s(0, 0), 0.05 * -3.0 / (1e-6 + 3.0));
  EXPECT_DOUBLE_EQ(s(0, 1), 0.05 * 2.0 / (1e-6 + 2.0));
}

TEST(Schedule, AdaGradZeroDirection) {
  AdaGrad ada{0.1, 0.9, 1e-6, {}};
  const Matrix z(2, 2, 0.0);
  EXPECT_EQ(adagrad_step(ada, z), z);
  EXPECT_EQ(ada.history, z);
  EXPECT_EQ(adagrad_step(ada, z), z);
}

TEST(Schedule, AdaGradHistoryNonNegative) {
  RngStream rng(2);
  AdaGrad ada{};
  for (int t = 0; t < 50; ++t) {
    Matrix g(3, 2);
    for (double& v : g.values()) v = rng.normal(0.0, 3.0);
    adagrad_step(ada, g);
    for (double v : ada.history.values()) EXPECT_GE(v, 0.0);
  }
}

TEST(Schedule, PolynomialDecayValues) {
  PolynomialDecay poly{1.0, 0.55, 1.0};
  EXPECT_EQ(poly.epsilon(0), 1.0);
  EXPECT_NEAR(poly.epsilon(1), 0.6830201283771977, 1e-15);
  StepSchedule sched = poly;
  const Matrix g(1, 1, 2.0);
  EXPECT_EQ(schedule_step(sched, g, 0)(0, 0), 2.0);
}

TEST(Schedule, Validation) {
  EXPECT_THROW(validate(StepSchedule{AdaGrad{0.0}}), InvalidArgument);
  EXPECT_THROW(validate(StepSchedule{AdaGrad{0.1, 1.0}}), InvalidArgument);
  EXPECT_THROW(validate(StepSchedule{PolynomialDecay{-1.0}}), InvalidArgument);
  EXPECT_NO_THROW(validate(StepSchedule{PolynomialDecay{0.0}}));
}

TEST(Step, FixedPointAtGaussianMode) {
  const auto p = GaussianMixture::isotropic(1, 0.0, 1.0);
  const std::vector<double> xs{0.0};
  const auto e = ParticleEnsemble::from_scalars(xs);
  AdaptiveBandwidth bw(BandwidthPolicy::median_each_iteration());
  StepSchedule sched = AdaGrad{0.1};
  const auto out = svgd_step(e, p, bw, sched, nullptr, 0);
  EXPECT_EQ(out.ensemble, e);
}

TEST(Step, ZeroStepIsIdentity) {
  RngStream rng(5);
  const auto e = ensemble_from_gaussian(20, 2, 0.0, 3.0, rng);
  const auto p = GaussianMixture::isotropic(2, 1.0, 1.0);
  AdaptiveBandwidth bw(BandwidthPolicy::median_each_iteration());
  StepSchedule sched = PolynomialDecay{0.0};
  const auto out = svgd_step(e, p, bw, sched, nullptr, 0);
  EXPECT_EQ(out.ensemble, e);
}

TEST(Step, SingleParticleIsGradientAscent) {
  const auto p = GaussianMixture::toy_bimodal();
  const std::vector<double> xs{-0.4};
  const auto e = ParticleEnsemble::from_scalars(xs);
  AdaptiveBandwidth bw(BandwidthPolicy::median_each_iteration());
  StepSchedule sched = PolynomialDecay{0.3, 0.55, 1.0};
  const auto out = svgd_step(e, p, bw, sched, nullptr, 2);
  const double eps = 0.3 / std::pow(3.0, 0.55);
  EXPECT_EQ(out.ensemble.particle(0)[0], -0.4 + eps * p.grad_log_density(xs)[0]);
}

TEST(Step, DiagnosticsRecorded) {
  RngStream rng(6);
  const auto e = ensemble_from_gaussian(10, 1, -3.0, 1.0, rng);
  const auto p = GaussianMixture::toy_bimodal();
  AdaptiveBandwidth bw(BandwidthPolicy::median_each_iteration());
  StepSchedule sched = AdaGrad{0.05};
  const auto out = svgd_step(e, p, bw, sched, nullptr, 4, {false, true, Execution::parallel});
  EXPECT_EQ(out.diagnostics.iteration, 4u);
  EXPECT_EQ(out.diagnostics.bandwidth, median_bandwidth(e));
  ASSERT_TRUE(out.diagnostics.ksd.has_value());
  EXPECT_GE(*out.diagnostics.ksd, 0.0);
  EXPECT_GT(out.diagnostics.mean_direction_norm, 0.0);
}

TEST(Run, CoincidentParticlesStayCoincident) {
  const std::vector<double> xs{1.5, 1.5, 1.5};
  const auto e = ParticleEnsemble::from_scalars(xs);
  SvgdConfig cfg;
  cfg.iterations = 50;
  cfg.schedule = AdaGrad{0.05};
  const auto res = run_svgd(cfg, GaussianMixture::isotropic(1, 0.0, 1.0), e);
  const auto& f = res.final_ensemble;
  EXPECT_EQ(f.particle(0)[0], f.particle(1)[0]);
  EXPECT_EQ(f.particle(1)[0], f.particle(2)[0]);
  EXPECT_LT(std::abs(f.particle(0)[0]), 1.5);
}

TEST(Run, DeterministicAndSnapshotCadence) {
  RngStream rng(8);
  const auto e = ensemble_from_gaussian(30, 1, -10.0, 1.0, rng);
  SvgdConfig cfg;
  cfg.iterations = 25;
  cfg.record_every = 10;
  cfg.schedule = AdaGrad{0.05};
  cfg.track_ksd = true;
  const auto p = GaussianMixture::toy_bimodal();
  const auto a = run_svgd(cfg, p, e);
  const auto b = run_svgd(cfg, p, e);
  EXPECT_EQ(a.final_ensemble, b.final_ensemble);
  ASSERT_EQ(a.snapshots.size(), 4u);
  EXPECT_EQ(a.snapshots[0].iteration, 0u);
  EXPECT_EQ(a.snapshots[1].iteration, 10u);
  EXPECT_EQ(a.snapshots[3].iteration, 25u);
  EXPECT_EQ(a.snapshots[3].ensemble, a.final_ensemble);
  ASSERT_EQ(a.diagnostics.size(), 25u);
  for (std::size_t t = 0; t < 25; ++t) {
    EXPECT_EQ(a.diagnostics[t].iteration, t);
    EXPECT_EQ(a.diagnostics[t].ksd, b.diagnostics[t].ksd);
  }
}

TEST(Run, SingleParticleMatchesMap) {
  const auto p = GaussianMixture::toy_bimodal();
  const std::vector<double> x0{-1.3};
  SvgdConfig cfg;
  cfg.iterations = 200;
  cfg.schedule = PolynomialDecay{0.1, 0.55, 1.0};
  cfg.record_every = 1;
  const auto res = run_svgd(cfg, p, ParticleEnsemble::from_scalars(x0));
  const auto traj = map_gradient_ascent(x0, p, PolynomialDecay{0.1, 0.55, 1.0}, 200);
  ASSERT_EQ(res.snapshots.size(), traj.size());
  for (std::size_t t = 0; t < traj.size(); ++t) EXPECT_EQ(res.snapshots[t].ensemble.particle(0)[0], traj[t][0]);
}

TEST(Run, ValidationErrors) {
  const std::vector<double> xs{0.0};
  const auto e = ParticleEnsemble::from_scalars(xs);
  SvgdConfig cfg;
  cfg.iterations = 0;
  EXPECT_THROW(run_svgd(cfg, GaussianMixture::toy_bimodal(), e), InvalidArgument);
  cfg.iterations = 1;
  EXPECT_THROW(run_svgd(cfg, GaussianMixture::isotropic(2, 0.0, 1.0), e), InvalidArgument);
}

namespace {

// 1D target whose score blows up far from the origin.
class Exploding final : public TargetDensity {
 public:
  std::size_t dim() const override { return 1; }
  void grad_log_density(std::span<const double> x, std::span<const std::size_t>, std::span<double> out) const override {
    out[0] = x[0] > 5.0 ? std::nan("") : 1.0;
  }
  using TargetDensity::grad_log_density;
};

}  // namespace

TEST(Run, NonFiniteScoreNamesIterationAndParticle) {
  const std::vector<double> xs{0.0, 4.95};
  SvgdConfig cfg;
  cfg.iterations = 100;
  cfg.bandwidth = BandwidthPolicy::fixed(1.0);
  cfg.schedule = PolynomialDecay{0.1, 0.0, 1.0};
  try {
    run_svgd(cfg, Exploding{}, ParticleEnsemble::from_scalars(xs));
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("iteration"), std::string::npos) << msg;
    EXPECT_NE(msg.find("particle 1"), std::string::npos) << msg;
  }
}
