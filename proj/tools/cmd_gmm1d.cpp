#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <utility>

#include "commands.hpp"
#include "svgd/diagnostics.hpp"
#include "svgd/svgd.hpp"
#include "svgd/targets.hpp"

namespace svgd::cli {
namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;
constexpr std::uint64_t kCosStream = 0x636f73;
constexpr std::uint64_t kMonteCarloStream = 0x6d63;

struct CosineDraw {
  double omega;
  double phase;
};

// omega ~ N(0, 1), phase ~ U[0, 2 pi), one draw per trial shared across particle counts.
CosineDraw cosine_for_trial(std::uint64_t seed, std::size_t trial) {
  RngStream rng = RngStream(seed, kCosStream).split(trial);
  const double omega = rng.normal();
  return {omega, 2.0 * std::numbers::pi * rng.uniform()};
}

ParticleEnsemble initial_particles(const Gmm1dOptions& opt, std::uint64_t seed, std::size_t n, std::size_t trial) {
  RngStream rng = RngStream(seed, kInitStream).split(n).split(trial);
  return ensemble_from_gaussian(n, 1, opt.init_mean, opt.init_sd, rng);
}

SvgdConfig svgd_config(const Gmm1dOptions& opt, std::uint64_t seed, std::size_t record_every) {
  SvgdConfig cfg;
  cfg.iterations = opt.iters;
  cfg.bandwidth = BandwidthPolicy::median_each_iteration();
  cfg.schedule = AdaGrad{opt.step, opt.rho};
  cfg.seed = seed;
  cfg.record_every = record_every;
  cfg.track_ksd = opt.track_ksd;
  return cfg;
}

void write_moment_rows(std::ostream& file, std::size_t n, std::size_t trial, const ParticleEnsemble& e,
                       const GaussianMixture& p, const CosineDraw& cos) {
  const TestFunction fns[] = {TestFunction::identity(), TestFunction::square(),
                              TestFunction::cosine(cos.omega, cos.phase)};
  for (const auto& h : fns) {
    const double est = estimate_expectation(e, h);
    const double truth = gmm_moments(p, h);
    file << n << ',' << h.name() << ',' << trial << ',' << fmt(est) << ',' << fmt(truth) << ','
         << fmt((est - truth) * (est - truth)) << '\n';
  }
}

}  // namespace

int cmd_gmm1d(const Gmm1dOptions& opt, const Context& ctx) {
  if (!(opt.kde_max > opt.kde_min)) throw UsageError("--kde-max", "must exceed --kde-min");
  const auto target = GaussianMixture::toy_bimodal();
  const std::uint64_t seed = ctx.common.seed;

  // Primary run: trajectory, densities and per-iteration diagnostics.
  const auto primary = run_svgd(svgd_config(opt, seed, opt.record_every), target, initial_particles(opt, seed, opt.n, 0));

  {
    auto file = open_output(ctx, "trajectory.csv");
    file << "iter,particle_index,value\n";
    for (const auto& snap : primary.snapshots) {
      for (std::size_t i = 0; i < snap.ensemble.n(); ++i) {
        file << snap.iteration << ',' << i << ',' << fmt(snap.ensemble.particle(i)[0]) << '\n';
      }
    }
  }
  {
    std::vector<double> grid(opt.kde_points);
    const double width = (opt.kde_max - opt.kde_min) / static_cast<double>(opt.kde_points - 1);
    for (std::size_t g = 0; g < grid.size(); ++g) grid[g] = opt.kde_min + width * static_cast<double>(g);
    const auto bw = opt.kde_bandwidth > 0.0 ? KdeBandwidth::fixed(opt.kde_bandwidth) : KdeBandwidth::silverman();
    auto file = open_output(ctx, "kde.csv");
    file << "iter,x,density,target\n";
    for (const auto& snap : primary.snapshots) {
      const auto dens = kde_1d(snap.ensemble, grid, bw);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const double x[] = {grid[g]};
        file << snap.iteration << ',' << fmt(grid[g]) << ',' << fmt(dens[g]) << ','
             << fmt(std::exp(target.log_unnorm_density(x))) << '\n';
      }
    }
  }
  {
    auto file = open_output(ctx, "diagnostics.csv");
    file << "iter,bandwidth,direction_norm,driving_norm,repulsive_norm,ksd\n";
    for (const auto& d : primary.diagnostics) {
      file << d.iteration << ',' << fmt(d.bandwidth) << ',' << fmt(d.mean_direction_norm) << ','
           << fmt(d.mean_driving_norm) << ',' << fmt(d.mean_repulsive_norm) << ',' << (d.ksd ? fmt(*d.ksd) : "")
           << '\n';
    }
  }

  // Moment estimates over the particle-count sweep.
  const std::vector<std::size_t> sweep = opt.sweep_n.empty() ? std::vector<std::size_t>{opt.n} : opt.sweep_n;
  auto moments = open_output(ctx, "moments.csv");
  moments << "n,test_function,trial,estimate,truth,squared_error\n";
  for (std::size_t n : sweep) {
    for (std::size_t trial = 0; trial < opt.trials; ++trial) {
      const auto cos = cosine_for_trial(seed, trial);
      if (n == opt.n && trial == 0) {
        write_moment_rows(moments, n, trial, primary.final_ensemble, target, cos);
        continue;
      }
      const auto res = run_svgd(svgd_config(opt, seed, 0), target, initial_particles(opt, seed, n, trial));
      write_moment_rows(moments, n, trial, res.final_ensemble, target, cos);
    }
  }

  if (opt.monte_carlo) {
    auto file = open_output(ctx, "moments_mc.csv");
    file << "n,test_function,trial,estimate,truth,squared_error\n";
    for (std::size_t n : sweep) {
      for (std::size_t trial = 0; trial < opt.trials; ++trial) {
        RngStream rng = RngStream(seed, kMonteCarloStream).split(n).split(trial);
        std::vector<double> draws(n);
        for (double& x : draws) target.sample(rng, std::span<double>(&x, 1));
        write_moment_rows(file, n, trial, ParticleEnsemble::from_scalars(draws), target, cosine_for_trial(seed, trial));
      }
    }
  }

  ctx.out << "gmm1d: n=" << opt.n << " iters=" << opt.iters << " E[x]="
          << fmt(estimate_expectation(primary.final_ensemble, TestFunction::identity()))
          << " (truth " << fmt(gmm_moments(target, TestFunction::identity())) << ")\n";
  return 0;
}

}  // namespace svgd::cli
