#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "svgd/core.hpp"
#include "svgd/parallel.hpp"
#include "svgd/rng.hpp"
#include "svgd/schedule.hpp"
#include "svgd/svgd.hpp"
#include "svgd/target.hpp"

namespace svgd {

/// Stochastic gradient Langevin dynamics, Welling–Teh form without a
/// Metropolis correction:
///   eps_t = a / (t + 1)^exponent
///   x <- x + (eps_t / 2) * scale * grad log p(x) + eta,   eta ~ N(0, eps_t I)
struct SgldConfig {
  double a = 1e-2;
  double exponent = 0.55;
  std::size_t chains = 1;
  double gradient_scale = 1.0;
  std::uint64_t seed = 0;
};

void validate(const SgldConfig& config);

double sgld_step_size(const SgldConfig& config, std::size_t t);

/// Stream id base for chain noise; chain c draws from stream base + c.
inline constexpr std::uint64_t kSgldStreamBase = 0x5367000000ULL;

/// One independent noise stream per chain, keyed by chain id.
std::vector<RngStream> sgld_chain_streams(std::uint64_t seed, std::size_t chains);

/// Advances every chain (one row per chain) by one step. `noise[c]` feeds
/// chain c. All chains share one minibatch drawn from `sampler` (may be null).
ParticleEnsemble sgld_step(const ParticleEnsemble& chains, const TargetDensity& target, std::size_t t,
                           const SgldConfig& config, std::span<RngStream> noise, MinibatchSampler* sampler,
                           Execution exec = Execution::parallel);

struct SgldResult {
  ParticleEnsemble final_chains;
  std::vector<Snapshot> snapshots;
  double epochs = 0.0;
};

/// Runs `iterations` steps from `initial` (rows = chains). Snapshots follow
/// the same cadence rules as run_svgd.
SgldResult run_sgld(const SgldConfig& config, const TargetDensity& target, const ParticleEnsemble& initial,
                    std::size_t iterations, std::size_t record_every = 0, const SnapshotObserver& observer = {});

/// Called with (completed steps, current state) after every MAP step and once for the start point.
using MapObserver = std::function<void(std::size_t, std::span<const double>)>;

/// Reference MAP loop x <- x + step(grad log p(x)), with `schedule` turning
/// the gradient into a step. Minibatches (for data targets) come from the
/// stream shared with run_svgd, so a one-particle SVGD run with the same seed
/// follows the identical trajectory. Returns iterations + 1 states.
std::vector<std::vector<double>> map_gradient_ascent(std::span<const double> x0, const TargetDensity& target,
                                                     StepSchedule schedule, std::size_t iterations,
                                                     std::uint64_t seed = 0, const MapObserver& observer = {});

}  // namespace svgd
