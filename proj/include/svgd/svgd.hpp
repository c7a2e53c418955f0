#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "svgd/core.hpp"
#include "svgd/kernels.hpp"
#include "svgd/parallel.hpp"
#include "svgd/schedule.hpp"
#include "svgd/target.hpp"

namespace svgd {

/// The empirical SVGD direction split into its two parts:
///   driving(i)   = (1/n) sum_j k(x_j, x_i) grad log p(x_j)
///   repulsive(i) = (1/n) sum_j grad_{x_j} k(x_j, x_i)
///   direction    = driving + repulsive   (element-wise, exactly)
struct DirectionTerms {
  Matrix driving;
  Matrix repulsive;
  Matrix direction;
};

/// Row i is phi(x_i) for the RBF kernel with bandwidth `kernel.bandwidth()`.
/// `scores` row j holds grad log p(x_j). The serial path is the plain
/// reference loop; the parallel path distributes rows over OpenMP workers
/// and produces identical bits.
DirectionTerms svgd_direction_terms(const ParticleEnsemble& ensemble, const Matrix& scores, const RbfKernel& kernel,
                                    Execution exec = Execution::parallel);

Matrix svgd_direction(const ParticleEnsemble& ensemble, const Matrix& scores, const RbfKernel& kernel,
                      Execution exec = Execution::parallel);

struct IterationDiagnostics {
  std::size_t iteration = 0;
  double mean_direction_norm = 0.0;
  double mean_driving_norm = 0.0;
  double mean_repulsive_norm = 0.0;
  double bandwidth = 0.0;
  std::optional<double> ksd;  // V-statistic, when tracking is enabled
};

struct StepOptions {
  bool batch_per_particle = false;
  bool track_ksd = false;
  Execution exec = Execution::parallel;
};

struct StepOutcome {
  ParticleEnsemble ensemble;
  IterationDiagnostics diagnostics;
};

/// One Jacobi-style transport step x_i <- x_i + step_i, with every score and
/// the direction taken from the iteration-start snapshot. The input ensemble
/// is untouched. `sampler` may be null (full-data scores).
StepOutcome svgd_step(const ParticleEnsemble& ensemble, const TargetDensity& target, AdaptiveBandwidth& bandwidth,
                      StepSchedule& schedule, MinibatchSampler* sampler, std::size_t iteration,
                      const StepOptions& options = {});

struct SvgdConfig {
  std::size_t iterations = 1000;
  BandwidthPolicy bandwidth = BandwidthPolicy::median_each_iteration();
  StepSchedule schedule = AdaGrad{};
  std::uint64_t seed = 0;
  /// Snapshot every k iterations (plus the initial and final ensembles); 0 = final only.
  std::size_t record_every = 0;
  bool batch_per_particle = false;
  bool track_ksd = false;
  Execution exec = Execution::parallel;
};

struct Snapshot {
  std::size_t iteration;  // number of completed steps
  ParticleEnsemble ensemble;
};

struct SvgdResult {
  ParticleEnsemble final_ensemble;
  std::vector<IterationDiagnostics> diagnostics;  // one per iteration
  std::vector<Snapshot> snapshots;
  double epochs = 0.0;  // passes over the data consumed by minibatching
};

/// Called after each recorded snapshot; lets drivers evaluate metrics without
/// keeping every snapshot alive.
using SnapshotObserver = std::function<void(const Snapshot&, const MinibatchSampler*)>;

SvgdResult run_svgd(const SvgdConfig& config, const TargetDensity& target, const ParticleEnsemble& initial,
                    const SnapshotObserver& observer = {});

void validate(const SvgdConfig& config);

}  // namespace svgd
