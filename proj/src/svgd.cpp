#include "svgd/svgd.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "svgd/ksd.hpp"

namespace svgd {
namespace {

void check_direction_inputs(const ParticleEnsemble& ensemble, const Matrix& scores) {
  if (scores.rows() != ensemble.n() || scores.cols() != ensemble.d()) {
    throw InvalidArgument("svgd_direction: scores are " + std::to_string(scores.rows()) + "x" +
                          std::to_string(scores.cols()) + ", ensemble is " + std::to_string(ensemble.n()) + "x" +
                          std::to_string(ensemble.d()));
  }
  if (!scores.all_finite()) throw InvalidArgument("svgd_direction: non-finite score");
}

// Plain reference: one kernel call per ordered pair.
void direction_rows_reference(const ParticleEnsemble& ensemble, const Matrix& scores, double h, Matrix& driving,
                              Matrix& repulsive) {
  const std::size_t n = ensemble.n();
  const std::size_t d = ensemble.d();
  std::vector<double> grad(d);
  for (std::size_t i = 0; i < n; ++i) {
    auto drive = driving.row(i);
    auto repel = repulsive.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double k = rbf_eval(ensemble.particle(j), ensemble.particle(i), h);
      rbf_grad_first(ensemble.particle(j), ensemble.particle(i), h, grad);
      const auto s = scores.row(j);
      for (std::size_t c = 0; c < d; ++c) {
        drive[c] += k * s[c];
        repel[c] += grad[c];
      }
    }
  }
}

// OpenMP rows; same per-row summation order and the same arithmetic as the reference.
void direction_rows_streaming(const ParticleEnsemble& ensemble, const Matrix& scores, double h, Matrix& driving,
                              Matrix& repulsive) {
  const std::size_t n = ensemble.n();
  const std::size_t d = ensemble.d();
  const double* x = ensemble.matrix().values().data();
  const double* s = scores.values().data();
  const double scale = -2.0 / h;
  const long rows = static_cast<long>(n);
#pragma omp parallel for schedule(static)
  for (long ii = 0; ii < rows; ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const double* xi = x + i * d;
    double* drive = driving.row(i).data();
    double* repel = repulsive.row(i).data();
    for (std::size_t j = 0; j < n; ++j) {
      const double* xj = x + j * d;
      const double* sj = s + j * d;
      double r2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = xj[c] - xi[c];
        r2 += diff * diff;
      }
      const double k = std::exp(-r2 / h);
      for (std::size_t c = 0; c < d; ++c) {
        drive[c] += k * sj[c];
        repel[c] += scale * (xj[c] - xi[c]) * k;
      }
    }
  }
}

// Above this size the n x n kernel cache costs more memory than it saves.
constexpr std::size_t kKernelCacheMax = 2048;

// Kernel values are symmetric, so each unordered pair needs one exp. The
// squared distance is the same bits either way round, which keeps the row
// sums identical to the reference.
void direction_rows_cached(const ParticleEnsemble& ensemble, const Matrix& scores, double h, Matrix& driving,
                           Matrix& repulsive) {
  const std::size_t n = ensemble.n();
  const std::size_t d = ensemble.d();
  const double* x = ensemble.matrix().values().data();
  const double* s = scores.values().data();
  const double scale = -2.0 / h;
  const long rows = static_cast<long>(n);
  const std::unique_ptr<double[]> kmat(new double[n * n]);
#pragma omp parallel for schedule(dynamic, 8)
  for (long ii = 0; ii < rows; ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const double* xi = x + i * d;
    double* upper = kmat.get() + i * n;
    if (d == 1) {
      for (std::size_t j = i; j < n; ++j) {
        const double diff = x[j] - xi[0];
        upper[j] = std::exp(-(diff * diff) / h);
      }
    } else {
      for (std::size_t j = i; j < n; ++j) {
        const double* xj = x + j * d;
        double r2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double diff = xj[c] - xi[c];
          r2 += diff * diff;
        }
        upper[j] = std::exp(-r2 / h);
      }
    }
  }
  // Mirror in a second pass; writing columns inside the loop above thrashes the cache.
#pragma omp parallel for schedule(dynamic, 8)
  for (long ii = 0; ii < rows; ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    double* row = kmat.get() + i * n;
    for (std::size_t j = 0; j < i; ++j) row[j] = kmat[j * n + i];
  }
#pragma omp parallel for schedule(static)
  for (long ii = 0; ii < rows; ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const double* xi = x + i * d;
    const double* krow = kmat.get() + i * n;
    double* drive = driving.row(i).data();
    double* repel = repulsive.row(i).data();
    if (d == 1) {
      // Register accumulators; same order of additions as the general loop.
      double dr = 0.0;
      double rp = 0.0;
      const double x0 = xi[0];
      for (std::size_t j = 0; j < n; ++j) {
        const double k = krow[j];
        dr += k * s[j];
        rp += scale * (x[j] - x0) * k;
      }
      drive[0] = dr;
      repel[0] = rp;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double* xj = x + j * d;
      const double* sj = s + j * d;
      const double k = krow[j];
      for (std::size_t c = 0; c < d; ++c) {
        drive[c] += k * sj[c];
        repel[c] += scale * (xj[c] - xi[c]) * k;
      }
    }
  }
}

void direction_rows_parallel(const ParticleEnsemble& ensemble, const Matrix& scores, double h, Matrix& driving,
                             Matrix& repulsive) {
  if (ensemble.n() <= kKernelCacheMax) {
    direction_rows_cached(ensemble, scores, h, driving, repulsive);
  } else {
    direction_rows_streaming(ensemble, scores, h, driving, repulsive);
  }
}

double mean_row_norm(const Matrix& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) acc += norm(m.row(i));
  return acc / static_cast<double>(m.rows());
}

}  // namespace

DirectionTerms svgd_direction_terms(const ParticleEnsemble& ensemble, const Matrix& scores, const RbfKernel& kernel,
                                    Execution exec) {
  check_direction_inputs(ensemble, scores);
  const std::size_t n = ensemble.n();
  const std::size_t d = ensemble.d();
  DirectionTerms out{Matrix(n, d), Matrix(n, d), Matrix(n, d)};
  if (exec == Execution::serial) {
    direction_rows_reference(ensemble, scores, kernel.bandwidth(), out.driving, out.repulsive);
  } else {
    direction_rows_parallel(ensemble, scores, kernel.bandwidth(), out.driving, out.repulsive);
  }
  const double nd = static_cast<double>(n);
  auto drive = out.driving.values();
  auto repel = out.repulsive.values();
  auto dir = out.direction.values();
  for (std::size_t k = 0; k < dir.size(); ++k) {
    drive[k] /= nd;
    repel[k] /= nd;
    dir[k] = drive[k] + repel[k];
  }
  return out;
}

Matrix svgd_direction(const ParticleEnsemble& ensemble, const Matrix& scores, const RbfKernel& kernel, Execution exec) {
  return svgd_direction_terms(ensemble, scores, kernel, exec).direction;
}

StepOutcome svgd_step(const ParticleEnsemble& ensemble, const TargetDensity& target, AdaptiveBandwidth& bandwidth,
                      StepSchedule& schedule, MinibatchSampler* sampler, std::size_t iteration,
                      const StepOptions& options) {
  if (target.dim() != ensemble.d()) {
    throw InvalidArgument("svgd_step: target dimension " + std::to_string(target.dim()) +
                          " != ensemble dimension " + std::to_string(ensemble.d()));
  }
  const std::string where = "iteration " + std::to_string(iteration) + ": ";

  Matrix scores;
  try {
    scores = evaluate_scores(target, ensemble, sampler, {options.batch_per_particle, options.exec});
  } catch (const NumericalFailure& e) {
    throw NumericalFailure(where + e.what());
  }

  const double h = bandwidth.resolve(ensemble, options.exec);
  const RbfKernel kernel(h);
  const DirectionTerms terms = svgd_direction_terms(ensemble, scores, kernel, options.exec);
  const Matrix step = schedule_step(schedule, terms.direction, iteration);

  Matrix next = ensemble.matrix();
  auto xs = next.values();
  const auto dx = step.values();
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k] += dx[k];
  if (!next.all_finite()) throw NumericalFailure(where + "update produced a non-finite particle");

  IterationDiagnostics diag;
  diag.iteration = iteration;
  diag.mean_direction_norm = mean_row_norm(terms.direction);
  diag.mean_driving_norm = mean_row_norm(terms.driving);
  diag.mean_repulsive_norm = mean_row_norm(terms.repulsive);
  diag.bandwidth = h;
  if (options.track_ksd) diag.ksd = ksd_from_scores(ensemble, scores, kernel, KsdEstimator::v_statistic, options.exec).value;

  return {ParticleEnsemble(std::move(next)), diag};
}

void validate(const SvgdConfig& config) {
  if (config.iterations == 0) throw InvalidArgument("svgd: iterations must be >= 1");
  if (config.bandwidth.kind == BandwidthPolicy::Kind::fixed && !(config.bandwidth.fixed_h > 0.0)) {
    throw InvalidArgument("svgd: fixed bandwidth must be positive");
  }
  validate(config.schedule);
}

SvgdResult run_svgd(const SvgdConfig& config, const TargetDensity& target, const ParticleEnsemble& initial,
                    const SnapshotObserver& observer) {
  validate(config);
  std::optional<MinibatchSampler> sampler;
  if (target.stochastic()) {
    sampler.emplace(target.data_size(), target.batch_size(), RngStream(config.seed, kMinibatchStream));
  }
  MinibatchSampler* batches = sampler ? &*sampler : nullptr;

  AdaptiveBandwidth bandwidth(config.bandwidth);
  StepSchedule schedule = config.schedule;
  const StepOptions options{config.batch_per_particle, config.track_ksd, config.exec};

  SvgdResult result{initial, {}, {}, 0.0};
  result.diagnostics.reserve(config.iterations);
  const auto record = [&](std::size_t iter, const ParticleEnsemble& e) {
    result.snapshots.push_back({iter, e});
    if (observer) observer(result.snapshots.back(), batches);
  };
  if (config.record_every > 0) record(0, initial);

  ParticleEnsemble current = initial;
  for (std::size_t t = 0; t < config.iterations; ++t) {
    StepOutcome out = svgd_step(current, target, bandwidth, schedule, batches, t, options);
    current = std::move(out.ensemble);
    result.diagnostics.push_back(out.diagnostics);
    const std::size_t done = t + 1;
    const bool cadence = config.record_every > 0 && done % config.record_every == 0;
    if (cadence || done == config.iterations) record(done, current);
  }
  result.final_ensemble = std::move(current);
  result.epochs = batches ? batches->epochs() : static_cast<double>(config.iterations);
  return result;
}

}  // namespace svgd
