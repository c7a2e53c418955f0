#include "svgd/ksd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svgd/quadrature.hpp"
#include "svgd/svgd.hpp"

namespace svgd {

double stein_operator_trace(std::span<const double> score, std::span<const double> phi, double div_phi) {
  if (score.size() != phi.size()) throw InvalidArgument("stein_operator_trace: dimension mismatch");
  return dot(score, phi) + div_phi;
}

MeanEstimate stein_identity_residual(const TargetDensity& target, const VectorField& phi, std::size_t m,
                                     RngStream& rng) {
  if (!target.has_sampler()) throw UnsupportedCapability("stein_identity_residual: target cannot be sampled exactly");
  if (m < 100) throw InvalidArgument("stein_identity_residual: need at least 100 samples");
  const std::size_t d = target.dim();
  std::vector<double> x(d), score(d), field(d);
  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    target.sample(rng, x);
    target.grad_log_density(x, {}, score);
    phi.value(x, field);
    const double v = stein_operator_trace(score, field, phi.divergence(x));
    const double delta = v - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (v - mean);
  }
  const double variance = m2 / static_cast<double>(m - 1);
  return {mean, std::sqrt(variance / static_cast<double>(m)), m};
}

double stein_kernel(std::span<const double> x, std::span<const double> score_x, std::span<const double> y,
                    std::span<const double> score_y, double h) {
  const std::size_t d = x.size();
  const double r2 = squared_distance(x, y);
  const double k = std::exp(-r2 / h);
  const double two_over_h = 2.0 / h;
  double ss = 0.0;
  double cross = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double diff = x[c] - y[c];
    ss += score_x[c] * score_y[c];
    // s(x).grad_y k + grad_x k.s(y) = (2/h) k (x - y).(s(x) - s(y))
    cross += diff * (score_x[c] - score_y[c]);
  }
  const double trace = 2.0 * static_cast<double>(d) / h - 4.0 / (h * h) * r2;
  return k * (ss + two_over_h * cross + trace);
}

namespace {

void check_scores(const ParticleEnsemble& ensemble, const Matrix& scores) {
  if (scores.rows() != ensemble.n() || scores.cols() != ensemble.d()) {
    throw InvalidArgument("ksd: score matrix shape does not match the ensemble");
  }
}

// Row sums of u_p; each row summed over j in index order.
std::vector<double> stein_row_sums(const ParticleEnsemble& ensemble, const Matrix& scores, double h, bool skip_diagonal,
                                   Execution exec) {
  const std::size_t n = ensemble.n();
  std::vector<double> rows(n, 0.0);
  for_each_index(n, exec, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (skip_diagonal && i == j) continue;
      acc += stein_kernel(ensemble.particle(i), scores.row(i), ensemble.particle(j), scores.row(j), h);
    }
    rows[i] = acc;
  });
  return rows;
}

}  // namespace

Matrix stein_kernel_matrix(const ParticleEnsemble& ensemble, const Matrix& scores, const RbfKernel& kernel,
                           Execution exec) {
  check_scores(ensemble, scores);
  const std::size_t n = ensemble.n();
  const double h = kernel.bandwidth();
  Matrix u(n, n);
  for_each_index(n, exec, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      u(i, j) = stein_kernel(ensemble.particle(i), scores.row(i), ensemble.particle(j), scores.row(j), h);
    }
  });
  return u;
}

KsdEstimate ksd_from_scores(const ParticleEnsemble& ensemble, const Matrix& scores, const RbfKernel& kernel,
                            KsdEstimator estimator, Execution exec) {
  check_scores(ensemble, scores);
  const std::size_t n = ensemble.n();
  const bool u_stat = estimator == KsdEstimator::u_statistic;
  if (u_stat && n < 2) throw InvalidArgument("ksd: the U-statistic needs at least two particles");
  const auto rows = stein_row_sums(ensemble, scores, kernel.bandwidth(), u_stat, exec);
  double total = 0.0;
  for (double r : rows) total += r;
  const double nd = static_cast<double>(n);
  const double value = u_stat ? total / (nd * (nd - 1.0)) : total / (nd * nd);
  return {value, estimator, n, kernel.bandwidth()};
}

KsdEstimate ksd_squared(const ParticleEnsemble& ensemble, const TargetDensity& target, const RbfKernel& kernel,
                        KsdEstimator estimator, Execution exec) {
  const Matrix scores = evaluate_scores(target, ensemble, nullptr, {false, exec});
  return ksd_from_scores(ensemble, scores, kernel, estimator, exec);
}

double ksd_bootstrap_se(const ParticleEnsemble& ensemble, const Matrix& scores, const RbfKernel& kernel,
                        KsdEstimator estimator, std::size_t replicates, RngStream& rng) {
  const std::size_t n = ensemble.n();
  if (n > 8192) throw InvalidArgument("ksd_bootstrap_se: ensemble too large for the dense Stein kernel matrix");
  if (n < 2) throw InvalidArgument("ksd_bootstrap_se: need at least two particles");
  if (replicates < 2) throw InvalidArgument("ksd_bootstrap_se: need at least two replicates");
  const Matrix u = stein_kernel_matrix(ensemble, scores, kernel);

  // Resample counts are drawn serially so the result is schedule independent.
  std::vector<std::vector<double>> counts(replicates, std::vector<double>(n, 0.0));
  for (auto& c : counts) {
    for (std::size_t k = 0; k < n; ++k) c[rng.uniform_index(n)] += 1.0;
  }
  const double nd = static_cast<double>(n);
  std::vector<double> stats(replicates);
  for_each_index(replicates, Execution::parallel, [&](std::size_t r) {
    const auto& c = counts[r];
    double quad = 0.0;
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (c[i] == 0.0) continue;
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += u(i, j) * c[j];
      quad += c[i] * row;
      diag += c[i] * u(i, i);
    }
    // A resampled pair (a, b), a != b, may pick the same particle twice;
    // only the n self-pairs are dropped for the U form.
    stats[r] = estimator == KsdEstimator::u_statistic ? (quad - diag) / (nd * (nd - 1.0)) : quad / (nd * nd);
  });
  double mean = 0.0;
  for (double s : stats) mean += s;
  mean /= static_cast<double>(replicates);
  double var = 0.0;
  for (double s : stats) var += (s - mean) * (s - mean);
  return std::sqrt(var / static_cast<double>(replicates - 1));
}

std::vector<double> svgd_direction_divergence(const ParticleEnsemble& ensemble, const Matrix& scores,
                                              const RbfKernel& kernel) {
  check_scores(ensemble, scores);
  const std::size_t n = ensemble.n();
  const std::size_t d = ensemble.d();
  const double h = kernel.bandwidth();
  std::vector<double> div(n, 0.0);
  std::vector<double> grad(d);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      rbf_grad_first(ensemble.particle(i), ensemble.particle(j), h, grad);
      acc += dot(grad, scores.row(j)) + rbf_mixed_trace(ensemble.particle(j), ensemble.particle(i), h);
    }
    div[i] = acc / static_cast<double>(n);
  }
  return div;
}

double svgd_direction_norm_squared(const ParticleEnsemble& ensemble, const Matrix& scores, const RbfKernel& kernel) {
  const Matrix phi = svgd_direction(ensemble, scores, kernel, Execution::serial);
  const auto div = svgd_direction_divergence(ensemble, scores, kernel);
  double acc = 0.0;
  for (std::size_t i = 0; i < ensemble.n(); ++i) acc += stein_operator_trace(scores.row(i), phi.row(i), div[i]);
  return acc / static_cast<double>(ensemble.n());
}

// ---- theory checks ---------------------------------------------------------

namespace {

void finish(TheoryCheckReport& r) {
  r.abs_error = std::abs(r.analytic - r.numeric);
  r.rel_error = r.abs_error / std::max(1.0, std::abs(r.analytic));
}

void check_gaussian(const Gaussian1D& g, const char* who) {
  if (!(g.variance > 0.0) || !std::isfinite(g.variance) || !std::isfinite(g.mean)) {
    throw InvalidArgument(std::string(who) + ": variance must be positive");
  }
}

}  // namespace

TheoryCheckReport kl_perturbation_gradient_check(const Gaussian1D& q, const TargetDensity& p, const ScalarField& phi,
                                                 const KlCheckOptions& options) {
  check_gaussian(q, "kl_perturbation_gradient_check");
  if (p.dim() != 1) throw InvalidArgument("kl_perturbation_gradient_check: target must be one-dimensional");
  if (!p.has_log_density()) throw UnsupportedCapability("kl_perturbation_gradient_check: target lacks a log density");
  if (!(options.fd_step > 0.0)) throw InvalidArgument("kl_perturbation_gradient_check: fd step must be positive");
  const double h = options.fd_step;

  const auto log_p = [&](double x) { return p.log_unnorm_density(std::span<const double>(&x, 1)); };
  const auto score_p = [&](double x) { return p.grad_log_density(std::span<const double>(&x, 1))[0]; };

  // KL(eps) minus its eps-independent E_q[log q] part.
  const auto kl_integrand = [&](double x, double eps) {
    const double jac = 1.0 + eps * phi.derivative(x);
    if (!(jac > 0.0)) {
      throw InvalidArgument("kl_perturbation_gradient_check: 1 + eps phi'(x) <= 0 at x = " + std::to_string(x) +
                            "; reduce the fd step");
    }
    return -std::log(jac) - log_p(x + eps * phi.value(x));
  };
  // 5-point central stencil applied inside the expectation (linear in the integrand).
  const auto fd_integrand = [&](double x) {
    return (kl_integrand(x, -2.0 * h) - 8.0 * kl_integrand(x, -h) + 8.0 * kl_integrand(x, h) -
            kl_integrand(x, 2.0 * h)) /
           (12.0 * h);
  };
  const auto stein_integrand = [&](double x) { return score_p(x) * phi.value(x) + phi.derivative(x); };

  const auto numeric = gaussian_expectation(fd_integrand, q.mean, q.variance, options.range_sd, options.min_nodes,
                                            options.tolerance);
  const auto analytic = gaussian_expectation(stein_integrand, q.mean, q.variance, options.range_sd,
                                             options.min_nodes, options.tolerance);

  TheoryCheckReport r;
  r.name = "kl-perturbation";
  r.analytic = -analytic.value;
  r.numeric = numeric.value;
  r.method = "5-point central difference in eps; adaptive trapezoid over q, +-" +
             std::to_string(static_cast<int>(options.range_sd)) + " sd";
  r.quadrature_nodes = std::max(numeric.nodes, analytic.nodes);
  r.fd_step = h;
  finish(r);
  return r;
}

double fisher_divergence_gaussian(const Gaussian1D& q, const Gaussian1D& p) {
  check_gaussian(q, "fisher_divergence_gaussian");
  check_gaussian(p, "fisher_divergence_gaussian");
  const double a = 1.0 / q.variance - 1.0 / p.variance;
  const double b = p.mean / p.variance - q.mean / q.variance;
  const double centre = a * q.mean + b;
  return centre * centre + a * a * q.variance;
}

MeanEstimate fisher_divergence_monte_carlo(const Gaussian1D& q, const Gaussian1D& p, std::size_t m, RngStream& rng) {
  check_gaussian(q, "fisher_divergence_monte_carlo");
  check_gaussian(p, "fisher_divergence_monte_carlo");
  if (m < 2) throw InvalidArgument("fisher_divergence_monte_carlo: need at least two samples");
  const double sd = std::sqrt(q.variance);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double x = rng.normal(q.mean, sd);
    const double diff = -(x - p.mean) / p.variance + (x - q.mean) / q.variance;
    const double v = diff * diff;
    const double delta = v - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (v - mean);
  }
  return {mean, std::sqrt(m2 / static_cast<double>(m - 1) / static_cast<double>(m)), m};
}

TheoryCheckReport fisher_identity_check(const Gaussian1D& q, const Gaussian1D& p, std::size_t m, RngStream& rng) {
  check_gaussian(q, "fisher_identity_check");
  check_gaussian(p, "fisher_identity_check");
  if (m < 1000) throw InvalidArgument("fisher_identity_check: need at least 1000 samples");
  const double sd = std::sqrt(q.variance);
  // phi = score_p - score_q
  const double slope = 1.0 / q.variance - 1.0 / p.variance;
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double x = rng.normal(q.mean, sd);
    const double score_p = -(x - p.mean) / p.variance;
    const double score_q = -(x - q.mean) / q.variance;
    const double phi = score_p - score_q;
    const double v = stein_operator_trace(std::span<const double>(&score_p, 1), std::span<const double>(&phi, 1),
                                          slope);
    const double delta = v - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (v - mean);
  }
  TheoryCheckReport r;
  r.name = "fisher-identity";
  r.analytic = -fisher_divergence_gaussian(q, p);
  r.numeric = -mean;
  r.method = "Monte Carlo over q";
  r.samples = m;
  r.standard_error = std::sqrt(m2 / static_cast<double>(m - 1) / static_cast<double>(m));
  finish(r);
  return r;
}

}  // namespace svgd
