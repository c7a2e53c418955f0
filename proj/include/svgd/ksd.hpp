#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "svgd/core.hpp"
#include "svgd/kernels.hpp"
#include "svgd/parallel.hpp"
#include "svgd/rng.hpp"
#include "svgd/target.hpp"

namespace svgd {

// ---- Stein operator ---------------------------------------------------------

/// trace(A_p phi)(x) = grad log p(x) . phi(x) + div phi(x).
double stein_operator_trace(std::span<const double> score, std::span<const double> phi, double div_phi);

/// A test field phi: R^d -> R^d together with its divergence.
struct VectorField {
  std::function<void(std::span<const double> x, std::span<double> out)> value;
  std::function<double(std::span<const double> x)> divergence;
};

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo mean and standard error of trace(A_p phi) over m exact draws
/// from p. Requires the target's sampling capability and m >= 100.
MeanEstimate stein_identity_residual(const TargetDensity& target, const VectorField& phi, std::size_t m,
                                     RngStream& rng);

// ---- kernelized Stein discrepancy --------------------------------------------

enum class KsdEstimator { v_statistic, u_statistic };

struct KsdEstimate {
  double value = 0.0;
  KsdEstimator estimator = KsdEstimator::v_statistic;
  std::size_t n = 0;
  double bandwidth = 0.0;
};

/// Stein kernel u_p(x, y) for the RBF kernel:
///   s(x).s(y) k + s(x).grad_y k + grad_x k.s(y) + trace(grad_x grad_y k).
double stein_kernel(std::span<const double> x, std::span<const double> score_x, std::span<const double> y,
                    std::span<const double> score_y, double h);

/// Full n x n matrix of u_p(x_i, x_j).
Matrix stein_kernel_matrix(const ParticleEnsemble& ensemble, const Matrix& scores, const RbfKernel& kernel,
                           Execution exec = Execution::parallel);

/// S(q, p) estimate: V-statistic (1/n^2) sum_ij u_p, or U-statistic
/// (1/(n(n-1))) sum_{i != j} u_p. The U form needs n >= 2.
KsdEstimate ksd_squared(const ParticleEnsemble& ensemble, const TargetDensity& target, const RbfKernel& kernel,
                        KsdEstimator estimator = KsdEstimator::v_statistic, Execution exec = Execution::parallel);

/// Same, from precomputed scores (row j = grad log p(x_j)).
KsdEstimate ksd_from_scores(const ParticleEnsemble& ensemble, const Matrix& scores, const RbfKernel& kernel,
                            KsdEstimator estimator = KsdEstimator::v_statistic,
                            Execution exec = Execution::parallel);

/// Bootstrap standard error of the estimator: resample particles with
/// replacement `replicates` times and take the spread of the recomputed
/// statistic. Uses the n x n Stein kernel matrix, so n is capped at 8192.
double ksd_bootstrap_se(const ParticleEnsemble& ensemble, const Matrix& scores, const RbfKernel& kernel,
                        KsdEstimator estimator, std::size_t replicates, RngStream& rng);

/// Divergence of the empirical SVGD direction at every particle:
///   div phi(x_i) = (1/n) sum_j [grad_{x_i} k(x_j, x_i) . s_j + trace(grad_{x_i} grad_{x_j} k(x_j, x_i))].
std::vector<double> svgd_direction_divergence(const ParticleEnsemble& ensemble, const Matrix& scores,
                                              const RbfKernel& kernel);

/// Squared RKHS norm of the empirical SVGD direction via the reproducing
/// property: ||phi||^2 = (1/n) sum_i trace(A_p phi)(x_i), evaluated with the
/// direction rows from svgd_direction and their divergences.
double svgd_direction_norm_squared(const ParticleEnsemble& ensemble, const Matrix& scores, const RbfKernel& kernel);

// ---- theory checks -----------------------------------------------------------

struct Gaussian1D {
  double mean = 0.0;
  double variance = 1.0;
};

/// Scalar phi with its derivative.
struct ScalarField {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

struct TheoryCheckReport {
  std::string name;
  double analytic = 0.0;
  double numeric = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;  // abs_error / max(1, |analytic|)
  std::string method;
  std::size_t quadrature_nodes = 0;
  double fd_step = 0.0;
  std::size_t samples = 0;
  double standard_error = 0.0;
};

struct KlCheckOptions {
  double fd_step = 1e-3;
  std::size_t min_nodes = 200;
  double tolerance = 1e-8;
  double range_sd = 10.0;
};

/// Compares d/d eps KL(q_[T] || p) at eps = 0, for T(x) = x + eps phi(x),
/// against -E_q[trace(A_p phi)]. The numeric side applies a 5-point central
/// difference in eps to
///   KL(eps) = E_q[log q(x) - log|1 + eps phi'(x)| - log p(x + eps phi(x))]
/// (the change of variables of the pushforward density); every expectation
/// is an adaptive trapezoid quadrature over q. `p` must be 1D with a log density.
TheoryCheckReport kl_perturbation_gradient_check(const Gaussian1D& q, const TargetDensity& p, const ScalarField& phi,
                                                 const KlCheckOptions& options = {});

/// Fisher divergence E_q[(d/dx log p - d/dx log q)^2] between 1D Gaussians.
/// The score difference is a x + b with a = 1/s1^2 - 1/s2^2 and
/// b = m2/s2^2 - m1/s1^2, so F = (a m1 + b)^2 + a^2 s1^2.
double fisher_divergence_gaussian(const Gaussian1D& q, const Gaussian1D& p);

/// Monte Carlo estimate of the same quantity from m draws of q.
MeanEstimate fisher_divergence_monte_carlo(const Gaussian1D& q, const Gaussian1D& p, std::size_t m, RngStream& rng);

/// With phi = grad log p - grad log q the KL derivative equals -F(q, p).
/// Analytic side: -fisher_divergence_gaussian. Numeric side: Monte Carlo of
/// -E_q[trace(A_p phi)] over m >= 1000 draws, with its standard error.
TheoryCheckReport fisher_identity_check(const Gaussian1D& q, const Gaussian1D& p, std::size_t m, RngStream& rng);

}  // namespace svgd
