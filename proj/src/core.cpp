#include "svgd/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace svgd {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw InvalidArgument("matrix: expected " + std::to_string(rows * cols) + " values, got " +
                          std::to_string(values_.size()));
  }
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ParticleEnsemble::ParticleEnsemble(Matrix particles) : particles_(std::move(particles)) {
  if (particles_.rows() == 0 || particles_.cols() == 0) {
    throw InvalidArgument("ensemble: need n >= 1 and d >= 1");
  }
  if (!particles_.all_finite()) throw InvalidArgument("ensemble: non-finite particle coordinate");
}

ParticleEnsemble::ParticleEnsemble(std::size_t n, std::size_t d, std::vector<double> values)
    : ParticleEnsemble(Matrix(n, d, std::move(values))) {}

ParticleEnsemble ParticleEnsemble::from_scalars(std::span<const double> values) {
  return ParticleEnsemble(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

ParticleEnsemble ensemble_from_gaussian(std::size_t n, std::span<const double> mean, double stddev,
                                        RngStream& rng) {
  if (n == 0) throw InvalidArgument("ensemble_from_gaussian: n must be positive");
  if (mean.empty()) throw InvalidArgument("ensemble_from_gaussian: d must be positive");
  if (!(stddev > 0.0) || !std::isfinite(stddev)) {
    throw InvalidArgument("ensemble_from_gaussian: stddev must be positive");
  }
  Matrix m(n, mean.size());
  for (std::size_t i = 0; i < n; ++i) {
    auto row = m.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = rng.normal(mean[c], stddev);
  }
  return ParticleEnsemble(std::move(m));
}

ParticleEnsemble ensemble_from_gaussian(std::size_t n, std::size_t d, double mean, double stddev,
                                        RngStream& rng) {
  const std::vector<double> means(d, mean);
  return ensemble_from_gaussian(n, means, stddev, rng);
}

double squared_distance(std::span<const double> x, std::span<const double> y) noexcept {
  double acc = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double diff = x[c] - y[c];
    acc += diff * diff;
  }
  return acc;
}

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  double acc = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) acc += x[c] * y[c];
  return acc;
}

double norm(std::span<const double> x) noexcept { return std::sqrt(dot(x, x)); }

}  // namespace svgd
