#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "svgd/error.hpp"
#include "svgd/rng.hpp"

namespace svgd {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {values_.data() + i * cols_, cols_}; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// n particles in R^d, stored row-major. Immutable once built: every
/// transport step produces a fresh snapshot. Construction rejects empty
/// shapes and non-finite coordinates.
class ParticleEnsemble {
 public:
  explicit ParticleEnsemble(Matrix particles);
  ParticleEnsemble(std::size_t n, std::size_t d, std::vector<double> values);

  /// One-dimensional ensemble from a list of scalar particles.
  static ParticleEnsemble from_scalars(std::span<const double> values);

  std::size_t n() const noexcept { return particles_.rows(); }
  std::size_t d() const noexcept { return particles_.cols(); }
  std::span<const double> particle(std::size_t i) const noexcept { return particles_.row(i); }
  const Matrix& matrix() const noexcept { return particles_; }

  bool operator==(const ParticleEnsemble&) const = default;

 private:
  Matrix particles_;
};

/// n i.i.d. draws from N(mean, stddev^2 I). `mean.size()` fixes d.
ParticleEnsemble ensemble_from_gaussian(std::size_t n, std::span<const double> mean, double stddev,
                                        RngStream& rng);

/// Convenience overload with the same scalar mean in every coordinate.
ParticleEnsemble ensemble_from_gaussian(std::size_t n, std::size_t d, double mean, double stddev,
                                        RngStream& rng);

double squared_distance(std::span<const double> x, std::span<const double> y) noexcept;
double dot(std::span<const double> x, std::span<const double> y) noexcept;
double norm(std::span<const double> x) noexcept;

}  // namespace svgd
