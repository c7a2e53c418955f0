#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "svgd/core.hpp"

namespace svgd {

/// Dense binary-classification dataset. Labels are exactly -1 or +1.
/// `metadata` carries provenance (source path, SHA-256, label mapping,
/// standardization, generator parameters) in sorted key order.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  std::map<std::string, std::string> metadata;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t feature_dim() const noexcept { return features.cols(); }
};

/// Checks the shape/label/finiteness invariants; throws InvalidArgument.
void validate(const Dataset& dataset);

/// Reads `label index:value ...` lines (1-based indices, densified). Labels
/// {-1,+1} are kept, {0,1} map 0 -> -1, and {1,2} map 1 -> -1, 2 -> +1; the
/// mapping is recorded in metadata["label_mapping"]. `feature_dim` = 0 sizes
/// the matrix by the largest index seen. Throws ParseError naming the line.
Dataset load_libsvm(const std::filesystem::path& path, std::size_t feature_dim = 0);

/// Writes labels as +1/-1 and non-zero features with 17 significant digits.
void write_libsvm(const std::filesystem::path& path, const Dataset& dataset);

/// CSV with a header row; the column named `label` holds the labels, every
/// other column is a numeric feature.
Dataset load_csv(const std::filesystem::path& path);

/// Seeded shuffle, then the first floor(N * test_fraction) rows go to test.
std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, double test_fraction, std::uint64_t seed);

/// Per-feature affine map x -> (x - mean) / scale, fitted on training data.
/// Zero-variance features keep scale 1 (shift only).
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;

  Matrix apply(const Matrix& features) const;
  Matrix inverse(const Matrix& features) const;
};

struct StandardizedSplit {
  Dataset train;
  Dataset test;
  Standardization transform;
};

/// Fits on `train` (population standard deviation) and applies to both.
StandardizedSplit standardize(const Dataset& train, const Dataset& test);

/// Synthetic logistic data: x ~ N(0, I_d), P(y = +1 | x) = sigma(w.x), then
/// each label flipped with probability `flip_probability`. w is recorded
/// in metadata["true_weights"].
Dataset synth_logistic(std::size_t n, std::span<const double> true_weights, double flip_probability,
                       std::uint64_t seed);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace svgd
