#include "svgd/dataio.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>

#include "svgd/rng.hpp"
#include "svgd/targets.hpp"

namespace svgd {
namespace {

constexpr std::uint64_t kSplitStream = 0x73706c;
constexpr std::uint64_t kSynthStream = 0x73796e;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_label_set(const std::set<double>& labels) {
  std::string out;
  for (double v : labels) out += (out.empty() ? "" : ", ") + format_double(v);
  return "{" + out + "}";
}

// Maps raw labels onto {-1, +1}; returns the mapping description.
std::string map_labels(const std::vector<double>& raw, std::vector<int>& out) {
  const std::set<double> seen(raw.begin(), raw.end());
  const auto subset_of = [&](double lo, double hi) {
    return std::all_of(seen.begin(), seen.end(), [&](double v) { return v == lo || v == hi; });
  };
  double neg = 0.0;
  std::string mapping;
  if (subset_of(-1.0, 1.0)) {
    neg = -1.0;
    mapping = "identity";
  } else if (subset_of(0.0, 1.0)) {
    neg = 0.0;
    mapping = "0->-1,1->+1";
  } else if (subset_of(1.0, 2.0)) {
    neg = 1.0;
    mapping = "1->-1,2->+1";
  } else {
    throw ParseError("unsupported label set " + format_label_set(seen) + "; expected {-1,+1}, {0,1} or {1,2}", 0);
  }
  out.resize(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) out[k] = raw[k] == neg ? -1 : 1;
  return mapping;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto start = s.find_first_not_of(" \t", pos);
    if (start == std::string_view::npos) break;
    const auto end = s.find_first_of(" \t", start);
    out.push_back(s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    pos = end == std::string_view::npos ? s.size() : end;
  }
  return out;
}

Dataset subset(const Dataset& src, std::span<const std::size_t> rows) {
  Dataset out;
  out.features = Matrix(rows.size(), src.feature_dim());
  out.labels.resize(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto from = src.features.row(rows[k]);
    std::copy(from.begin(), from.end(), out.features.row(k).begin());
    out.labels[k] = src.labels[rows[k]];
  }
  out.feature_names = src.feature_names;
  out.metadata = src.metadata;
  return out;
}

}  // namespace

void validate(const Dataset& dataset) {
  if (dataset.labels.size() != dataset.features.rows()) throw InvalidArgument("dataset: label count != row count");
  for (int y : dataset.labels) {
    if (y != 1 && y != -1) throw InvalidArgument("dataset: labels must be -1 or +1");
  }
  if (!dataset.features.all_finite()) throw InvalidArgument("dataset: non-finite feature value");
}

Dataset load_libsvm(const std::filesystem::path& path, std::size_t feature_dim) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");

  struct Entry {
    std::size_t row, col;
    double value;
  };
  std::vector<Entry> entries;
  std::vector<double> raw_labels;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto tokens = split_whitespace(body);
    double label = 0.0;
    if (!parse_double(tokens[0], label)) throw ParseError("bad label '" + std::string(tokens[0]) + "'", line_no);
    const std::size_t row = raw_labels.size();
    raw_labels.push_back(label);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      if (tok.empty()) continue;
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) throw ParseError("expected index:value, got '" + std::string(tok) + "'", line_no);
      std::size_t index = 0;
      const auto idx = tok.substr(0, colon);
      const auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), index);
      if (ec != std::errc() || ptr != idx.data() + idx.size() || index == 0) {
        throw ParseError("bad feature index '" + std::string(idx) + "'", line_no);
      }
      double value = 0.0;
      if (!parse_double(tok.substr(colon + 1), value)) {
        throw ParseError("bad feature value '" + std::string(tok.substr(colon + 1)) + "'", line_no);
      }
      if (feature_dim != 0 && index > feature_dim) {
        throw ParseError("feature index " + std::to_string(index) + " exceeds dimension " + std::to_string(feature_dim),
                         line_no);
      }
      max_index = std::max(max_index, index);
      entries.push_back({row, index - 1, value});
    }
  }
  if (raw_labels.empty()) throw ParseError("no data rows in '" + path.string() + "'", 0);

  Dataset out;
  const std::size_t dim = feature_dim != 0 ? feature_dim : max_index;
  if (dim == 0) throw ParseError("no features in '" + path.string() + "'", 0);
  out.features = Matrix(raw_labels.size(), dim);
  for (const auto& e : entries) out.features(e.row, e.col) = e.value;
  out.metadata["label_mapping"] = map_labels(raw_labels, out.labels);
  out.metadata["source"] = path.string();
  out.metadata["sha256"] = sha256_file(path);
  out.metadata["format"] = "libsvm";
  return out;
}

void write_libsvm(const std::filesystem::path& path, const Dataset& dataset) {
  validate(dataset);
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  for (std::size_t k = 0; k < dataset.size(); ++k) {
    out << (dataset.labels[k] > 0 ? "+1" : "-1");
    const auto row = dataset.features.row(k);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] != 0.0) out << ' ' << (c + 1) << ':' << format_double(row[c]);
    }
    out << '\n';
  }
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  const auto header = split(trim(line), ',');
  const auto label_it = std::find(header.begin(), header.end(), std::string_view("label"));
  if (label_it == header.end()) throw ParseError("header has no 'label' column", 1);
  const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());

  Dataset out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) out.feature_names.emplace_back(header[c]);
  }
  std::vector<double> values;
  std::vector<double> raw_labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto cells = split(body, ',');
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " columns, got " + std::to_string(cells.size()),
                       line_no);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v)) throw ParseError("bad number '" + std::string(cells[c]) + "'", line_no);
      if (c == label_col) {
        raw_labels.push_back(v);
      } else {
        values.push_back(v);
      }
    }
  }
  if (raw_labels.empty()) throw ParseError("no data rows in '" + path.string() + "'", 0);
  out.features = Matrix(raw_labels.size(), header.size() - 1, std::move(values));
  out.metadata["label_mapping"] = map_labels(raw_labels, out.labels);
  out.metadata["source"] = path.string();
  out.metadata["sha256"] = sha256_file(path);
  out.metadata["format"] = "csv";
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, double test_fraction, std::uint64_t seed) {
  validate(dataset);
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("train_test_split: fraction must be in (0, 1)");
  const std::size_t n = dataset.size();
  const auto test_size = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction));
  if (test_size == 0 || test_size == n) throw InvalidArgument("train_test_split: split would leave an empty side");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng(seed, kSplitStream);
  rng.shuffle(std::span<std::size_t>(order));
  const std::span<const std::size_t> all(order);
  Dataset test = subset(dataset, all.first(test_size));
  Dataset train = subset(dataset, all.subspan(test_size));
  train.metadata["split"] = "train";
  test.metadata["split"] = "test";
  train.metadata["split_seed"] = test.metadata["split_seed"] = std::to_string(seed);
  return {std::move(train), std::move(test)};
}

Matrix Standardization::apply(const Matrix& features) const {
  if (features.cols() != mean.size()) throw InvalidArgument("standardization: feature dimension mismatch");
  Matrix out = features;
  for (std::size_t k = 0; k < out.rows(); ++k) {
    auto row = out.row(k);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / scale[c];
  }
  return out;
}

Matrix Standardization::inverse(const Matrix& features) const {
  if (features.cols() != mean.size()) throw InvalidArgument("standardization: feature dimension mismatch");
  Matrix out = features;
  for (std::size_t k = 0; k < out.rows(); ++k) {
    auto row = out.row(k);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = row[c] * scale[c] + mean[c];
  }
  return out;
}

StandardizedSplit standardize(const Dataset& train, const Dataset& test) {
  if (train.size() == 0) throw InvalidArgument("standardize: empty training set");
  if (test.feature_dim() != train.feature_dim()) throw InvalidArgument("standardize: feature dimension mismatch");
  const std::size_t d = train.feature_dim();
  const double n = static_cast<double>(train.size());
  Standardization tf{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t k = 0; k < train.size(); ++k) mean += train.features(k, c);
    mean /= n;
    double ss = 0.0;
    for (std::size_t k = 0; k < train.size(); ++k) {
      const double diff = train.features(k, c) - mean;
      ss += diff * diff;
    }
    const double sd = std::sqrt(ss / n);
    tf.mean[c] = mean;
    tf.scale[c] = sd > 0.0 ? sd : 1.0;
  }
  StandardizedSplit out{train, test, tf};
  out.train.features = tf.apply(train.features);
  out.test.features = tf.apply(test.features);
  out.train.metadata["standardized"] = out.test.metadata["standardized"] = "train-fit mean/sd";
  return out;
}

Dataset synth_logistic(std::size_t n, std::span<const double> true_weights, double flip_probability,
                       std::uint64_t seed) {
  if (n < 10) throw InvalidArgument("synth_logistic: need N >= 10");
  if (true_weights.empty()) throw InvalidArgument("synth_logistic: need at least one feature");
  if (!(flip_probability >= 0.0 && flip_probability <= 0.5)) {
    throw InvalidArgument("synth_logistic: flip probability must lie in [0, 0.5]");
  }
  const std::size_t d = true_weights.size();
  RngStream rng(seed, kSynthStream);
  Dataset out;
  out.features = Matrix(n, d);
  out.labels.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto row = out.features.row(k);
    for (double& v : row) v = rng.normal();
    const double p = sigmoid(dot(true_weights, row));
    int y = rng.uniform() < p ? 1 : -1;
    if (flip_probability > 0.0 && rng.uniform() < flip_probability) y = -y;
    out.labels[k] = y;
  }
  std::string w;
  for (double v : true_weights) w += (w.empty() ? "" : " ") + format_double(v);
  out.metadata["format"] = "synthetic-logistic";
  out.metadata["true_weights"] = w;
  out.metadata["flip_probability"] = format_double(flip_probability);
  out.metadata["seed"] = std::to_string(seed);
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw NumericalFailure("sha256: init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace svgd
