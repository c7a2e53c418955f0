#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>
#include <string_view>

#include "commands.hpp"
#include "svgd/error.hpp"
#include "svgd/kernels.hpp"
#include "svgd/ksd.hpp"
#include "svgd/targets.hpp"

namespace svgd::cli {
namespace {

constexpr std::uint64_t kGenerateStream = 0x67656e;
constexpr std::uint64_t kBootstrapStream = 0x626f6f74;

double parse_number(const std::string& flag, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError(flag, "bad number '" + std::string(text) + "'");
  }
  return v;
}

// "kind:a,b,c" -> kind and its numeric arguments.
std::pair<std::string, std::vector<double>> parse_spec(const std::string& flag, const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    for (const auto& field : split_list(text.substr(colon + 1))) args.push_back(parse_number(flag, field));
  }
  return {kind, args};
}

ParticleEnsemble read_particles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--particles", "cannot open '" + path.string() + "'");
  std::vector<double> values;
  std::size_t d = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (char& c : line) {
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    }
    const auto first = line.find_first_not_of(' ');
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t count = 0;
    std::size_t pos = first;
    while (pos < line.size()) {
      const auto end = std::min(line.find(' ', pos), line.size());
      const std::string_view tok(line.data() + pos, end - pos);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("bad coordinate '" + std::string(tok) + "'", line_no);
      }
      values.push_back(v);
      ++count;
      pos = line.find_first_not_of(' ', end);
      if (pos == std::string::npos) break;
    }
    if (d == 0) d = count;
    if (count != d) {
      throw ParseError("expected " + std::to_string(d) + " coordinates, got " + std::to_string(count), line_no);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("no particles in '" + path.string() + "'", 0);
  return ParticleEnsemble(rows, d, std::move(values));
}

ParticleEnsemble generate_particles(const KsdOptions& opt, std::uint64_t seed) {
  const auto [kind, args] = parse_spec("--generate", opt.generate);
  if (kind != "normal" || args.size() != 3) throw UsageError("--generate", "expected normal:N,MEAN,SD");
  if (!(args[0] >= 1.0) || args[0] != std::floor(args[0])) throw UsageError("--generate", "N must be a positive integer");
  if (!(args[2] > 0.0)) throw UsageError("--generate", "SD must be positive");
  RngStream rng(seed, kGenerateStream);
  return ensemble_from_gaussian(static_cast<std::size_t>(args[0]), opt.dim, args[1], args[2], rng);
}

std::unique_ptr<TargetDensity> make_target(const std::string& text, std::size_t d) {
  const auto [kind, args] = parse_spec("--target", text);
  if (kind == "toy") {
    if (d != 1) throw UsageError("--target", "the toy mixture is one-dimensional");
    return std::make_unique<GaussianMixture>(GaussianMixture::toy_bimodal());
  }
  if (kind == "normal") {
    if (args.size() != 2 || !(args[1] > 0.0)) throw UsageError("--target", "expected normal:MEAN,VAR with VAR > 0");
    return std::make_unique<GaussianMixture>(GaussianMixture::isotropic(d, args[0], args[1]));
  }
  throw UsageError("--target", "unknown target '" + text + "' (expected normal:MEAN,VAR or toy)");
}

}  // namespace

int cmd_ksd(const KsdOptions& opt, const Context& ctx) {
  const auto particles = opt.particles.empty() ? generate_particles(opt, ctx.common.seed) : read_particles(opt.particles);
  const auto target = make_target(opt.target, particles.d());
  const double h = opt.bandwidth > 0.0 ? opt.bandwidth : median_bandwidth(particles);
  const RbfKernel kernel(h);
  const auto scores = evaluate_scores(*target, particles, nullptr);

  struct Line {
    const char* name;
    KsdEstimator estimator;
    double value;
    double se;  // NaN when not computed
  };
  std::vector<Line> lines;
  const double no_se = std::nan("");
  for (const auto est : {KsdEstimator::u_statistic, KsdEstimator::v_statistic}) {
    if (est == KsdEstimator::u_statistic && particles.n() < 2) continue;
    const double value = ksd_from_scores(particles, scores, kernel, est).value;
    double se = no_se;
    if (opt.bootstrap >= 2 && particles.n() >= 2) {
      RngStream rng(ctx.common.seed, kBootstrapStream);
      se = ksd_bootstrap_se(particles, scores, kernel, est, opt.bootstrap, rng);
    }
    lines.push_back({est == KsdEstimator::u_statistic ? "U" : "V", est, value, se});
  }

  const char* rule = opt.bandwidth > 0.0 ? "fixed" : "median";
  ctx.out << "n = " << particles.n() << "\nd = " << particles.d() << "\nh = " << fmt(h) << " (" << rule << ")\n";
  if (particles.n() < 2) ctx.out << "U = undefined (needs n >= 2)\n";
  for (const auto& l : lines) {
    ctx.out << l.name << " = " << fmt(l.value);
    if (!std::isnan(l.se)) ctx.out << "  (bootstrap se " << fmt(l.se) << ", " << opt.bootstrap << " replicates)";
    ctx.out << '\n';
  }

  auto file = open_output(ctx, "ksd.csv");
  file << "estimator,value,bootstrap_se,n,d,bandwidth\n";
  for (const auto& l : lines) {
    file << l.name << ',' << fmt(l.value) << ',' << (std::isnan(l.se) ? "" : fmt(l.se)) << ',' << particles.n() << ','
         << particles.d() << ',' << fmt(h) << '\n';
  }
  return 0;
}

}  // namespace svgd::cli
