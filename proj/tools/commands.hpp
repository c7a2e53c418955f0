#pragma once

// Internal interface between the argument parser (cli.cpp) and the
// subcommand implementations.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace svgd::cli {

/// Bad flag value detected after parsing; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& flag, const std::string& what) : std::runtime_error(flag + ": " + what) {}
};

struct Common {
  std::uint64_t seed = 1;
  int threads = 0;
  std::filesystem::path out_dir;
  bool timing = false;
};

/// Everything a command needs besides its own flags: the resolved config
/// (already rendered as comment lines) and the process streams.
struct Context {
  Common common;
  std::vector<std::string> header;
  std::ostream& out;
  std::ostream& err;
};

/// 17 significant digits; integral values keep a trailing ".0".
std::string fmt(double v);

/// Opens `name` under the output directory and writes the comment header.
std::ofstream open_output(const Context& ctx, const std::string& name);

/// Splits "a,b,c"; empty fields are kept.
std::vector<std::string> split_list(const std::string& text, char sep = ',');

struct Gmm1dOptions {
  std::size_t n = 100;
  std::size_t iters = 2000;
  double step = 0.05;
  double rho = 0.9;
  double init_mean = -10.0;
  double init_sd = 1.0;
  std::size_t record_every = 100;
  std::vector<std::size_t> sweep_n;
  std::size_t trials = 1;
  double kde_min = -15.0;
  double kde_max = 15.0;
  std::size_t kde_points = 301;
  double kde_bandwidth = 0.0;  // 0 = Silverman
  bool monte_carlo = false;
  bool track_ksd = false;
};

struct LogregOptions {
  std::string data;
  std::string synthetic;
  std::uint64_t data_seed = 0;
  double test_fraction = 0.2;
  std::size_t n = 100;
  std::size_t batch = 50;
  std::size_t iters = 3000;
  double step = 0.05;
  double rho = 0.9;
  std::size_t record_every = 100;
  std::vector<std::string> baselines;
  double sgld_a = 0.0;  // 0 = pick by validation
  double prior_shape = 1.0;
  double prior_rate = 0.01;
};

struct TheoryOptions {
  double fd_step = 1e-3;
  std::size_t nodes = 200;
  double tolerance = 1e-8;
  std::size_t samples = 100000;
  double kl_threshold = 1e-4;
  double se_multiple = 3.0;
  bool json = false;
};

struct KsdOptions {
  std::string particles;
  std::string generate = "normal:1000,0,1";
  std::size_t dim = 1;
  std::string target = "normal:0,1";
  double bandwidth = 0.0;  // 0 = median heuristic
  std::size_t bootstrap = 200;
};

int cmd_gmm1d(const Gmm1dOptions& opt, const Context& ctx);
int cmd_logreg(const LogregOptions& opt, const Context& ctx);
int cmd_theory_check(const TheoryOptions& opt, const Context& ctx);
int cmd_ksd(const KsdOptions& opt, const Context& ctx);

}  // namespace svgd::cli
