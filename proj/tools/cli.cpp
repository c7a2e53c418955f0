#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <ostream>

#include "commands.hpp"
#include "svgd/error.hpp"
#include "svgd/parallel.hpp"

#ifndef SVGD_VERSION
#define SVGD_VERSION "unknown"
#endif

namespace svgd::cli {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEna") == std::string::npos) s += ".0";
  return s;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::ofstream open_output(const Context& ctx, const std::string& name) {
  const auto path = ctx.common.out_dir / name;
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("--out", "cannot write '" + path.string() + "'");
  for (const auto& line : ctx.header) file << line << '\n';
  return file;
}

namespace {

// Options left out of the echoed config: they change where or how fast a
// run happens, not what it computes.
bool echoed(const CLI::Option* opt) {
  if (opt->get_lnames().empty()) return false;
  const auto& name = opt->get_lnames().front();
  return name != "help" && name != "config" && name != "threads" && name != "out" && name != "version";
}

std::string option_value(const CLI::Option* opt) {
  if (opt->get_expected_min() == 0) return opt->count() > 0 ? "true" : "false";
  if (opt->count() == 0) {
    const auto d = opt->get_default_str();
    return d == "{}" ? "none" : d;
  }
  std::string joined;
  for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
  return joined;
}

std::vector<std::string> resolved_header(const CLI::App& app, const CLI::App& sub) {
  std::vector<std::string> lines{std::string("# svgd ") + SVGD_VERSION, "# command: " + sub.get_name()};
  for (const CLI::App* scope : {&app, &sub}) {
    for (const CLI::Option* opt : scope->get_options()) {
      if (echoed(opt)) lines.push_back("# " + opt->get_lnames().front() + " = " + option_value(opt));
    }
  }
  return lines;
}

// Integer lower bound with a readable message ("--n: must be >= 1, got 0").
CLI::Validator at_least(long long lo) {
  return CLI::Validator(
      [lo](std::string& value) -> std::string {
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || ptr != value.data() + value.size() || v < lo) {
          return "must be an integer >= " + std::to_string(lo) + ", got " + value;
        }
        return {};
      },
      "INT>=" + std::to_string(lo));
}

CLI::Validator positive() {
  return CLI::Validator(
      [](std::string& value) -> std::string {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || ptr != value.data() + value.size() || !(v > 0.0)) {
          return "must be a positive number, got " + value;
        }
        return {};
      },
      "POSITIVE");
}

void add_gmm1d(CLI::App& sub, Gmm1dOptions& o) {
  sub.add_option("--n", o.n, "number of particles")->check(at_least(1));
  sub.add_option("--iters", o.iters, "SVGD iterations")->check(at_least(1));
  sub.add_option("--step", o.step, "AdaGrad master step size")->check(positive());
  sub.add_option("--rho", o.rho, "AdaGrad history decay")->check(CLI::Range(0.0, 0.999999));
  sub.add_option("--init-mean", o.init_mean, "mean of the initial particles");
  sub.add_option("--init-sd", o.init_sd, "standard deviation of the initial particles")->check(positive());
  sub.add_option("--record-every", o.record_every, "snapshot cadence for trajectory.csv and kde.csv")
      ->check(at_least(1));
  sub.add_option("--sweep-n", o.sweep_n, "comma-separated particle counts for moments.csv (default: --n)")
      ->delimiter(',')
      ->check(at_least(1));
  sub.add_option("--trials", o.trials, "independent trials per particle count")->check(at_least(1));
  sub.add_option("--kde-min", o.kde_min, "left end of the density grid");
  sub.add_option("--kde-max", o.kde_max, "right end of the density grid");
  sub.add_option("--kde-points", o.kde_points, "density grid size")->check(CLI::Range(2, 1000000));
  sub.add_option("--kde-bandwidth", o.kde_bandwidth, "Gaussian KDE bandwidth; 0 uses Silverman's rule")
      ->check(CLI::NonNegativeNumber);
  sub.add_flag("--mc", o.monte_carlo, "also write moments_mc.csv from exact Monte Carlo draws");
  sub.add_flag("--track-ksd", o.track_ksd, "add the per-iteration KSD to diagnostics.csv");
}

void add_logreg(CLI::App& sub, LogregOptions& o) {
  sub.add_option("--data", o.data, "dataset file (libsvm, or CSV with a 'label' column if it ends in .csv)");
  sub.add_option("--synthetic", o.synthetic, "synthetic data spec, e.g. N=2000,d=5,norm=3,flip=0");
  sub.add_option("--data-seed", o.data_seed, "seed for synthetic data and the train/test split");
  sub.add_option("--test-fraction", o.test_fraction, "held-out fraction")->check(CLI::Range(1e-9, 1.0 - 1e-9));
  sub.add_option("--n", o.n, "number of particles")->check(at_least(1));
  sub.add_option("--batch", o.batch, "minibatch size")->check(at_least(1));
  sub.add_option("--iters", o.iters, "iterations")->check(at_least(1));
  sub.add_option("--step", o.step, "AdaGrad master step size for SVGD and MAP")->check(positive());
  sub.add_option("--rho", o.rho, "AdaGrad history decay")->check(CLI::Range(0.0, 0.999999));
  sub.add_option("--record-every", o.record_every, "metrics cadence in iterations")->check(at_least(1));
  sub.add_option("--baseline", o.baselines, "comma-separated baselines: sgld-parallel, sgld-seq, map")
      ->delimiter(',')
      ->check(CLI::IsMember({"sgld-parallel", "sgld-seq", "map"}));
  sub.add_option("--sgld-a", o.sgld_a, "SGLD step scale a; 0 picks it on a validation split")
      ->check(CLI::NonNegativeNumber);
  sub.add_option("--prior-shape", o.prior_shape, "Gamma prior shape a")->check(positive());
  sub.add_option("--prior-rate", o.prior_rate, "Gamma prior rate b")->check(positive());
}

void add_theory(CLI::App& sub, TheoryOptions& o) {
  sub.add_option("--fd-step", o.fd_step, "finite-difference step in epsilon")->check(positive());
  sub.add_option("--nodes", o.nodes, "initial quadrature intervals")->check(CLI::Range(2, 1 << 20));
  sub.add_option("--tolerance", o.tolerance, "quadrature convergence tolerance")->check(positive());
  sub.add_option("--samples", o.samples, "Monte Carlo draws for the Fisher checks")->check(CLI::Range(1000, 100000000));
  sub.add_option("--kl-threshold", o.kl_threshold, "pass threshold on the KL checks' relative error")
      ->check(positive());
  sub.add_option("--se-multiple", o.se_multiple, "pass band for Monte Carlo checks, in standard errors")
      ->check(positive());
  sub.add_flag("--json", o.json, "print the report as JSON and write theory_check.json");
}

void add_ksd(CLI::App& sub, KsdOptions& o) {
  auto* file = sub.add_option("--particles", o.particles, "particle file: one particle per line, coordinates "
                                                          "separated by spaces or commas, '#' comments");
  sub.add_option("--generate", o.generate, "generator spec normal:N,MEAN,SD (used without --particles)")
      ->excludes(file);
  sub.add_option("--dim", o.dim, "dimension of generated particles")->check(at_least(1));
  sub.add_option("--target", o.target, "target spec: normal:MEAN,VAR (isotropic) or toy");
  sub.add_option("--bandwidth", o.bandwidth, "RBF bandwidth h; 0 uses the median heuristic")
      ->check(CLI::NonNegativeNumber);
  sub.add_option("--bootstrap", o.bootstrap, "bootstrap replicates for the standard errors; 0 disables")
      ->check(CLI::Range(0, 100000));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stein variational gradient descent experiments", "svgd"};
  app.option_defaults()->always_capture_default();
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "config file (key = value, [subcommand] sections); flags override it");
  app.set_version_flag("--version", SVGD_VERSION);

  Common common;
  std::string out_dir;
  app.add_option("--seed", common.seed, "random seed");
  app.add_option("--threads", common.threads, "cap on worker threads (0 = all); results do not depend on it")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, std::string("output directory (default: $") + kOutputDirEnv + " or .)");
  app.add_flag("--timing", common.timing, "write measured wall-clock seconds instead of 0");

  Gmm1dOptions gmm;
  LogregOptions logreg;
  TheoryOptions theory;
  KsdOptions ksd;
  auto* gmm_cmd = app.add_subcommand("gmm1d", "SVGD on the 1D two-component Gaussian mixture");
  auto* logreg_cmd = app.add_subcommand("logreg", "Bayesian logistic regression with SVGD and baselines");
  auto* theory_cmd = app.add_subcommand("theory-check", "KL-derivative and Fisher-divergence identity checks");
  auto* ksd_cmd = app.add_subcommand("ksd", "kernelized Stein discrepancy of a particle set");
  add_gmm1d(*gmm_cmd, gmm);
  add_logreg(*logreg_cmd, logreg);
  add_theory(*theory_cmd, theory);
  add_ksd(*ksd_cmd, ksd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << SVGD_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (out_dir.empty()) {
    const char* env = std::getenv(kOutputDirEnv);
    out_dir = env && *env ? env : ".";
  }
  common.out_dir = out_dir;

  struct ThreadCap {
    explicit ThreadCap(int n) { set_max_threads(n); }
    ~ThreadCap() { set_max_threads(0); }
  } cap(common.threads);

  try {
    std::error_code ec;
    std::filesystem::create_directories(common.out_dir, ec);
    if (ec) throw UsageError("--out", "cannot create '" + out_dir + "': " + ec.message());
    const Context ctx{common, resolved_header(app, *sub), out, err};
    if (sub == gmm_cmd) return cmd_gmm1d(gmm, ctx);
    if (sub == logreg_cmd) return cmd_logreg(logreg, ctx);
    if (sub == theory_cmd) return cmd_theory_check(theory, ctx);
    return cmd_ksd(ksd, ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace svgd::cli
