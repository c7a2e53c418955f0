#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <string>

#include "commands.hpp"
#include "svgd/baselines.hpp"
#include "svgd/dataio.hpp"
#include "svgd/diagnostics.hpp"
#include "svgd/error.hpp"
#include "svgd/svgd.hpp"
#include "svgd/targets.hpp"

namespace svgd::cli {
namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;
constexpr std::uint64_t kWeightStream = 0x77;
constexpr std::uint64_t kValidationSplitSalt = 0x76616c;

struct SyntheticSpec {
  std::size_t n = 2000;
  std::size_t d = 5;
  double norm = 3.0;
  double flip = 0.0;
};

SyntheticSpec parse_synthetic(const std::string& text) {
  SyntheticSpec spec;
  for (const auto& field : split_list(text)) {
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw UsageError("--synthetic", "expected key=value, got '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    try {
      std::size_t used = 0;
      if (key == "N") {
        spec.n = std::stoul(value, &used);
      } else if (key == "d") {
        spec.d = std::stoul(value, &used);
      } else if (key == "norm") {
        spec.norm = std::stod(value, &used);
      } else if (key == "flip") {
        spec.flip = std::stod(value, &used);
      } else {
        throw UsageError("--synthetic", "unknown key '" + key + "' (expected N, d, norm, flip)");
      }
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw UsageError("--synthetic", "bad value for " + key + ": '" + value + "'");
    }
  }
  if (spec.d == 0) throw UsageError("--synthetic", "d must be positive");
  if (spec.n < 10) throw UsageError("--synthetic", "N must be at least 10");
  if (!(spec.norm >= 0.0)) throw UsageError("--synthetic", "norm must be non-negative");
  return spec;
}

Dataset make_dataset(const LogregOptions& opt) {
  if (opt.data.empty() == opt.synthetic.empty()) {
    throw UsageError("--data", "exactly one of --data or --synthetic is required");
  }
  if (!opt.data.empty()) {
    if (!std::filesystem::exists(opt.data)) throw UsageError("--data", "no such file '" + opt.data + "'");
    const bool csv = std::filesystem::path(opt.data).extension() == ".csv";
    return csv ? load_csv(opt.data) : load_libsvm(opt.data);
  }
  const auto spec = parse_synthetic(opt.synthetic);
  // w* points in a seeded random direction with the requested length.
  RngStream rng(opt.data_seed, kWeightStream);
  std::vector<double> w(spec.d);
  for (double& v : w) v = rng.normal();
  const double len = norm(w);
  for (double& v : w) v = spec.norm * v / len;
  return synth_logistic(spec.n, w, spec.flip, opt.data_seed);
}

struct MetricRow {
  std::string method;
  std::size_t iteration;
  double epochs;
  ClassificationMetrics metrics;
  double seconds;
};

class Recorder {
 public:
  Recorder(const Matrix& test_design, std::span<const int> test_labels, std::size_t record_every,
           std::size_t iterations, double batch_over_n, bool timing)
      : design_(test_design),
        labels_(test_labels),
        every_(record_every),
        last_(iterations),
        epoch_rate_(batch_over_n),
        timing_(timing) {}

  bool due(std::size_t t) const { return t % every_ == 0 || t == last_; }

  void start() { t0_ = std::chrono::steady_clock::now(); }

  void record(const std::string& method, std::size_t t, const ParticleEnsemble& particles) {
    const double secs =
        timing_ ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count() : 0.0;
    const auto probs = blr_predictive(particles, design_);
    rows.push_back({method, t, epoch_rate_ * static_cast<double>(t), classification_metrics(probs, labels_), secs});
  }

  std::vector<MetricRow> rows;

 private:
  const Matrix& design_;
  std::span<const int> labels_;
  std::size_t every_;
  std::size_t last_;
  double epoch_rate_;
  bool timing_;
  std::chrono::steady_clock::time_point t0_;
};

SgldConfig sgld_config(double a, std::size_t chains, std::uint64_t seed) {
  SgldConfig cfg;
  cfg.a = a;
  cfg.chains = chains;
  cfg.seed = seed;
  return cfg;
}

ParticleEnsemble first_rows(const ParticleEnsemble& e, std::size_t count) {
  Matrix m(count, e.d());
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t c = 0; c < e.d(); ++c) m(i, c) = e.matrix()(i, c);
  return ParticleEnsemble(std::move(m));
}

// Picks the SGLD step scale on a log grid by held-out log-likelihood of a
// short parallel-chain run on a split of the training data.
double select_sgld_a(const Dataset& train, const LogregOptions& opt, const ParticleEnsemble& init,
                     std::uint64_t seed, std::ostream& log) {
  auto [fit, valid] = train_test_split(train, 0.2, opt.data_seed ^ kValidationSplitSalt);
  const std::size_t batch = std::min(opt.batch, fit.size());
  BlrPosterior post(append_intercept(fit.features), fit.labels, GammaPrior{opt.prior_shape, opt.prior_rate}, batch);
  const Matrix valid_design = append_intercept(valid.features);
  const std::size_t chains = std::min<std::size_t>(init.n(), 20);
  const std::size_t iters = std::min<std::size_t>(opt.iters, 1000);
  double best_a = 0.0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (double a : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
    double ll = -std::numeric_limits<double>::infinity();
    try {
      const auto res = run_sgld(sgld_config(a, chains, seed), post, first_rows(init, chains), iters);
      ll = classification_metrics(blr_predictive(res.final_chains, valid_design), valid.labels).avg_log_likelihood;
    } catch (const NumericalFailure&) {
    }
    log << "  sgld a=" << a << " validation ll=" << ll << '\n';
    if (ll > best_ll) {
      best_ll = ll;
      best_a = a;
    }
  }
  if (best_a == 0.0) throw NumericalFailure("sgld step selection: every candidate diverged");
  return best_a;
}

}  // namespace

int cmd_logreg(const LogregOptions& opt, const Context& ctx) {
  const auto raw = make_dataset(opt);
  auto [train_raw, test_raw] = train_test_split(raw, opt.test_fraction, opt.data_seed);
  const auto split = standardize(train_raw, test_raw);
  const auto& train = split.train;
  if (opt.batch > train.size()) {
    throw UsageError("--batch", "batch size " + std::to_string(opt.batch) + " exceeds the " +
                                    std::to_string(train.size()) + " training points");
  }
  const BlrPosterior post(append_intercept(train.features), train.labels,
                          GammaPrior{opt.prior_shape, opt.prior_rate}, opt.batch);
  const Matrix test_design = append_intercept(split.test.features);
  const std::uint64_t seed = ctx.common.seed;

  // Initial particles from the prior.
  Matrix init_m(opt.n, post.dim());
  RngStream init_rng(seed, kInitStream);
  for (std::size_t i = 0; i < opt.n; ++i) post.sample_prior(init_rng, init_m.row(i));
  const ParticleEnsemble init(std::move(init_m));

  Recorder rec(test_design, split.test.labels, opt.record_every, opt.iters,
               static_cast<double>(opt.batch) / static_cast<double>(train.size()), ctx.common.timing);

  SvgdConfig cfg;
  cfg.iterations = opt.iters;
  cfg.schedule = AdaGrad{opt.step, opt.rho};
  cfg.seed = seed;
  cfg.record_every = opt.record_every;
  rec.start();
  run_svgd(cfg, post, init, [&](const Snapshot& s, const MinibatchSampler*) { rec.record("svgd", s.iteration, s.ensemble); });

  Context out_ctx = ctx;
  const bool wants_sgld = std::find_if(opt.baselines.begin(), opt.baselines.end(), [](const std::string& b) {
                            return b.rfind("sgld", 0) == 0;
                          }) != opt.baselines.end();
  double sgld_a = opt.sgld_a;
  if (wants_sgld && sgld_a == 0.0) {
    sgld_a = select_sgld_a(train, opt, init, seed, ctx.out);
    out_ctx.header.push_back("# sgld_a_selected = " + fmt(sgld_a));
  }

  for (const auto& baseline : opt.baselines) {
    rec.start();
    if (baseline == "map") {
      map_gradient_ascent(init.particle(0), post, AdaGrad{opt.step, opt.rho}, opt.iters, seed,
                          [&](std::size_t t, std::span<const double> x) {
                            if (rec.due(t)) rec.record("map", t, ParticleEnsemble(1, x.size(), {x.begin(), x.end()}));
                          });
    } else if (baseline == "sgld-parallel") {
      run_sgld(sgld_config(sgld_a, opt.n, seed), post, init, opt.iters, opt.record_every,
               [&](const Snapshot& s, const MinibatchSampler*) { rec.record("sgld-parallel", s.iteration, s.ensemble); });
    } else {
      // One chain; the estimate uses its most recent n states.
      std::deque<std::vector<double>> window;
      run_sgld(sgld_config(sgld_a, 1, seed), post, first_rows(init, 1), opt.iters, 1,
               [&](const Snapshot& s, const MinibatchSampler*) {
                 const auto x = s.ensemble.particle(0);
                 window.emplace_back(x.begin(), x.end());
                 if (window.size() > opt.n) window.pop_front();
                 if (!rec.due(s.iteration)) return;
                 Matrix m(window.size(), post.dim());
                 for (std::size_t i = 0; i < window.size(); ++i)
                   for (std::size_t c = 0; c < post.dim(); ++c) m(i, c) = window[i][c];
                 rec.record("sgld-seq", s.iteration, ParticleEnsemble(std::move(m)));
               });
    }
  }

  auto file = open_output(out_ctx, "metrics.csv");
  file << "method,iteration,epoch_fraction,accuracy,avg_test_ll,wallclock_seconds\n";
  for (const auto& r : rec.rows) {
    file << r.method << ',' << r.iteration << ',' << fmt(r.epochs) << ',' << fmt(r.metrics.accuracy) << ','
         << fmt(r.metrics.avg_log_likelihood) << ',' << fmt(r.seconds) << '\n';
  }
  for (const auto& r : rec.rows) {
    if (r.iteration == opt.iters) {
      ctx.out << r.method << ": accuracy=" << fmt(r.metrics.accuracy) << " avg_test_ll=" << fmt(r.metrics.avg_log_likelihood)
              << '\n';
    }
  }
  return 0;
}

}  // namespace svgd::cli
