#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>

#include "commands.hpp"
#include "svgd/ksd.hpp"
#include "svgd/targets.hpp"

namespace svgd::cli {
namespace {

constexpr std::uint64_t kFisherStream = 0x6669;

struct CheckRow {
  TheoryCheckReport report;
  std::string criterion;
  bool pass;
};

CheckRow kl_row(const std::string& name, const TheoryCheckReport& r, const TheoryOptions& opt) {
  CheckRow row{r, "rel_error <= " + fmt(opt.kl_threshold), r.rel_error <= opt.kl_threshold};
  row.report.name = name;
  return row;
}

CheckRow mc_row(const std::string& name, const TheoryCheckReport& r, const TheoryOptions& opt) {
  const bool pass = r.abs_error <= opt.se_multiple * r.standard_error || r.abs_error <= 1e-12;
  CheckRow row{r, "abs_error <= " + fmt(opt.se_multiple) + " SE", pass};
  row.report.name = name;
  return row;
}

nlohmann::json to_json(const CheckRow& row) {
  const auto& r = row.report;
  return {{"name", r.name},
          {"method", r.method},
          {"analytic", r.analytic},
          {"numeric", r.numeric},
          {"abs_error", r.abs_error},
          {"rel_error", r.rel_error},
          {"standard_error", r.standard_error},
          {"quadrature_nodes", r.quadrature_nodes},
          {"fd_step", r.fd_step},
          {"samples", r.samples},
          {"criterion", row.criterion},
          {"pass", row.pass}};
}

}  // namespace

int cmd_theory_check(const TheoryOptions& opt, const Context& ctx) {
  KlCheckOptions kl;
  kl.fd_step = opt.fd_step;
  kl.min_nodes = opt.nodes;
  kl.tolerance = opt.tolerance;

  const Gaussian1D q{0.0, 1.0};
  const auto shifted = GaussianMixture::isotropic(1, 1.0, 1.0);
  const auto mixture = GaussianMixture::toy_bimodal();
  const ScalarField constant{[](double) { return 1.0; }, [](double) { return 0.0; }};
  const ScalarField linear{[](double x) { return x; }, [](double) { return 1.0; }};
  const ScalarField bump{[](double x) { return std::exp(-0.5 * x * x); },
                         [](double x) { return -x * std::exp(-0.5 * x * x); }};

  std::vector<CheckRow> rows;
  rows.push_back(kl_row("kl q=N(0,1) p=N(1,1) phi=1", kl_perturbation_gradient_check(q, shifted, constant, kl), opt));
  rows.push_back(kl_row("kl q=N(0,1) p=N(1,1) phi=x", kl_perturbation_gradient_check(q, shifted, linear, kl), opt));
  rows.push_back(
      kl_row("kl q=N(0,1) p=gmm phi=exp(-x^2/2)", kl_perturbation_gradient_check(q, mixture, bump, kl), opt));

  const struct {
    const char* label;
    Gaussian1D p;
  } pairs[] = {{"p=N(0,1)", {0.0, 1.0}}, {"p=N(1,1)", {1.0, 1.0}}, {"p=N(0,4)", {0.0, 4.0}}};
  std::uint64_t stream = 0;
  for (const auto& pair : pairs) {
    RngStream rng(ctx.common.seed, kFisherStream + stream++);
    rows.push_back(mc_row(std::string("fisher-identity q=N(0,1) ") + pair.label,
                          fisher_identity_check(q, pair.p, opt.samples, rng), opt));
  }
  for (const auto& pair : pairs) {
    RngStream rng(ctx.common.seed, kFisherStream + stream++);
    const auto mc = fisher_divergence_monte_carlo(q, pair.p, opt.samples, rng);
    TheoryCheckReport r;
    r.analytic = fisher_divergence_gaussian(q, pair.p);
    r.numeric = mc.mean;
    r.abs_error = std::abs(r.analytic - r.numeric);
    r.rel_error = r.abs_error / std::max(1.0, std::abs(r.analytic));
    r.method = "closed form vs Monte Carlo over q";
    r.samples = mc.samples;
    r.standard_error = mc.standard_error;
    rows.push_back(mc_row(std::string("fisher-closed-form q=N(0,1) ") + pair.label, r, opt));
  }

  bool all_pass = true;
  for (const auto& r : rows) all_pass = all_pass && r.pass;

  {
    auto file = open_output(ctx, "theory_check.csv");
    file << "name,method,analytic,numeric,abs_error,rel_error,standard_error,quadrature_nodes,fd_step,samples,"
            "criterion,pass\n";
    for (const auto& row : rows) {
      const auto& r = row.report;
      file << '"' << r.name << "\",\"" << r.method << "\"," << fmt(r.analytic) << ',' << fmt(r.numeric) << ','
           << fmt(r.abs_error) << ',' << fmt(r.rel_error) << ',' << fmt(r.standard_error) << ','
           << r.quadrature_nodes << ',' << fmt(r.fd_step) << ',' << r.samples << ",\"" << row.criterion << "\","
           << (row.pass ? "true" : "false") << '\n';
    }
  }

  if (opt.json) {
    nlohmann::json report;
    nlohmann::json config = nlohmann::json::array();
    for (const auto& line : ctx.header) config.push_back(line.substr(2));
    report["config"] = config;
    report["checks"] = nlohmann::json::array();
    for (const auto& row : rows) report["checks"].push_back(to_json(row));
    report["all_pass"] = all_pass;
    const std::string text = report.dump(2);
    std::ofstream(ctx.common.out_dir / "theory_check.json", std::ios::binary) << text << '\n';
    ctx.out << text << '\n';
  } else {
    char line[256];
    std::snprintf(line, sizeof line, "%-44s %24s %24s %11s %6s\n", "check", "analytic", "numeric", "rel_error",
                  "status");
    ctx.out << line;
    for (const auto& row : rows) {
      const auto& r = row.report;
      std::snprintf(line, sizeof line, "%-44s %24.17g %24.17g %11.3e %6s\n", r.name.c_str(), r.analytic, r.numeric,
                    r.rel_error, row.pass ? "PASS" : "FAIL");
      ctx.out << line;
    }
    ctx.out << (all_pass ? "all checks passed\n" : "some checks failed\n");
  }
  return all_pass ? 0 : 1;
}

}  // namespace svgd::cli
