// Command-line front end: Monte Carlo risk sweeps, predictive-density
// slices, and the verification suites, all driven by an INI config.
// Exit code 0 = success / all checks passed, 1 = a check failed or a
// runtime error occurred, 2 = bad usage or bad config.

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "klpred/config.hpp"
#include "klpred/predictive.hpp"
#include "klpred/risk.hpp"
#include "klpred/rng.hpp"
#include "klpred/util.hpp"
#include "klpred/verify.hpp"

namespace {

using namespace klpred;

struct Options {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  unsigned threads = 0;
  bool seed_given = false;
  bool n_given = false;
  bool threads_given = false;
};

std::uint64_t resolve_seed(const Options& opt, const Config& cfg) {
  if (opt.seed_given) return opt.seed;
  return cfg.u64_or("mc", "seed", 20251106);
}

std::uint64_t resolve_n(const Options& opt, const Config& cfg) {
  if (opt.n_given) return opt.n;
  return cfg.u64_or("mc", "n", 100000);
}

unsigned resolve_threads(const Options& opt, const Config& cfg) {
  if (opt.threads_given) return opt.threads;
  return static_cast<unsigned>(cfg.integer_or("mc", "threads", 1));
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write output file: " + out_path);
  f << text;
}

Eigen::VectorXd sweep_direction(const Config& cfg, int p) {
  Eigen::VectorXd dir;
  if (cfg.has("sweep", "direction")) {
    dir = cfg.vec("sweep", "direction");
    if (dir.size() != p) {
      throw std::invalid_argument("[sweep] direction dimension mismatch");
    }
  } else {
    dir = Eigen::VectorXd::Zero(p);
    dir(0) = 1.0;
  }
  const double norm = dir.norm();
  if (norm == 0.0) {
    throw std::invalid_argument("[sweep] direction must be nonzero");
  }
  return dir / norm;
}

int run_risk_sweep(const Config& cfg, const Options& opt) {
  const GaussianModel model = model_from_config(cfg);
  std::vector<std::string> estimators{"difference"};
  if (cfg.has("sweep", "estimators")) {
    estimators = cfg.str_list("sweep", "estimators");
  }
  bool needs_prior = false;
  for (const auto& e : estimators) {
    if (e == "bayes" || e == "difference") {
      needs_prior = true;
    } else if (e != "uniform" && e != "plugin") {
      throw std::invalid_argument("unknown estimator '" + e + "'");
    }
  }
  Prior prior;
  if (needs_prior) prior = prior_from_config(cfg, model);

  const Eigen::VectorXd dir = sweep_direction(cfg, model.p);
  const std::vector<double> norms = cfg.num_list("sweep", "norms");
  const std::uint64_t n = resolve_n(opt, cfg);
  const std::uint64_t master = resolve_seed(opt, cfg);
  const unsigned threads = resolve_threads(opt, cfg);

  const std::size_t count = norms.size() * estimators.size();
  std::vector<RiskEstimate> results(count);
  std::vector<std::exception_ptr> errors(count);
  parallel_for(count, threads, [&](std::size_t i) {
    try {
      const std::size_t norm_idx = i / estimators.size();
      const std::string& est = estimators[i % estimators.size()];
      const Eigen::VectorXd mu = norms[norm_idx] * dir;
      const std::uint64_t seed = substream_seed(master, norm_idx, est);
      if (est == "uniform") {
        results[i] = kl_risk({model, UniformKind{}}, mu, n, seed);
      } else if (est == "plugin") {
        results[i] = kl_risk({model, PlugInKind{}}, mu, n, seed);
      } else if (est == "bayes") {
        results[i] = kl_risk({model, BayesKind{prior}}, mu, n, seed);
      } else {
        results[i] = risk_difference(prior, model, mu, n, seed);
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::string csv = "mu_norm,estimator,mean,std_error,n,seed\n";
  for (std::size_t i = 0; i < count; ++i) {
    const RiskEstimate& r = results[i];
    csv += format_double(norms[i / estimators.size()]);
    csv += ',';
    csv += estimators[i % estimators.size()];
    csv += ',';
    csv += format_double(r.mean);
    csv += ',';
    csv += format_double(r.std_error);
    csv += ',';
    csv += std::to_string(r.n);
    csv += ',';
    csv += std::to_string(r.seed);
    csv += '\n';
  }
  write_output(opt.out_path, csv);
  return 0;
}

int run_density_slice(const Config& cfg, const Options& opt) {
  const GaussianModel model = model_from_config(cfg);
  const std::string which = cfg.str_or("slice", "density", "bayes");
  PredictiveDensity density{model, UniformKind{}};
  if (which == "bayes") {
    density.kind = BayesKind{prior_from_config(cfg, model)};
  } else if (which == "plugin") {
    density.kind = PlugInKind{};
  } else if (which != "uniform") {
    throw std::invalid_argument("unknown density '" + which + "'");
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.p);
  if (cfg.has("slice", "x")) x = cfg.vec("slice", "x");

  SliceGrid grid;
  grid.axis1 = cfg.integer_or("slice", "axis1", grid.axis1);
  grid.axis2 = cfg.integer_or("slice", "axis2", grid.axis2);
  grid.min1 = cfg.num_or("slice", "min1", grid.min1);
  grid.max1 = cfg.num_or("slice", "max1", grid.max1);
  grid.min2 = cfg.num_or("slice", "min2", grid.min2);
  grid.max2 = cfg.num_or("slice", "max2", grid.max2);
  grid.n1 = cfg.integer_or("slice", "n1", grid.n1);
  grid.n2 = cfg.integer_or("slice", "n2", grid.n2);

  Eigen::VectorXd anchor;
  if (cfg.has("slice", "anchor")) anchor = cfg.vec("slice", "anchor");

  const SliceTable table =
      density_slice(density, x, grid, anchor, resolve_threads(opt, cfg));
  write_output(opt.out_path, slice_to_csv(table));
  return 0;
}

ScanGrid scan_grid_from(const Config& cfg, const Options& opt) {
  ScanGrid grid;
  grid.seed = resolve_seed(opt, cfg);
  return grid;
}

int run_verify(const Config& cfg, const Options& opt,
               const std::string& suite) {
  const GaussianModel model = model_from_config(cfg);
  const unsigned threads = resolve_threads(opt, cfg);
  std::string report;

  if (suite == "corollary1-rate") {
    std::vector<double> grid{1e2, 1e3, 1e4};
    if (cfg.has("verify", "sigma2_grid")) {
      grid = cfg.num_list("verify", "sigma2_grid");
    }
    const RateReport rep = corollary1_rate(model, grid);
    report = "corollary1-rate: slope=" + format_double(rep.slope) +
             (rep.pass ? " pass\n" : " FAIL\n");
    std::string csv = "sigma2,gap\n";
    for (std::size_t i = 0; i < rep.sigma2.size(); ++i) {
      csv += format_double(rep.sigma2[i]);
      csv += ',';
      csv += format_double(rep.gap[i]);
      csv += '\n';
    }
    std::fputs(report.c_str(), stdout);
    if (!opt.out_path.empty()) write_output(opt.out_path, csv);
    return rep.pass ? 0 : 1;
  }

  const Prior prior = prior_from_config(cfg, model);

  if (suite == "superharmonic") {
    const std::string mode_name = cfg.str_or("verify", "mode", "sqrt-m");
    ScanMode mode;
    if (mode_name == "m") {
      mode = ScanMode::M;
    } else if (mode_name == "sqrt-m") {
      mode = ScanMode::SqrtM;
    } else {
      throw std::invalid_argument("unknown scan mode '" + mode_name + "'");
    }
    const ScanReport rep =
        superharmonic_scan(prior, model, mode, scan_grid_from(cfg, opt),
                           threads);
    report = "superharmonic " + mode_name + ": points=" +
             std::to_string(rep.points_tested) + " max_violation=" +
             format_double(rep.max_violation) + " tol=" +
             format_double(rep.tolerance) + (rep.pass ? " pass\n" : " FAIL\n");
    std::fputs(report.c_str(), stdout);
    if (!opt.out_path.empty()) write_output(opt.out_path, scan_to_csv(rep));
    return rep.pass ? 0 : 1;
  }

  if (suite == "heat" || suite == "identity") {
    const std::vector<GridPoint> points =
        scan_points(prior, model, scan_grid_from(cfg, opt));
    std::vector<double> values(points.size());
    std::vector<std::exception_ptr> errors(points.size());
    const bool analytic_rhs = prior.get_if<UniformPrior>() != nullptr ||
                              prior.get_if<GaussianPrior>() != nullptr ||
                              prior.get_if<HarmonicPrior>() != nullptr;
    parallel_for(points.size(), threads, [&](std::size_t i) {
      try {
        if (suite == "heat") {
          values[i] = heat_residual(prior, points[i].z, points[i].v);
        } else {
          const IdentitySides s =
              check_identity_18_19(prior, points[i].z, points[i].v);
          values[i] = std::abs(s.lhs - s.rhs) /
                      std::max({std::abs(s.lhs), std::abs(s.rhs), 1.0});
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    double worst = 0.0;
    for (double x : values) worst = std::max(worst, x);
    const double tol =
        suite == "heat" ? 1e-5 : (analytic_rhs ? 1e-10 : 1e-4);
    const bool pass = worst <= tol;
    report = suite + ": points=" + std::to_string(points.size()) +
             (suite == "heat" ? " max_residual=" : " max_rel_gap=") +
             format_double(worst) + " tol=" + format_double(tol) +
             (pass ? " pass\n" : " FAIL\n");
    std::fputs(report.c_str(), stdout);
    if (!opt.out_path.empty()) {
      std::string csv = "z_norm,v,value\n";
      for (std::size_t i = 0; i < points.size(); ++i) {
        csv += format_double(points[i].z_norm);
        csv += ',';
        csv += format_double(points[i].v);
        csv += ',';
        csv += format_double(values[i]);
        csv += '\n';
      }
      write_output(opt.out_path, csv);
    }
    return pass ? 0 : 1;
  }

  if (suite == "theorem2") {
    const auto* sm = prior.get_if<ScaleMixturePrior>();
    const auto* st = sm ? std::get_if<StrawdermanMixing>(&sm->h) : nullptr;
    if (st == nullptr) {
      throw std::invalid_argument(
          "theorem2 needs a scale-mixture prior with strawderman mixing");
    }
    const Theorem2Report rep =
        check_theorem2(canonical_strawderman_input(st->a, model.p));
    report = "theorem2: margin=" + format_double(rep.budget_margin);
    if (rep.pass_at_boundary) report += " (at boundary)";
    report += rep.pass ? " pass\n" : " FAIL\n";
    for (const auto& f : rep.failures) {
      report += "  ";
      report += f;
      report += '\n';
    }
    std::fputs(report.c_str(), stdout);
    if (!opt.out_path.empty()) write_output(opt.out_path, report);
    return rep.pass ? 0 : 1;
  }

  if (suite == "lemma1") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(model.p);
    if (cfg.has("verify", "x")) x = cfg.vec("verify", "x");
    const Lemma1Report rep = check_lemma1(prior, model, x, resolve_n(opt, cfg),
                                          resolve_seed(opt, cfg));
    double gap = 0.0;
    for (int j = 0; j < model.p; ++j) {
      gap = std::max(gap,
                     std::abs(rep.predictive_mean(j) - rep.brown_mean(j)));
    }
    report = "lemma1: integral=" + format_double(rep.integral_mean) + " (se=" +
             format_double(rep.integral_std_error) + ") max_mean_gap=" +
             format_double(gap) + (rep.pass ? " pass\n" : " FAIL\n");
    std::fputs(report.c_str(), stdout);
    if (!opt.out_path.empty()) write_output(opt.out_path, report);
    return rep.pass ? 0 : 1;
  }

  // eq25
  const double v = cfg.num_or("verify", "v", model.v_x);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(model.p);
  if (cfg.has("verify", "mu")) mu = cfg.vec("verify", "mu");
  const Eq25Sides sides =
      check_eq25(prior, v, mu, resolve_n(opt, cfg), resolve_seed(opt, cfg));
  const double combined = std::hypot(sides.lhs.std_error, sides.rhs.std_error);
  const bool pass =
      std::abs(sides.lhs.mean - sides.rhs.mean) <= 3.0 * combined;
  report = "eq25: lhs=" + format_double(sides.lhs.mean) + " (se=" +
           format_double(sides.lhs.std_error) + ") rhs=" +
           format_double(sides.rhs.mean) + " (se=" +
           format_double(sides.rhs.std_error) + ")" +
           (pass ? " pass\n" : " FAIL\n");
  std::fputs(report.c_str(), stdout);
  if (!opt.out_path.empty()) write_output(opt.out_path, report);
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive-density risk experiments for the Gaussian model"};
  app.require_subcommand(1);

  Options opt;
  std::string suite;
  auto* sweep = app.add_subcommand(
      "risk-sweep", "KL-risk estimates over a grid of mean norms");
  auto* slice = app.add_subcommand(
      "density-slice", "Predictive density over a two-coordinate grid");
  auto* verify = app.add_subcommand("verify", "Run one verification suite");
  verify->add_option("suite", suite, "One of: heat, identity, superharmonic, "
                                     "theorem2, lemma1, eq25, corollary1-rate")
      ->required()
      ->check(CLI::IsMember({"heat", "identity", "superharmonic", "theorem2",
                             "lemma1", "eq25", "corollary1-rate"}));

  for (CLI::App* cmd : {sweep, slice, verify}) {
    cmd->add_option("--config", opt.config_path, "INI config file")
        ->required();
    cmd->add_option("--out", opt.out_path, "Output CSV path (default stdout)");
    cmd->add_option("--seed", opt.seed, "Master seed");
    cmd->add_option("--n", opt.n, "Monte Carlo sample count");
    cmd->add_option("--threads", opt.threads,
                    "Worker threads (0 = hardware)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* cmd = app.get_subcommands().front();
  opt.seed_given = cmd->count("--seed") > 0;
  opt.n_given = cmd->count("--n") > 0;
  opt.threads_given = cmd->count("--threads") > 0;

  try {
    const klpred::Config cfg = klpred::Config::load(opt.config_path);
    if (cmd == sweep) return run_risk_sweep(cfg, opt);
    if (cmd == slice) return run_density_slice(cfg, opt);
    return run_verify(cfg, opt, suite);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
