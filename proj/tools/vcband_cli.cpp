// Command-line frontend: synthetic benchmark runs, model fitting and band
// construction on CSV datasets, diagnostic property checks, pair-count Monte
// Carlo, and cross-validated penalty search. All file outputs are CSV with
// 17-significant-digit floats and are byte-reproducible for fixed inputs.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "vcband/csv.hpp"
#include "vcband/harness.hpp"
#include "vcband/inference.hpp"
#include "vcband/mathutil.hpp"

namespace {

using namespace vcband;
using vcband::csv::format_double;

// ---------------------------------------------------------------------------
// Shared option bundles

struct DataArgs {
  std::string x_path;
  std::string long_path;
  bool normalize = false;
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--x", a.x_path, "covariate CSV (individual_id,x_1..x_p)")
      ->required();
  cmd->add_option("--long", a.long_path,
                  "observation CSV (individual_id,time,y,z_1..z_q)")
      ->required();
  cmd->add_flag("--normalize-times", a.normalize,
                "rescale raw times onto (0,1] before fitting");
}

struct FitArgs {
  std::string target = "auto";  // auto | gamma | beta | two-stage
  double h = 0.0;
  int k_gamma = 6;
  int k_beta = 0;
  std::string diff = "paired";
  bool whiten = false;
  std::string gamma_mode = "lasso";
  std::string beta_mode = "lasso";
  double lambda_gamma = 0.0;
  double lambda_beta = 0.0;
  double lambda_scale = 2.0;
  double lambda_t = 1.0;
  double tol = 1e-7;
};

void add_fit_options(CLI::App* cmd, FitArgs& f) {
  cmd->add_option("--target", f.target,
                  "auto | gamma | beta | two-stage (auto picks from data)");
  cmd->add_option("--h", f.h, "pair bandwidth (default 1.5 / mean obs count)");
  cmd->add_option("--k_gamma", f.k_gamma, "gamma truncation level");
  cmd->add_option("--k_beta", f.k_beta,
                  "beta truncation level (default min(30, mean obs - 1))");
  cmd->add_option("--diff", f.diff, "paired | overlapping");
  cmd->add_flag("--whiten", f.whiten, "whiten overlapping differences");
  cmd->add_option("--gamma_mode", f.gamma_mode, "ls | lasso");
  cmd->add_option("--beta_mode", f.beta_mode, "ls | lasso");
  cmd->add_option("--lambda_gamma", f.lambda_gamma,
                  "gamma penalty (0 = self-tuned)");
  cmd->add_option("--lambda_beta", f.lambda_beta,
                  "shared beta penalty (0 = self-tuned per frequency)");
  cmd->add_option("--lambda_scale", f.lambda_scale,
                  "multiplier on the self-tuned penalty floors");
  cmd->add_option("--lambda_t", f.lambda_t, "penalty-floor confidence knob t");
  cmd->add_option("--tol", f.tol, "solver tolerance");
}

DiffScheme parse_diff(const std::string& v) {
  if (v == "paired") return DiffScheme::PairedA;
  if (v == "overlapping") return DiffScheme::OverlappingB;
  throw CLI::ValidationError("--diff must be paired or overlapping, got: " + v);
}

FitMode parse_mode(const std::string& v, const std::string& flag) {
  if (v == "ls") return FitMode::LeastSquares;
  if (v == "lasso") return FitMode::Lasso;
  throw CLI::ValidationError(flag + " must be ls or lasso, got: " + v);
}

double mean_obs_count(const LongitudinalDataset& d) {
  double total = 0.0;
  for (int i = 0; i < d.n(); ++i) total += d.times.m(i);
  return total / d.n();
}

void resolve_fit_defaults(FitArgs& f, const LongitudinalDataset& d) {
  if (f.target == "auto") {
    f.target = d.q() > 0 ? (d.p() > 0 ? "two-stage" : "gamma") : "beta";
  }
  const bool want_gamma = f.target == "gamma" || f.target == "two-stage";
  const bool want_beta = f.target == "beta" || f.target == "two-stage";
  if (!want_gamma && !want_beta) {
    throw CLI::ValidationError("--target must be auto, gamma, beta or two-stage");
  }
  if (want_gamma && d.q() == 0) {
    throw CLI::ValidationError("target includes gamma but the data has q = 0");
  }
  if (want_beta && d.p() == 0) {
    throw CLI::ValidationError("target includes beta but the data has p = 0");
  }
  const double mbar = mean_obs_count(d);
  if (want_gamma && f.h <= 0.0) f.h = 1.5 / mbar;
  if (want_beta && f.k_beta <= 0) {
    f.k_beta = std::max(1, std::min(30, static_cast<int>(mbar) - 1));
  }
}

// Self-tuned penalties: the gamma floor uses a scaled-lasso noise estimate on
// the differenced problem (a single difference carries twice the measurement
// noise variance, hence the sqrt(2) deflation); the beta floors use
// per-frequency scaled-lasso noise estimates as variance proxies.
FitResult run_fit(const LongitudinalDataset& d, FitArgs& f) {
  resolve_fit_defaults(f, d);
  const bool want_gamma = f.target == "gamma" || f.target == "two-stage";
  const bool want_beta = f.target == "beta" || f.target == "two-stage";

  FitResult gfit;
  if (want_gamma) {
    const DifferencedModel dm = build_differenced_model(
        d, f.h, f.k_gamma, parse_diff(f.diff), f.whiten);
    double lg = f.lambda_gamma;
    if (parse_mode(f.gamma_mode, "--gamma_mode") == FitMode::Lasso && lg <= 0.0) {
      const double cols = std::max<double>(dm.Psi.cols(), 2.0);
      const double rows = static_cast<double>(dm.Psi.rows());
      const LinearProblem prob{dm.Psi, dm.ydiff, rows};
      const double sd_diff =
          scaled_lasso(prob, 2.0 * std::sqrt(2.0 * std::log(cols) / rows), f.tol)
              .noise_sd;
      lg = f.lambda_scale *
           lambda0_differenced(dm, sd_diff / std::sqrt(2.0), f.lambda_t);
    }
    gfit = fit_gamma(dm, parse_mode(f.gamma_mode, "--gamma_mode"), lg, f.tol);
    if (!want_beta) return gfit;
  }

  const ProjectedModel pm = project_frequencies(
      d, f.k_beta, want_gamma ? ProjectionInput::Residual : ProjectionInput::Raw,
      want_gamma ? &*gfit.gamma_hat : nullptr);
  Eigen::VectorXd lambdas = Eigen::VectorXd::Zero(f.k_beta);
  if (parse_mode(f.beta_mode, "--beta_mode") == FitMode::Lasso) {
    if (f.lambda_beta > 0.0) {
      lambdas.setConstant(f.lambda_beta);
    } else {
      const Eigen::VectorXd scales = estimate_noise_scales(pm, 0.0, f.tol);
      const Eigen::MatrixXd proxies =
          Eigen::VectorXd::Ones(pm.X.rows()) * scales.cwiseAbs2().transpose();
      lambdas = f.lambda_scale * lambda0_projected(pm, proxies, f.lambda_t);
    }
  }
  FitResult out =
      fit_beta(pm, parse_mode(f.beta_mode, "--beta_mode"), lambdas, f.tol);
  if (want_gamma) {
    out.gamma_hat = std::move(gfit.gamma_hat);
    out.gamma_lambda = gfit.gamma_lambda;
    out.gamma_converged = gfit.gamma_converged;
    out.N = gfit.N;
    out.K_gamma = gfit.K_gamma;
    out.h = gfit.h;
    out.diff_scheme = gfit.diff_scheme;
  }
  return out;
}

// Five-fold cross-validated penalty for the node regression of one design
// column on the others.
double cv_node_penalty(const Eigen::MatrixXd& X, int coord, std::uint64_t seed,
                       double tol) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Eigen::MatrixXd others(n, p - 1);
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (j != coord - 1) others.col(c++) = X.col(j);
  }
  const double base =
      std::sqrt(std::log(std::max<double>(p, 2.0)) / static_cast<double>(n));
  std::vector<double> grid;
  for (double f : {4.0, 2.0, 1.0, 0.5, 0.25, 0.125}) grid.push_back(f * base);
  const LinearProblem prob{others, X.col(coord - 1), static_cast<double>(n)};
  return kfold_cv(prob, grid, 5, seed, tol).best_lambda;
}

void warn_zero_delta() {
  std::cerr << "warning: band inflation delta = 0 -- the band accounts for "
               "estimation noise only, not for the truncated tail of the "
               "coefficient expansion; pass --delta or --delta_c to widen"
            << std::endl;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_simulate(const std::string& config_path,
                 const std::vector<std::pair<std::string, std::string>>& pending,
                 std::uint64_t seed, const std::string& metrics_path,
                 const std::string& reps_path) {
  SimConfig cfg = config_path.empty() ? SimConfig{} : load_config_file(config_path);
  for (const auto& [key, value] : pending) apply_config_entry(cfg, key, value);
  cfg.rng_seed = seed;
  if (cfg.p > 0 && cfg.coord >= 1 && cfg.coord <= cfg.p && cfg.delta_c <= 0.0) {
    warn_zero_delta();
  }
  const MetricsReport report = run_simulation(cfg);
  write_metrics_csv(report, metrics_path);
  write_per_rep_csv(report, reps_path);
  std::cout << "replications=" << report.replications
            << " failures=" << report.failures
            << " average_loss_beta=" << format_double(report.average_loss_beta)
            << " average_loss_gamma=" << format_double(report.average_loss_gamma)
            << " coverage=" << format_double(report.coverage)
            << " average_length=" << format_double(report.average_length)
            << "\n";
  return 0;
}

int cmd_fit(const DataArgs& data, FitArgs& f, const std::string& out_base) {
  const LongitudinalDataset d = ingest_csv(data.x_path, data.long_path,
                                           data.normalize);
  const FitResult fit = run_fit(d, f);
  save_fit(fit, out_base);
  std::cout << "wrote " << out_base << ".manifest.csv and " << out_base
            << ".coeffs.csv\n";
  if (fit.gamma_hat) {
    std::cout << "gamma: K=" << fit.K_gamma << " h=" << format_double(fit.h)
              << " lambda=" << format_double(fit.gamma_lambda)
              << " converged=" << (fit.gamma_converged ? 1 : 0)
              << " rows=" << fit.N << "\n";
  }
  if (fit.beta_hat) {
    int converged = 0;
    for (const unsigned char flag : fit.beta_converged) converged += flag != 0;
    std::cout << "beta: K=" << fit.K_beta << " frequencies_converged="
              << converged << "/" << fit.K_beta << "\n";
  }
  return 0;
}

int cmd_band(const DataArgs& data, FitArgs& f, const std::string& fit_base,
             const std::string& target_in, int coord, double tau, double nu,
             double delta_in, double delta_alpha, double delta_c,
             int grid_points, std::uint64_t seed, const std::string& out_path) {
  const LongitudinalDataset d = ingest_csv(data.x_path, data.long_path,
                                           data.normalize);
  FitResult fit;
  if (fit_base.empty()) {
    fit = run_fit(d, f);
  } else {
    fit = load_fit(fit_base);
  }

  std::string target = target_in;
  if (target == "auto") target = fit.beta_hat ? "beta" : "gamma";

  BandResult band;
  if (target == "beta") {
    if (!fit.beta_hat) throw std::runtime_error("the fit has no beta estimate");
    const ProjectedModel pm = project_frequencies(
        d, fit.K_beta,
        fit.gamma_hat ? ProjectionInput::Residual : ProjectionInput::Raw,
        fit.gamma_hat ? &*fit.gamma_hat : nullptr);
    const Eigen::VectorXd scales = estimate_noise_scales(pm, 0.0, f.tol);
    NodewiseResult nw;
    double nu_used = nu;
    if (pm.X.cols() == 1) {
      const double sig = pm.X.col(0).squaredNorm() / pm.X.rows();
      nw.Theta = Eigen::MatrixXd::Constant(1, 1, 1.0 / sig);
      nw.tau_sq = Eigen::VectorXd::Constant(1, sig);
      nw.max_violation = 0.0;
      nu_used = 0.0;
    } else {
      if (nu_used <= 0.0) nu_used = cv_node_penalty(pm.X, coord, seed, f.tol);
      nw = nodewise_lasso(pm.X, nu_used, f.tol);
    }
    const DebiasState ds = debias_coordinate(pm, fit, nw, coord, scales, f.tol);
    const IntervalSet iv = simultaneous_intervals(ds, tau);
    double delta = delta_in;
    if (delta < 0.0) {
      delta = delta_c > 0.0 ? choose_delta(fit.K_beta, delta_alpha, delta_c) : 0.0;
    }
    if (delta == 0.0) warn_zero_delta();
    band = fourier_box_band(iv, delta);
    std::cout << "coordinate=" << coord << " nu=" << format_double(nu_used)
              << " delta=" << format_double(delta)
              << " max_remainder_bound=" << format_double(ds.delta_bound.maxCoeff())
              << "\n";
  } else if (target == "gamma") {
    if (!fit.gamma_hat) throw std::runtime_error("the fit has no gamma estimate");
    const double h = fit.h > 0.0 ? fit.h : (f.h > 0.0 ? f.h : 1.5 / mean_obs_count(d));
    const DiffScheme scheme = fit.diff_scheme == "overlapping"
                                  ? DiffScheme::OverlappingB
                                  : DiffScheme::PairedA;
    const DifferencedModel dm =
        build_differenced_model(d, h, fit.K_gamma, scheme, f.whiten);
    const int G = 2 * fit.K_gamma;
    Eigen::VectorXd tstars(G);
    for (int j = 1; j <= G; ++j) tstars(j - 1) = static_cast<double>(j) / G;
    double nu_used = nu;
    if (nu_used <= 0.0) {
      nu_used = std::sqrt(std::log(std::max<double>(dm.Psi.cols(), 2.0)) /
                          static_cast<double>(dm.Psi.rows()));
    }
    const GridIntervals gi =
        gamma_grid_intervals(dm, fit, tau, tstars, nu_used, f.tol);
    double delta = delta_in;
    if (delta < 0.0) {
      delta = delta_c > 0.0 && fit.K_gamma >= 2
                  ? choose_delta(fit.K_gamma, delta_alpha, delta_c)
                  : 0.0;
    }
    if (delta == 0.0) warn_zero_delta();
    band = sinc_grid_band(IntervalSet{gi.lower, gi.upper, gi.tau}, delta);
    std::cout << "grid_points=" << G << " nu=" << format_double(nu_used)
              << " delta=" << format_double(delta)
              << " noise_sd=" << format_double(gi.noise_sd) << "\n";
  } else {
    throw CLI::ValidationError("--target must be auto, beta or gamma");
  }
  write_band_csv(band, grid_points, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_verify(std::uint64_t seed, int max_m, int tuples, bool corrupt,
               const std::string& out_path) {
  const std::vector<LemmaReportRow> rows =
      verify_lemmas(seed, max_m, tuples, corrupt);
  bool all_pass = true;
  std::cout << "name,pass,worst\n";
  for (const auto& r : rows) {
    std::cout << r.name << "," << (r.pass ? 1 : 0) << ","
              << format_double(r.worst) << "\n";
    all_pass = all_pass && r.pass;
  }
  if (!out_path.empty()) write_lemma_csv(rows, out_path);
  return all_pass ? 0 : 1;
}

int cmd_prop1(int n, int m, double h, int reps, std::uint64_t seed, int threads) {
  const SampleSizeSummary s = sample_size_mc(n, m, h, reps, seed, threads);
  std::cout << "n,m,h,replications,mean_overlapping,mean_inv_paired,"
               "prob_all_kept\n";
  std::cout << n << "," << m << "," << format_double(h) << "," << reps << ","
            << format_double(s.mean_overlapping) << ","
            << format_double(s.mean_inv_paired) << ","
            << format_double(s.prob_all_kept) << "\n";
  return 0;
}

int cmd_cv(const DataArgs& data, FitArgs& f, const std::string& target,
           int freq, int folds, std::uint64_t seed,
           std::vector<double> grid) {
  const LongitudinalDataset d = ingest_csv(data.x_path, data.long_path,
                                           data.normalize);
  LinearProblem prob;
  if (target == "gamma") {
    if (d.q() == 0) throw CLI::ValidationError("--target gamma needs q >= 1");
    if (f.h <= 0.0) f.h = 1.5 / mean_obs_count(d);
    const DifferencedModel dm = build_differenced_model(
        d, f.h, f.k_gamma, parse_diff(f.diff), f.whiten);
    prob = LinearProblem{dm.Psi, dm.ydiff, static_cast<double>(dm.Psi.rows())};
  } else if (target == "beta") {
    if (d.p() == 0) throw CLI::ValidationError("--target beta needs p >= 1");
    if (f.k_beta <= 0) {
      f.k_beta = std::max(1, std::min(30, static_cast<int>(mean_obs_count(d)) - 1));
    }
    if (freq < 1 || freq > f.k_beta) {
      throw CLI::ValidationError("--freq must be in 1..k_beta");
    }
    const ProjectedModel pm =
        project_frequencies(d, f.k_beta, ProjectionInput::Raw);
    prob = LinearProblem{pm.X, pm.yproj.col(freq - 1),
                         static_cast<double>(pm.X.rows())};
  } else {
    throw CLI::ValidationError("--target must be gamma or beta");
  }
  if (grid.empty()) {
    const double lambda_max =
        (2.0 / prob.sample_scale) *
        (prob.design.transpose() * prob.response).cwiseAbs().maxCoeff();
    double v = lambda_max;
    for (int i = 0; i < 10; ++i, v /= 2.0) grid.push_back(v);
  }
  const CvResult res = kfold_cv(prob, grid, folds, seed, f.tol);
  std::cout << "lambda,cv_error\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::cout << format_double(grid[i]) << ","
              << format_double(res.cv_errors[i]) << "\n";
  }
  std::cout << "best_lambda," << format_double(res.best_lambda) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"varying-coefficient estimation, simultaneous bands, and "
               "simulation benchmarks"};
  // Long-only help: the short -h would collide with the --h bandwidth flag.
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);

  // simulate ----------------------------------------------------------------
  auto* sim = app.add_subcommand(
      "simulate", "run a synthetic benchmark and write metric CSVs");
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> pending;
  std::uint64_t sim_seed = 0;
  std::string metrics_path = "metrics.csv";
  std::string reps_path = "per_rep.csv";
  sim->add_option("--config", config_path, "key = value configuration file");
  static const char* kMirrorKeys[] = {
      "n", "m", "p", "q", "s_beta", "s_gamma", "basis", "scheme", "diff",
      "whiten", "h", "k_gamma", "k_beta", "gamma_mode", "beta_mode",
      "lambda_gamma", "lambda_beta", "lambda_beta_scale", "lambda_t",
      "replications", "tau", "delta_alpha", "delta_c", "nu", "sigma_eps",
      "xi", "unit_x", "coord", "grid_points", "threads"};
  for (const char* key : kMirrorKeys) {
    sim->add_option_function<std::string>(
        std::string("--") + key,
        [&pending, key](const std::string& v) { pending.emplace_back(key, v); },
        std::string("configuration key ") + key);
  }
  sim->add_option("--seed", sim_seed, "base RNG seed")->required();
  sim->add_option("--out-metrics", metrics_path, "summary CSV path");
  sim->add_option("--out-reps", reps_path, "per-replication CSV path");

  // fit ---------------------------------------------------------------------
  auto* fitc = app.add_subcommand("fit", "fit a CSV dataset and save the result");
  DataArgs fit_data;
  FitArgs fit_args;
  std::string fit_out = "fit";
  add_data_options(fitc, fit_data);
  add_fit_options(fitc, fit_args);
  fitc->add_option("--out", fit_out, "output base path (.manifest.csv/.coeffs.csv)");

  // band --------------------------------------------------------------------
  auto* bandc = app.add_subcommand(
      "band", "simultaneous confidence band from a fit and its dataset");
  DataArgs band_data;
  FitArgs band_args;
  std::string band_fit_base;
  std::string band_target = "auto";
  int band_coord = 1;
  double band_tau = 0.05;
  double band_nu = 0.0;
  double band_delta = -1.0;
  double band_delta_alpha = 2.0;
  double band_delta_c = 0.0;
  int band_grid = 512;
  std::uint64_t band_seed = 1;
  std::string band_out = "band.csv";
  add_data_options(bandc, band_data);
  add_fit_options(bandc, band_args);
  bandc->add_option("--fit", band_fit_base,
                    "load a saved fit instead of refitting");
  bandc->add_option("--band-target", band_target, "auto | beta | gamma");
  bandc->add_option("--coord", band_coord, "1-based covariate for the beta band");
  bandc->add_option("--tau", band_tau, "simultaneous level (band is 1 - tau)");
  bandc->add_option("--nu", band_nu, "node-regression penalty (0 = choose)");
  bandc->add_option("--delta", band_delta, "explicit band inflation");
  bandc->add_option("--delta_alpha", band_delta_alpha, "decay order for --delta_c");
  bandc->add_option("--delta_c", band_delta_c,
                    "inflation constant: delta = c K^-alpha log K");
  bandc->add_option("--grid-points", band_grid, "output grid size");
  bandc->add_option("--seed", band_seed, "seed for cross-validated tuning");
  bandc->add_option("--out", band_out, "band CSV path");

  // verify-lemmas -------------------------------------------------------------
  auto* ver = app.add_subcommand("verify-lemmas",
                                 "run the basis/pair-count property suites");
  std::uint64_t ver_seed = 1;
  int ver_max_m = 32;
  int ver_tuples = 500;
  bool ver_corrupt = false;
  std::string ver_out;
  ver->add_option("--seed", ver_seed, "RNG seed");
  ver->add_option("--max-m", ver_max_m, "largest grid size checked");
  ver->add_option("--tuples", ver_tuples, "random index tuples for the bound");
  ver->add_flag("--corrupt-gram", ver_corrupt,
                "negative control: perturb one closed-form value")
      ->group("");
  ver->add_option("--out", ver_out, "also write the table to this CSV");

  // prop1-mc ------------------------------------------------------------------
  auto* mc = app.add_subcommand("prop1-mc",
                                "Monte Carlo pair-count summary for random times");
  int mc_n = 0, mc_m = 0, mc_reps = 200, mc_threads = 0;
  double mc_h = 0.0;
  std::uint64_t mc_seed = 1;
  mc->add_option("--n", mc_n, "individuals")->required();
  mc->add_option("--m", mc_m, "observations per individual")->required();
  mc->add_option("--h", mc_h, "pair bandwidth")->required();
  mc->add_option("--reps", mc_reps, "Monte Carlo replications");
  mc->add_option("--seed", mc_seed, "RNG seed");
  mc->add_option("--threads", mc_threads, "worker threads (0 = hardware)");

  // cv --------------------------------------------------------------------
  auto* cvc = app.add_subcommand("cv", "k-fold cross-validated penalty search");
  DataArgs cv_data;
  FitArgs cv_args;
  std::string cv_target = "gamma";
  int cv_freq = 1, cv_folds = 5;
  std::uint64_t cv_seed = 1;
  std::vector<double> cv_grid;
  add_data_options(cvc, cv_data);
  add_fit_options(cvc, cv_args);
  cvc->add_option("--cv-target", cv_target, "gamma | beta");
  cvc->add_option("--freq", cv_freq, "frequency for --cv-target beta");
  cvc->add_option("--folds", cv_folds, "number of folds");
  cvc->add_option("--seed", cv_seed, "fold-assignment seed");
  cvc->add_option("--grid", cv_grid,
                  "explicit penalty grid (default: halvings from lambda_max)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return cmd_simulate(config_path, pending, sim_seed, metrics_path,
                          reps_path);
    }
    if (fitc->parsed()) return cmd_fit(fit_data, fit_args, fit_out);
    if (bandc->parsed()) {
      return cmd_band(band_data, band_args, band_fit_base, band_target,
                      band_coord, band_tau, band_nu, band_delta,
                      band_delta_alpha, band_delta_c, band_grid, band_seed,
                      band_out);
    }
    if (ver->parsed()) {
      return cmd_verify(ver_seed, ver_max_m, ver_tuples, ver_corrupt, ver_out);
    }
    if (mc->parsed()) {
      return cmd_prop1(mc_n, mc_m, mc_h, mc_reps, mc_seed, mc_threads);
    }
    if (cvc->parsed()) {
      return cmd_cv(cv_data, cv_args, cv_target, cv_freq, cv_folds, cv_seed,
                    cv_grid);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
