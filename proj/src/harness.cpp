#include "vcband/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "vcband/csv.hpp"
#include "vcband/mathutil.hpp"
#include "vcband/rng.hpp"

namespace vcband {

using csv::Table;
using csv::format_double;
using csv::parse_double;
using csv::read_table;
using csv::write_row;

namespace {

constexpr int kTrigTruthRows = 30;
constexpr int kSplineTruthRows = 3;
constexpr int kSplineDegree = 2;

double trig_decay(int k) {
  return std::pow(k % 2 == 1 ? (k + 1) / 2.0 : (k + 2) / 2.0, -2.1);
}

const std::vector<double>& spline_knots() {
  static const std::vector<double> knots =
      clamped_uniform_knots(kSplineDegree, kSplineTruthRows);
  return knots;
}

// Exact Gram matrix of the three quadratic spline functions via three-point
// Gauss-Legendre (exact through degree five, and the products are quartics).
Eigen::MatrixXd spline_gram() {
  static const double offset = 0.5 * std::sqrt(3.0 / 5.0);
  const double nodes[3] = {0.5 - offset, 0.5, 0.5 + offset};
  const double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(kSplineTruthRows, kSplineTruthRows);
  for (int q = 0; q < 3; ++q) {
    Eigen::VectorXd b(kSplineTruthRows);
    for (int j = 0; j < kSplineTruthRows; ++j) {
      b(j) = bspline_basis(kSplineDegree, spline_knots(), j, nodes[q]);
    }
    g.noalias() += weights[q] * b * b.transpose();
  }
  return g;
}

int parse_int_value(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse integer for '" + key + "': " + v);
  }
}

std::uint64_t parse_u64_value(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const std::uint64_t out = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse seed for '" + key + "': " + v);
  }
}

double parse_num_value(const std::string& v, const std::string& key) {
  return parse_double(v, "value of '" + key + "'");
}

bool parse_bool_value(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw std::invalid_argument("cannot parse boolean for '" + key + "': " + v);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string sanitize_field(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

}  // namespace

void apply_config_entry(SimConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "n") cfg.n = parse_int_value(value, key);
  else if (key == "m") cfg.m = parse_int_value(value, key);
  else if (key == "p") cfg.p = parse_int_value(value, key);
  else if (key == "q") cfg.q = parse_int_value(value, key);
  else if (key == "s_beta") cfg.s_beta = parse_int_value(value, key);
  else if (key == "s_gamma") cfg.s_gamma = parse_int_value(value, key);
  else if (key == "basis") {
    if (value == "trig") cfg.basis = TruthBasis::Trig;
    else if (value == "bspline") cfg.basis = TruthBasis::BSpline;
    else throw std::invalid_argument("basis must be trig or bspline, got: " + value);
  } else if (key == "scheme") {
    if (value == "common") cfg.scheme = TimeScheme::CommonGrid;
    else if (value == "random") cfg.scheme = TimeScheme::RandomUniform;
    else throw std::invalid_argument("scheme must be common or random, got: " + value);
  } else if (key == "diff") {
    if (value == "paired") cfg.diff = DiffScheme::PairedA;
    else if (value == "overlapping") cfg.diff = DiffScheme::OverlappingB;
    else throw std::invalid_argument("diff must be paired or overlapping, got: " + value);
  } else if (key == "whiten") cfg.whiten = parse_bool_value(value, key);
  else if (key == "h") cfg.h = parse_num_value(value, key);
  else if (key == "k_gamma") cfg.K_gamma = parse_int_value(value, key);
  else if (key == "k_beta") cfg.K_beta = parse_int_value(value, key);
  else if (key == "gamma_mode" || key == "beta_mode") {
    FitMode mode;
    if (value == "ls") mode = FitMode::LeastSquares;
    else if (value == "lasso") mode = FitMode::Lasso;
    else throw std::invalid_argument(key + " must be ls or lasso, got: " + value);
    (key == "gamma_mode" ? cfg.gamma_mode : cfg.beta_mode) = mode;
  } else if (key == "lambda_gamma") cfg.lambda_gamma = parse_num_value(value, key);
  else if (key == "lambda_beta") cfg.lambda_beta = parse_num_value(value, key);
  else if (key == "lambda_beta_scale") cfg.lambda_beta_scale = parse_num_value(value, key);
  else if (key == "lambda_t") cfg.lambda_t = parse_num_value(value, key);
  else if (key == "replications") cfg.replications = parse_int_value(value, key);
  else if (key == "rng_seed") cfg.rng_seed = parse_u64_value(value, key);
  else if (key == "tau") cfg.tau = parse_num_value(value, key);
  else if (key == "delta_alpha") cfg.delta_alpha = parse_num_value(value, key);
  else if (key == "delta_c") cfg.delta_c = parse_num_value(value, key);
  else if (key == "nu") cfg.nu = parse_num_value(value, key);
  else if (key == "sigma_eps") cfg.sigma_eps = parse_num_value(value, key);
  else if (key == "xi") cfg.xi = parse_bool_value(value, key);
  else if (key == "unit_x") cfg.unit_x = parse_bool_value(value, key);
  else if (key == "coord") cfg.coord = parse_int_value(value, key);
  else if (key == "grid_points") cfg.grid_points = parse_int_value(value, key);
  else if (key == "threads") cfg.threads = parse_int_value(value, key);
  else throw std::invalid_argument("unknown configuration key '" + key + "'");
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  SimConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": expected key = value");
    }
    try {
      apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " +
                                  e.what());
    }
  }
  return cfg;
}

double Truth::basis_value(int k, double t) const {
  if (basis == TruthBasis::Trig) return trig_basis(k, t);
  return bspline_basis(kSplineDegree, spline_knots(), k - 1, t);
}

Eigen::VectorXd Truth::beta_at(double t) const {
  Eigen::VectorXd b(rows());
  for (int k = 1; k <= rows(); ++k) b(k - 1) = basis_value(k, t);
  return beta_coeffs.transpose() * b;
}

Eigen::VectorXd Truth::gamma_at(double t) const {
  Eigen::VectorXd b(rows());
  for (int k = 1; k <= rows(); ++k) b(k - 1) = basis_value(k, t);
  return gamma_coeffs.transpose() * b;
}

Eigen::MatrixXd Truth::trig_coeffs(const Eigen::MatrixXd& coeffs, int K) const {
  const Eigen::Index d = coeffs.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(K, d);
  if (basis == TruthBasis::Trig) {
    const int copy = std::min<int>(K, static_cast<int>(coeffs.rows()));
    out.topRows(copy) = coeffs.topRows(copy);
    return out;
  }
  // L2 projection of the spline signal onto the trigonometric system by
  // composite trapezoid quadrature.
  const int nodes = 32768;
  for (int j = 0; j <= nodes; ++j) {
    const double t = static_cast<double>(j) / nodes;
    const double w = (j == 0 || j == nodes ? 0.5 : 1.0) / nodes;
    Eigen::VectorXd bs(kSplineTruthRows);
    for (int r = 0; r < kSplineTruthRows; ++r) {
      bs(r) = bspline_basis(kSplineDegree, spline_knots(), r, t);
    }
    const Eigen::VectorXd f = coeffs.transpose() * bs;
    const Eigen::VectorXd phi = trig_basis_vector(K, t);
    out.noalias() += w * phi * f.transpose();
  }
  return out;
}

Truth generate_truth(const SimConfig& cfg) {
  if (cfg.n < 1 || cfg.m < 1) throw std::invalid_argument("need n, m >= 1");
  if (cfg.p < 0 || cfg.q < 0) throw std::invalid_argument("need p, q >= 0");
  Truth truth;
  truth.basis = cfg.basis;
  const int rows = cfg.basis == TruthBasis::Trig ? kTrigTruthRows : kSplineTruthRows;

  Eigen::VectorXd decay(rows);
  for (int k = 1; k <= rows; ++k) {
    decay(k - 1) = cfg.basis == TruthBasis::Trig ? trig_decay(k) : 1.0;
  }

  Rng rng(derive_seed(cfg.rng_seed, 0));
  const Eigen::MatrixXd gram = cfg.basis == TruthBasis::BSpline
                                   ? spline_gram()
                                   : Eigen::MatrixXd::Identity(rows, rows);

  auto draw_block = [&](int dim, int sparsity) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(rows, dim);
    const int s = std::min(sparsity, dim);
    for (int k = 0; k < rows; ++k) {
      for (int l = 0; l < s; ++l) {
        block(k, l) = rng.uniform(-1.0, 1.0) * decay(k);
      }
    }
    // Expected integrated squared signal under isotropic covariates equals
    // the Gram-weighted squared norm of the coefficients; rescale it to 4.
    const double total = (block.transpose() * gram * block).trace();
    if (total > 0.0) block *= 2.0 / std::sqrt(total);
    return block;
  };

  truth.beta_coeffs = draw_block(cfg.p, cfg.s_beta);
  truth.gamma_coeffs = draw_block(cfg.q, cfg.s_gamma);

  // Random-effect coefficient scale: integrated variance 1 under independent
  // U(-1,1) draws (variance scale^2 / 3 per coefficient).
  truth.xi_scale = decay;
  const double var_total = (decay.cwiseAbs2().asDiagonal() * gram).trace() / 3.0;
  truth.xi_scale *= 1.0 / std::sqrt(var_total);
  return truth;
}

LongitudinalDataset simulate_dataset(const SimConfig& cfg, const Truth& truth,
                                     int rep_index) {
  const std::uint64_t seed = derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(rep_index) + 1);
  LongitudinalDataset d;
  d.times = generate_times(cfg.scheme, cfg.n, cfg.m, derive_seed(seed, 1));

  if (cfg.unit_x) {
    d.x = Eigen::MatrixXd::Ones(cfg.n, cfg.p);
  } else {
    Rng rx(derive_seed(seed, 2));
    d.x.resize(cfg.n, cfg.p);
    for (int i = 0; i < cfg.n; ++i) {
      for (int j = 0; j < cfg.p; ++j) d.x(i, j) = rx.normal();
    }
  }

  Rng rz(derive_seed(seed, 3));
  d.z.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    d.z[i].resize(d.times.m(i), cfg.q);
    for (int j = 0; j < d.times.m(i); ++j) {
      for (int l = 0; l < cfg.q; ++l) d.z[i](j, l) = rz.normal();
    }
  }

  Rng rxi(derive_seed(seed, 4));
  std::vector<Eigen::VectorXd> xi_coef;
  if (cfg.xi) {
    xi_coef.resize(cfg.n);
    for (int i = 0; i < cfg.n; ++i) {
      xi_coef[i].resize(truth.rows());
      for (int k = 0; k < truth.rows(); ++k) {
        xi_coef[i](k) = truth.xi_scale(k) * rxi.uniform(-1.0, 1.0);
      }
    }
  }

  // On a common grid the signal depends on j only; cache per grid position.
  const bool common = cfg.scheme == TimeScheme::CommonGrid;
  std::vector<Eigen::VectorXd> beta_cache(common ? cfg.m : 0);
  std::vector<Eigen::VectorXd> gamma_cache(common ? cfg.m : 0);
  std::vector<Eigen::VectorXd> basis_cache(common ? cfg.m : 0);
  if (common) {
    for (int j = 0; j < cfg.m; ++j) {
      const double t = d.times.times[0][j];
      beta_cache[j] = truth.beta_at(t);
      gamma_cache[j] = truth.gamma_at(t);
      basis_cache[j].resize(truth.rows());
      for (int k = 1; k <= truth.rows(); ++k) {
        basis_cache[j](k - 1) = truth.basis_value(k, t);
      }
    }
  }

  Rng re(derive_seed(seed, 5));
  d.y.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    const int mi = d.times.m(i);
    d.y[i].resize(mi);
    for (int j = 0; j < mi; ++j) {
      const double t = d.times.times[i][j];
      Eigen::VectorXd bvals;
      const Eigen::VectorXd* beta_t;
      const Eigen::VectorXd* gamma_t;
      Eigen::VectorXd beta_tmp, gamma_tmp;
      if (common) {
        beta_t = &beta_cache[j];
        gamma_t = &gamma_cache[j];
      } else {
        beta_tmp = truth.beta_at(t);
        gamma_tmp = truth.gamma_at(t);
        beta_t = &beta_tmp;
        gamma_t = &gamma_tmp;
      }
      double v = 0.0;
      if (cfg.p > 0) v += d.x.row(i).dot(*beta_t);
      if (cfg.q > 0) v += d.z[i].row(j).dot(*gamma_t);
      if (cfg.xi) {
        if (common) {
          v += xi_coef[i].dot(basis_cache[j]);
        } else {
          bvals.resize(truth.rows());
          for (int k = 1; k <= truth.rows(); ++k) {
            bvals(k - 1) = truth.basis_value(k, t);
          }
          v += xi_coef[i].dot(bvals);
        }
      }
      if (cfg.sigma_eps > 0.0) v += cfg.sigma_eps * re.normal();
      d.y[i](j) = v;
    }
  }
  return d;
}

namespace {

// Five-fold cross-validated penalty for the node regression of the band
// coordinate's design column on the remaining columns.
double cv_node_penalty(const Eigen::MatrixXd& X, int coord, std::uint64_t seed,
                       double tol) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Eigen::MatrixXd others(n, p - 1);
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (j != coord - 1) others.col(c++) = X.col(j);
  }
  const double base = std::sqrt(std::log(std::max<double>(p, 2.0)) /
                                static_cast<double>(n));
  std::vector<double> grid;
  for (double f : {4.0, 2.0, 1.0, 0.5, 0.25, 0.125}) grid.push_back(f * base);
  LinearProblem prob{others, X.col(coord - 1), static_cast<double>(n)};
  return kfold_cv(prob, grid, 5, seed, tol).best_lambda;
}

double quadrature_function_ise(const CoefficientExpansion& est, const Truth& truth,
                               const Eigen::MatrixXd& coeffs) {
  const int nodes = 1024;
  double total = 0.0;
  for (int j = 0; j <= nodes; ++j) {
    const double t = static_cast<double>(j) / nodes;
    const double w = (j == 0 || j == nodes ? 0.5 : 1.0) / nodes;
    Eigen::VectorXd b(truth.rows());
    for (int k = 1; k <= truth.rows(); ++k) b(k - 1) = truth.basis_value(k, t);
    const Eigen::VectorXd diff = eval_expansion(est, t) - coeffs.transpose() * b;
    total += w * diff.squaredNorm();
  }
  return total;
}

struct RepContext {
  const SimConfig* cfg;
  const Truth* truth;
  const Eigen::MatrixXd* beta_truth_trig;
  const Eigen::MatrixXd* gamma_truth_trig;
  const Eigen::VectorXd* grid;
  const Eigen::VectorXd* truth_on_grid;  // band coordinate of the truth
};

RepOutcome run_one(const RepContext& ctx, int rep) {
  const SimConfig& cfg = *ctx.cfg;
  RepOutcome out;
  out.rep = rep;
  const double tol = 1e-7;
  try {
    const LongitudinalDataset d = simulate_dataset(cfg, *ctx.truth, rep);
    CoefficientExpansion gamma_hat;
    bool have_gamma = false;

    if (cfg.q > 0) {
      const DifferencedModel dm =
          build_differenced_model(d, cfg.h, cfg.K_gamma, cfg.diff, cfg.whiten);
      double lg = 0.0;
      if (cfg.gamma_mode == FitMode::Lasso) {
        lg = cfg.lambda_gamma > 0.0
                 ? cfg.lambda_gamma
                 : 2.0 * lambda0_differenced(dm, cfg.sigma_eps, cfg.lambda_t);
        out.lambda_gamma_used = lg;
      }
      const FitResult gfit = fit_gamma(dm, cfg.gamma_mode, lg, tol);
      gamma_hat = *gfit.gamma_hat;
      have_gamma = true;
      out.loss_gamma = ise_between(
          gamma_hat, make_expansion(*ctx.gamma_truth_trig));
    }

    if (cfg.p > 0) {
      const ProjectedModel pm = project_frequencies(
          d, cfg.K_beta, have_gamma ? ProjectionInput::Residual : ProjectionInput::Raw,
          have_gamma ? &gamma_hat : nullptr);
      const Eigen::VectorXd scales = estimate_noise_scales(pm, 0.0, tol);

      Eigen::VectorXd lambdas = Eigen::VectorXd::Zero(cfg.K_beta);
      if (cfg.beta_mode == FitMode::Lasso) {
        if (cfg.lambda_beta > 0.0) {
          lambdas.setConstant(cfg.lambda_beta);
        } else if (pm.scheme == TimeScheme::CommonGrid &&
                   cfg.basis == TruthBasis::Trig) {
          // Known-truth synthetic penalty floor on the common grid.
          Eigen::VectorXd daleth_sq =
              Eigen::VectorXd::Zero(ctx.truth->rows());
          if (cfg.xi) daleth_sq = ctx.truth->xi_scale.cwiseAbs2() / 3.0;
          lambdas = cfg.lambda_beta_scale *
                    lambda0_projected_common_grid(pm, daleth_sq, cfg.sigma_eps,
                                                  cfg.lambda_t);
        } else {
          // Data-driven floor from the estimated per-frequency noise scales.
          const Eigen::MatrixXd proxies =
              Eigen::VectorXd::Ones(pm.X.rows()) *
              scales.cwiseAbs2().transpose();
          lambdas = cfg.lambda_beta_scale *
                    lambda0_projected(pm, proxies, cfg.lambda_t);
        }
      }
      const FitResult bfit = fit_beta(pm, cfg.beta_mode, lambdas, tol);
      out.loss_beta =
          ise_between(*bfit.beta_hat, make_expansion(*ctx.beta_truth_trig));
      out.loss_beta_raw =
          cfg.basis == TruthBasis::Trig
              ? out.loss_beta
              : quadrature_function_ise(*bfit.beta_hat, *ctx.truth,
                                        ctx.truth->beta_coeffs);

      if (cfg.coord >= 1 && cfg.coord <= cfg.p) {
        NodewiseResult nw;
        if (cfg.p == 1) {
          const double sig = pm.X.col(0).squaredNorm() / pm.X.rows();
          nw.Theta = Eigen::MatrixXd::Constant(1, 1, 1.0 / sig);
          nw.tau_sq = Eigen::VectorXd::Constant(1, sig);
          nw.max_violation = 0.0;
          out.nu_used = 0.0;
        } else {
          const std::uint64_t cv_seed =
              derive_seed(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(rep) + 1), 6);
          const double nu = cfg.nu > 0.0
                                ? cfg.nu
                                : cv_node_penalty(pm.X, cfg.coord, cv_seed, tol);
          out.nu_used = nu;
          nw = nodewise_lasso(pm.X, nu, tol, 1);
        }
        const DebiasState ds =
            debias_coordinate(pm, bfit, nw, cfg.coord, scales, tol);
        const IntervalSet iv = simultaneous_intervals(ds, cfg.tau);
        const double delta =
            cfg.delta_c > 0.0
                ? choose_delta(cfg.K_beta, cfg.delta_alpha, cfg.delta_c)
                : 0.0;
        out.delta_used = delta;
        const BandResult band = fourier_box_band(iv, delta);

        bool covered = true;
        double length = 0.0;
        for (Eigen::Index g = 0; g < ctx.grid->size(); ++g) {
          const double t = (*ctx.grid)(g);
          const double lo = band.lower(t), up = band.upper(t);
          const double target = (*ctx.truth_on_grid)(g);
          if (target < lo || target > up) covered = false;
          length = std::max(length, up - lo);
        }
        out.covered = covered ? 1 : 0;
        out.length = length;
      }
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

}  // namespace

MetricsReport run_simulation(const SimConfig& raw_cfg) {
  SimConfig cfg = raw_cfg;
  if (cfg.p == 0 && cfg.q == 0) {
    throw std::invalid_argument("p = 0 and q = 0: nothing to fit");
  }
  if (cfg.replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (cfg.grid_points < 1) throw std::invalid_argument("grid_points must be >= 1");
  if (cfg.h <= 0.0) cfg.h = 1.5 / cfg.m;
  if (cfg.K_beta <= 0) cfg.K_beta = std::min(kTrigTruthRows, cfg.m - 1);

  const Truth truth = generate_truth(cfg);
  const Eigen::MatrixXd beta_truth_trig =
      truth.trig_coeffs(truth.beta_coeffs, kTrigTruthRows);
  const Eigen::MatrixXd gamma_truth_trig =
      truth.trig_coeffs(truth.gamma_coeffs, kTrigTruthRows);
  const Eigen::VectorXd grid = report_grid(cfg.grid_points);
  Eigen::VectorXd truth_on_grid = Eigen::VectorXd::Zero(grid.size());
  if (cfg.p > 0 && cfg.coord >= 1 && cfg.coord <= cfg.p) {
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
      truth_on_grid(g) = truth.beta_at(grid(g))(cfg.coord - 1);
    }
  }

  RepContext ctx{&cfg, &truth, &beta_truth_trig, &gamma_truth_trig, &grid,
                 &truth_on_grid};
  MetricsReport report;
  report.reps.resize(static_cast<std::size_t>(cfg.replications));
  parallel_for(
      static_cast<std::size_t>(cfg.replications),
      [&](std::size_t r) {
        report.reps[r] = run_one(ctx, static_cast<int>(r));
      },
      cfg.threads);

  double sum_lb = 0, sum_lg = 0, sum_len = 0;
  int n_lb = 0, n_lg = 0, n_band = 0, n_cov = 0;
  for (const RepOutcome& r : report.reps) {
    if (r.failed) {
      ++report.failures;
      continue;
    }
    if (std::isfinite(r.loss_beta)) { sum_lb += r.loss_beta; ++n_lb; }
    if (std::isfinite(r.loss_gamma)) { sum_lg += r.loss_gamma; ++n_lg; }
    if (r.covered >= 0) {
      ++n_band;
      n_cov += r.covered;
      sum_len += r.length;
    }
  }
  report.replications = cfg.replications - report.failures;
  if (n_lb > 0) report.average_loss_beta = sum_lb / n_lb;
  if (n_lg > 0) report.average_loss_gamma = sum_lg / n_lg;
  if (n_band > 0) {
    report.coverage = static_cast<double>(n_cov) / n_band;
    report.average_length = sum_len / n_band;
  }
  return report;
}

void write_metrics_csv(const MetricsReport& report, const std::string& path) {
  auto os = open_output(path);
  write_row(os, {"replications", "failures", "average_loss_beta",
                 "average_loss_gamma", "coverage", "average_length"});
  write_row(os, {std::to_string(report.replications),
                 std::to_string(report.failures),
                 format_double(report.average_loss_beta),
                 format_double(report.average_loss_gamma),
                 format_double(report.coverage),
                 format_double(report.average_length)});
}

void write_per_rep_csv(const MetricsReport& report, const std::string& path) {
  auto os = open_output(path);
  write_row(os, {"rep", "failed", "error", "loss_beta", "loss_beta_raw",
                 "loss_gamma", "covered", "length", "lambda_gamma", "nu",
                 "delta"});
  for (const RepOutcome& r : report.reps) {
    write_row(os, {std::to_string(r.rep), r.failed ? "1" : "0",
                   sanitize_field(r.error), format_double(r.loss_beta),
                   format_double(r.loss_beta_raw), format_double(r.loss_gamma),
                   std::to_string(r.covered), format_double(r.length),
                   format_double(r.lambda_gamma_used), format_double(r.nu_used),
                   format_double(r.delta_used)});
  }
}

std::vector<LemmaReportRow> verify_lemmas(std::uint64_t seed, int max_m,
                                          int tuples, bool corrupt_gram) {
  std::vector<LemmaReportRow> rows;

  {  // Closed-form grid products against direct sums.
    double worst = 0.0;
    for (int m = 2; m <= max_m; ++m) {
      for (int k = 1; k <= m - 1; ++k) {
        for (int l = 1; l <= 6 * m; ++l) {
          long double direct = 0.0L;
          for (int j = 1; j <= m; ++j) {
            const double t = static_cast<double>(j) / m;
            direct += static_cast<long double>(trig_basis(k, t)) * trig_basis(l, t);
          }
          direct /= m;
          double closed = discrete_gram(k, l, m);
          if (corrupt_gram && m == 2 && k == 1 && l == 1) closed += 1e-6;
          worst = std::max(worst, std::abs(static_cast<double>(direct) - closed));
        }
      }
    }
    rows.push_back({"grid_product_closed_form", worst <= 1e-10, worst});
  }

  {  // Sampling a truncated expansion on the grid folds high frequencies
     // onto low ones exactly as the closed-form fold coefficients predict.
    Rng rng(derive_seed(seed, 1));
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const int m = 4 + trial % 13;
      const int L = 6 * m;
      Eigen::MatrixXd coef(L, 1);
      for (int l = 0; l < L; ++l) coef(l, 0) = rng.uniform(-1.0, 1.0);
      const CoefficientExpansion expansion = make_expansion(coef);
      const CoefficientExpansion folded =
          aliasing_coefficients(expansion, m, m - 1);
      for (int k = 1; k <= m - 1; ++k) {
        long double direct = 0.0L;
        for (int j = 1; j <= m; ++j) {
          const double t = static_cast<double>(j) / m;
          long double f = 0.0L;
          for (int l = 1; l <= L; ++l) {
            f += static_cast<long double>(coef(l - 1, 0)) * trig_basis(l, t);
          }
          direct += f * trig_basis(k, t);
        }
        direct /= m;
        const double predicted = coef(k - 1, 0) + folded.coeffs(k - 1, 0);
        worst = std::max(
            worst, std::abs(static_cast<double>(direct) - predicted));
      }
    }
    rows.push_back({"grid_fold_identity", worst <= 1e-12, worst});
  }

  {  // Quartic-product integral bound on random index tuples.
    Rng rng(derive_seed(seed, 2));
    int failures = 0;
    for (int t = 0; t < tuples; ++t) {
      const int a = 1 + static_cast<int>(rng.next_u64() % 12);
      const int b = 1 + static_cast<int>(rng.next_u64() % 12);
      const int k = 1 + static_cast<int>(rng.next_u64() % 12);
      const int l = 1 + static_cast<int>(rng.next_u64() % 12);
      if (!fourth_moment_bound_check(a, b, k, l, 64)) ++failures;
    }
    rows.push_back({"quartic_moment_bound", failures == 0,
                    static_cast<double>(failures)});
  }

  {  // Pair-count regimes under independent uniform times.
    double worst = 1.0;
    const int ns[4] = {50, 100, 200, 400};
    for (int i = 0; i < 4; ++i) {
      const double mean =
          sample_size_mc(ns[i], 2, 0.1, 200, derive_seed(seed, 3 + i))
              .mean_overlapping;
      const double ratio = mean / (ns[i] * 0.1);
      worst = std::max(worst, std::max(ratio, 1.0 / ratio));
    }
    rows.push_back({"pair_count_sparse_regime", worst <= 4.0, worst});
  }
  {
    const double mean =
        sample_size_mc(50, 100, 1e-4, 200, derive_seed(seed, 7)).mean_overlapping;
    const double ratio = mean / (50.0 * 100.0 * 100.0 * 1e-4);
    const double worst = std::max(ratio, 1.0 / ratio);
    rows.push_back({"pair_count_dense_regime", worst <= 4.0, worst});
  }
  {
    const double prob =
        sample_size_mc(20, 200, 0.2, 200, derive_seed(seed, 8)).prob_all_kept;
    rows.push_back({"pair_count_saturated_regime", prob >= 0.95, prob});
  }
  return rows;
}

void write_lemma_csv(const std::vector<LemmaReportRow>& rows,
                     const std::string& path) {
  auto os = open_output(path);
  write_row(os, {"name", "pass", "worst"});
  for (const auto& r : rows) {
    write_row(os, {r.name, r.pass ? "1" : "0", format_double(r.worst)});
  }
}

namespace {

std::vector<int> stable_order(const std::vector<double>& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return v[a] < v[b]; });
  return idx;
}

void expect_header(const Table& t, std::size_t col, const std::string& name) {
  if (col >= t.header.size() || t.header[col] != name) {
    throw std::runtime_error(t.path + ": expected column " +
                             std::to_string(col + 1) + " to be '" + name + "'");
  }
}

}  // namespace

LongitudinalDataset ingest_csv(const std::string& x_path,
                               const std::string& long_path,
                               bool normalize_times) {
  const Table tx = read_table(x_path);
  expect_header(tx, 0, "individual_id");
  const int p = static_cast<int>(tx.header.size()) - 1;
  for (int j = 1; j <= p; ++j) expect_header(tx, j, "x_" + std::to_string(j));

  std::map<std::string, int> index;
  const int n = static_cast<int>(tx.rows.size());
  if (n == 0) throw std::runtime_error(x_path + ": no individuals");
  Eigen::MatrixXd x(n, p);
  std::vector<std::string> ids(n);
  for (int i = 0; i < n; ++i) {
    const auto& row = tx.rows[i];
    ids[i] = row[0];
    if (!index.emplace(row[0], i).second) {
      throw std::runtime_error(x_path + ":" + std::to_string(tx.line_of(i)) +
                               ": duplicate individual '" + row[0] + "'");
    }
    for (int j = 0; j < p; ++j) {
      x(i, j) = parse_double(row[j + 1],
                             x_path + ":" + std::to_string(tx.line_of(i)));
    }
  }

  const Table tl = read_table(long_path);
  expect_header(tl, 0, "individual_id");
  expect_header(tl, 1, "time");
  expect_header(tl, 2, "y");
  const int q = static_cast<int>(tl.header.size()) - 3;
  for (int j = 1; j <= q; ++j) expect_header(tl, j + 2, "z_" + std::to_string(j));

  std::vector<std::vector<double>> times(n);
  std::vector<std::vector<double>> yv(n);
  std::vector<std::vector<Eigen::VectorXd>> zv(n);
  std::vector<std::vector<int>> obs_line(n);
  for (std::size_t r = 0; r < tl.rows.size(); ++r) {
    const auto& row = tl.rows[r];
    const std::string where = long_path + ":" + std::to_string(tl.line_of(r));
    const auto it = index.find(row[0]);
    if (it == index.end()) {
      throw std::runtime_error(where + ": unknown individual '" + row[0] + "'");
    }
    const int i = it->second;
    times[i].push_back(parse_double(row[1], where));
    yv[i].push_back(parse_double(row[2], where));
    Eigen::VectorXd z(q);
    for (int j = 0; j < q; ++j) z(j) = parse_double(row[j + 3], where);
    zv[i].push_back(z);
    obs_line[i].push_back(tl.line_of(r));
  }

  for (int i = 0; i < n; ++i) {
    if (times[i].empty()) {
      throw std::runtime_error(long_path + ": individual '" + ids[i] +
                               "' from " + x_path + " has no observations");
    }
  }

  if (normalize_times) {
    std::vector<double> all;
    for (const auto& v : times) all.insert(all.end(), v.begin(), v.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    if (all.size() < 2) {
      throw std::runtime_error(long_path +
                               ": cannot normalize a single distinct time");
    }
    const double lo = all.front();
    const double span = all.back() - all.front();
    const double scale =
        span * static_cast<double>(all.size()) / (all.size() - 1.0);
    for (auto& v : times) {
      for (double& t : v) t = (t - lo) / scale;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < times[i].size(); ++j) {
      if (!(times[i][j] >= 0.0 && times[i][j] <= 1.0)) {
        throw std::runtime_error(long_path + ":" +
                                 std::to_string(obs_line[i][j]) +
                                 ": time outside [0,1]" +
                                 (normalize_times ? " after normalization" : ""));
      }
    }
  }

  LongitudinalDataset d;
  d.times.scheme = TimeScheme::RandomUniform;  // irregular container
  d.times.times = times;
  d.times.sort_order.resize(n);
  for (int i = 0; i < n; ++i) d.times.sort_order[i] = stable_order(times[i]);
  d.x = x;
  d.z.resize(n);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const int mi = static_cast<int>(times[i].size());
    d.z[i].resize(mi, q);
    d.y[i].resize(mi);
    for (int j = 0; j < mi; ++j) {
      d.y[i](j) = yv[i][j];
      if (q > 0) d.z[i].row(j) = zv[i][j].transpose();
    }
  }
  validate_dataset(d);
  return d;
}

void export_dataset(const LongitudinalDataset& d, const std::string& x_path,
                    const std::string& long_path) {
  validate_dataset(d);
  const int n = d.n(), p = d.p(), q = d.q();
  {
    auto os = open_output(x_path);
    std::vector<std::string> header{"individual_id"};
    for (int j = 1; j <= p; ++j) header.push_back("x_" + std::to_string(j));
    write_row(os, header);
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> row{std::to_string(i + 1)};
      for (int j = 0; j < p; ++j) row.push_back(format_double(d.x(i, j)));
      write_row(os, row);
    }
  }
  {
    auto os = open_output(long_path);
    std::vector<std::string> header{"individual_id", "time", "y"};
    for (int j = 1; j <= q; ++j) header.push_back("z_" + std::to_string(j));
    write_row(os, header);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d.times.m(i); ++j) {
        std::vector<std::string> row{std::to_string(i + 1),
                                     format_double(d.times.times[i][j]),
                                     format_double(d.y[i](j))};
        for (int l = 0; l < q; ++l) row.push_back(format_double(d.z[i](j, l)));
        write_row(os, row);
      }
    }
  }
}

void save_fit(const FitResult& fit, const std::string& basepath) {
  {
    auto os = open_output(basepath + ".manifest.csv");
    write_row(os, {"key", "value"});
    const std::string target = fit.gamma_hat && fit.beta_hat ? "two_stage"
                               : fit.gamma_hat               ? "gamma"
                                                             : "beta";
    write_row(os, {"target", target});
    write_row(os, {"K_gamma", std::to_string(fit.K_gamma)});
    write_row(os, {"K_beta", std::to_string(fit.K_beta)});
    write_row(os, {"h", format_double(fit.h)});
    write_row(os, {"N", std::to_string(fit.N)});
    write_row(os, {"gamma_lambda", format_double(fit.gamma_lambda)});
    write_row(os, {"gamma_converged", fit.gamma_converged ? "1" : "0"});
    write_row(os, {"time_scheme", fit.time_scheme});
    write_row(os, {"diff_scheme", fit.diff_scheme});
    for (Eigen::Index k = 0; k < fit.beta_lambdas.size(); ++k) {
      write_row(os, {"beta_lambda_" + std::to_string(k + 1),
                     format_double(fit.beta_lambdas(k))});
    }
    for (std::size_t k = 0; k < fit.beta_converged.size(); ++k) {
      write_row(os, {"beta_converged_" + std::to_string(k + 1),
                     fit.beta_converged[k] ? "1" : "0"});
    }
  }
  {
    auto os = open_output(basepath + ".coeffs.csv");
    write_row(os, {"component", "frequency", "coordinate", "value"});
    auto dump = [&](const char* name, const CoefficientExpansion& e) {
      for (int k = 1; k <= e.K(); ++k) {
        for (int c = 1; c <= e.dim(); ++c) {
          write_row(os, {name, std::to_string(k), std::to_string(c),
                         format_double(e.coeffs(k - 1, c - 1))});
        }
      }
    };
    if (fit.gamma_hat) dump("gamma", *fit.gamma_hat);
    if (fit.beta_hat) dump("beta", *fit.beta_hat);
  }
}

FitResult load_fit(const std::string& basepath) {
  const Table manifest = read_table(basepath + ".manifest.csv");
  if (manifest.header != std::vector<std::string>{"key", "value"}) {
    throw std::runtime_error(manifest.path + ": expected key,value header");
  }
  std::map<std::string, std::string> kv;
  for (const auto& row : manifest.rows) kv[row[0]] = row[1];
  auto need = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw std::runtime_error(manifest.path + ": missing key '" + key + "'");
    }
    return it->second;
  };

  FitResult fit;
  fit.K_gamma = parse_int_value(need("K_gamma"), "K_gamma");
  fit.K_beta = parse_int_value(need("K_beta"), "K_beta");
  fit.h = parse_double(need("h"), "h");
  fit.N = parse_int_value(need("N"), "N");
  fit.gamma_lambda = parse_double(need("gamma_lambda"), "gamma_lambda");
  fit.gamma_converged = need("gamma_converged") == "1";
  fit.time_scheme = kv.count("time_scheme") ? kv["time_scheme"] : "";
  fit.diff_scheme = kv.count("diff_scheme") ? kv["diff_scheme"] : "";
  std::vector<double> lambdas;
  for (int k = 1; kv.count("beta_lambda_" + std::to_string(k)); ++k) {
    lambdas.push_back(parse_double(kv["beta_lambda_" + std::to_string(k)],
                                   "beta_lambda"));
  }
  fit.beta_lambdas =
      Eigen::Map<const Eigen::VectorXd>(lambdas.data(), lambdas.size());
  for (int k = 1; kv.count("beta_converged_" + std::to_string(k)); ++k) {
    fit.beta_converged.push_back(
        kv["beta_converged_" + std::to_string(k)] == "1" ? 1 : 0);
  }

  const Table coeffs = read_table(basepath + ".coeffs.csv");
  if (coeffs.header !=
      std::vector<std::string>{"component", "frequency", "coordinate", "value"}) {
    throw std::runtime_error(coeffs.path + ": unexpected header");
  }
  int gamma_dim = 0, beta_dim = 0;
  for (const auto& row : coeffs.rows) {
    const int c = parse_int_value(row[2], "coordinate");
    if (row[0] == "gamma") gamma_dim = std::max(gamma_dim, c);
    else if (row[0] == "beta") beta_dim = std::max(beta_dim, c);
    else throw std::runtime_error(coeffs.path + ": unknown component " + row[0]);
  }
  Eigen::MatrixXd gm = Eigen::MatrixXd::Zero(fit.K_gamma, gamma_dim);
  Eigen::MatrixXd bm = Eigen::MatrixXd::Zero(fit.K_beta, beta_dim);
  for (std::size_t r = 0; r < coeffs.rows.size(); ++r) {
    const auto& row = coeffs.rows[r];
    const std::string where = coeffs.path + ":" + std::to_string(coeffs.line_of(r));
    const int k = parse_int_value(row[1], "frequency");
    const int c = parse_int_value(row[2], "coordinate");
    Eigen::MatrixXd& target = row[0] == "gamma" ? gm : bm;
    if (k < 1 || k > target.rows() || c < 1 || c > target.cols()) {
      throw std::runtime_error(where + ": index outside declared truncation");
    }
    target(k - 1, c - 1) = parse_double(row[3], where);
  }
  if (gamma_dim > 0) fit.gamma_hat = make_expansion(gm);
  if (beta_dim > 0) fit.beta_hat = make_expansion(bm);
  const std::string target = need("target");
  if ((target == "gamma" || target == "two_stage") && !fit.gamma_hat) {
    throw std::runtime_error(basepath + ": manifest promises gamma coefficients");
  }
  if ((target == "beta" || target == "two_stage") && !fit.beta_hat) {
    throw std::runtime_error(basepath + ": manifest promises beta coefficients");
  }
  return fit;
}

Eigen::VectorXd report_grid(int points) {
  if (points < 1) throw std::invalid_argument("need at least one grid point");
  Eigen::VectorXd grid(points);
  for (int g = 1; g <= points; ++g) {
    grid(g - 1) = (g - 0.5) / points;
  }
  return grid;
}

void write_band_csv(const BandResult& band, int grid_points,
                    const std::string& path) {
  auto os = open_output(path);
  write_row(os, {"t", "l", "u", "l_delta", "u_delta", "estimate"});
  const Eigen::VectorXd grid = report_grid(grid_points);
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    const double t = grid(g);
    write_row(os, {format_double(t), format_double(band.lower_raw(t)),
                   format_double(band.upper_raw(t)), format_double(band.lower(t)),
                   format_double(band.upper(t)), format_double(band.estimate(t))});
  }
}

}  // namespace vcband
