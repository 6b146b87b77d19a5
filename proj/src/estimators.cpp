#include "vcband/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vcband {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

int common_grid_size(const LongitudinalDataset& d) {
  return d.times.m(0);  // validated equal across individuals
}

Eigen::VectorXd broadcast_lambdas(const Eigen::VectorXd& lambdas, int K) {
  if (lambdas.size() == K) return lambdas;
  if (lambdas.size() == 1) return Eigen::VectorXd::Constant(K, lambdas(0));
  throw std::invalid_argument("need one penalty per frequency (or one shared)");
}

}  // namespace

void validate_dataset(const LongitudinalDataset& d) {
  const int n = d.n();
  if (n < 1) throw std::invalid_argument("dataset has no individuals");
  if (d.x.rows() != n) throw std::invalid_argument("x must have one row per individual");
  if (!d.x.allFinite()) throw std::invalid_argument("non-finite entry in x");
  if (d.z.size() != static_cast<std::size_t>(n) ||
      d.y.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("z and y must have one block per individual");
  }
  const int q = d.q();
  for (int i = 0; i < n; ++i) {
    const int mi = d.times.m(i);
    if (mi < 1) throw std::invalid_argument("individual " + std::to_string(i + 1) +
                                            " has no observations");
    if (d.y[i].size() != mi || d.z[i].rows() != mi || d.z[i].cols() != q) {
      throw std::invalid_argument("shape mismatch for individual " +
                                  std::to_string(i + 1));
    }
    if (!d.y[i].allFinite() || !d.z[i].allFinite()) {
      throw std::invalid_argument("non-finite value for individual " +
                                  std::to_string(i + 1));
    }
  }
}

DifferencedModel build_differenced_model(const LongitudinalDataset& d, double h,
                                         int K_gamma, DiffScheme scheme,
                                         bool whiten) {
  validate_dataset(d);
  const int q = d.q();
  if (q < 1) throw std::invalid_argument("differencing requires q >= 1");
  if (K_gamma < 1) throw std::invalid_argument("K_gamma must be >= 1");

  DifferencedModel dm;
  dm.plan = build_difference_plan(d.times, h, scheme);
  dm.K_gamma = K_gamma;
  dm.q = q;
  const long N = dm.plan.N();
  if (N == 0) {
    throw std::runtime_error(
        "no consecutive observations closer than h survive; increase h");
  }

  dm.Psi.resize(N, static_cast<Eigen::Index>(q) * K_gamma);
  dm.ydiff.resize(N);
  for (long r = 0; r < N; ++r) {
    const auto& pr = dm.plan.pairs[static_cast<std::size_t>(r)];
    const int i = pr.individual;
    const int lo = d.times.sort_order[i][pr.position];
    const int hi = d.times.sort_order[i][pr.position + 1];
    const double t_lo = d.times.times[i][lo];
    const double t_hi = d.times.times[i][hi];
    dm.ydiff(r) = d.y[i](hi) - d.y[i](lo);
    for (int k = 1; k <= K_gamma; ++k) {
      const double up = trig_basis(k, t_hi);
      const double down = trig_basis(k, t_lo);
      dm.Psi.row(r).segment(static_cast<Eigen::Index>(k - 1) * q, q) =
          up * d.z[i].row(hi) - down * d.z[i].row(lo);
    }
  }

  if (whiten && scheme == DiffScheme::OverlappingB) {
    const std::vector<Eigen::MatrixXd> B = whitening_matrix(d.times, dm.plan);
    long row = 0;
    for (int i = 0; i < d.n(); ++i) {
      const Eigen::Index c = B[i].rows();
      if (c == 0) continue;
      dm.Psi.middleRows(row, c) = kSqrt2 * (B[i] * dm.Psi.middleRows(row, c));
      dm.ydiff.segment(row, c) = kSqrt2 * (B[i] * dm.ydiff.segment(row, c));
      row += c;
    }
    dm.whitened = true;
  }
  return dm;
}

double lambda0_differenced(const DifferencedModel& dm, double sigma_eps,
                           double t) {
  if (sigma_eps < 0 || t < 0) throw std::invalid_argument("need sigma_eps, t >= 0");
  const double N = static_cast<double>(dm.Psi.rows());
  if (N < 1) throw std::invalid_argument("empty model");
  double max_sq = 0.0;
  for (Eigen::Index j = 0; j < dm.Psi.cols(); ++j) {
    max_sq = std::max(max_sq, dm.Psi.col(j).squaredNorm());
  }
  const double dim = static_cast<double>(dm.Psi.cols());
  return 2.0 * sigma_eps * std::sqrt(max_sq / N) *
         std::sqrt((t * t + 2.0 * std::log(dim)) / N);
}

FitResult fit_gamma(const DifferencedModel& dm, FitMode mode, double lambda,
                    double tol) {
  LinearProblem prob{dm.Psi, dm.ydiff, static_cast<double>(dm.Psi.rows())};
  Eigen::VectorXd g;
  FitResult out;
  if (mode == FitMode::LeastSquares) {
    g = ols(prob);
  } else {
    const LassoSolution sol = lasso(prob, lambda, tol);
    g = sol.coefficients;
    out.gamma_lambda = lambda;
    out.gamma_converged = sol.converged;
  }
  Eigen::MatrixXd coeffs(dm.K_gamma, dm.q);
  for (int k = 0; k < dm.K_gamma; ++k) {
    coeffs.row(k) = g.segment(static_cast<Eigen::Index>(k) * dm.q, dm.q).transpose();
  }
  out.gamma_hat = make_expansion(coeffs);
  out.N = dm.plan.N();
  out.K_gamma = dm.K_gamma;
  out.h = dm.plan.h;
  out.diff_scheme =
      dm.plan.scheme == DiffScheme::PairedA ? "paired" : "overlapping";
  return out;
}

ProjectedModel project_frequencies(const LongitudinalDataset& d, int K_beta,
                                   ProjectionInput input,
                                   const CoefficientExpansion* gamma_hat) {
  validate_dataset(d);
  if (K_beta < 1) throw std::invalid_argument("K_beta must be >= 1");
  if (input == ProjectionInput::Residual) {
    if (gamma_hat == nullptr) {
      throw std::invalid_argument("residual projection needs a gamma estimate");
    }
    if (gamma_hat->dim() != d.q() || d.q() < 1) {
      throw std::invalid_argument("gamma estimate dimension must match q >= 1");
    }
  }

  ProjectedModel pm;
  pm.K_beta = K_beta;
  pm.X = d.x;
  pm.scheme = d.times.scheme;
  if (d.times.scheme == TimeScheme::CommonGrid) {
    pm.m = common_grid_size(d);
    if (K_beta >= pm.m) {
      throw std::invalid_argument(
          "on a common grid of size m the projection separates at most m-1 "
          "frequencies; reduce K_beta");
    }
  }

  const int n = d.n();
  pm.yproj.setZero(n, K_beta);
  for (int i = 0; i < n; ++i) {
    const int mi = d.times.m(i);
    for (int j = 0; j < mi; ++j) {
      const double t = d.times.times[i][j];
      double v = d.y[i](j);
      if (input == ProjectionInput::Residual) {
        v -= d.z[i].row(j).dot(eval_expansion(*gamma_hat, t));
      }
      for (int k = 1; k <= K_beta; ++k) {
        pm.yproj(i, k - 1) += v * trig_basis(k, t);
      }
    }
    pm.yproj.row(i) /= static_cast<double>(mi);
  }
  return pm;
}

Eigen::VectorXd lambda0_projected(const ProjectedModel& pm,
                                  const Eigen::MatrixXd& variance_proxies,
                                  double t) {
  const Eigen::Index n = pm.X.rows(), p = pm.X.cols();
  if (p < 1) throw std::invalid_argument("need p >= 1 covariates");
  if (variance_proxies.rows() != n || variance_proxies.cols() != pm.K_beta) {
    throw std::invalid_argument("variance proxies must be n x K_beta");
  }
  if (variance_proxies.minCoeff() < 0 || t < 0) {
    throw std::invalid_argument("variance proxies and t must be nonnegative");
  }
  const Eigen::MatrixXd xsq = pm.X.cwiseAbs2();
  const double tail =
      std::sqrt((t * t + 2.0 * std::log(static_cast<double>(p))) /
                static_cast<double>(n));
  Eigen::VectorXd out(pm.K_beta);
  for (int k = 0; k < pm.K_beta; ++k) {
    const Eigen::VectorXd weighted =
        xsq.transpose() * variance_proxies.col(k) / static_cast<double>(n);
    out(k) = std::sqrt(weighted.maxCoeff()) * tail;
  }
  return out;
}

Eigen::VectorXd lambda0_projected_common_grid(const ProjectedModel& pm,
                                              const Eigen::VectorXd& sigma_daleth_sq,
                                              double sigma_eps, double t) {
  if (pm.scheme != TimeScheme::CommonGrid || pm.m < 2) {
    throw std::invalid_argument("common-grid penalty rule needs a common grid");
  }
  const Eigen::Index p = pm.X.cols();
  if (p < 1) throw std::invalid_argument("need p >= 1 covariates");
  if (sigma_daleth_sq.size() > 0 && sigma_daleth_sq.minCoeff() < 0) {
    throw std::invalid_argument("variances must be nonnegative");
  }
  if (sigma_eps < 0 || t < 0) throw std::invalid_argument("need sigma_eps, t >= 0");

  const int m = pm.m;
  const int L = static_cast<int>(sigma_daleth_sq.size());
  auto s = [&](int l) { return (l >= 1 && l <= L) ? sigma_daleth_sq(l - 1) : 0.0; };

  const double n = static_cast<double>(pm.X.rows());
  const double tail = std::sqrt((t * t + 2.0 * std::log(static_cast<double>(p))) / n);
  Eigen::VectorXd out(pm.K_beta);
  for (int k = 1; k <= pm.K_beta; ++k) {
    double c = s(k);
    for (int r = 1; 2 * r * m - m <= L; ++r) {
      if (k == 1) {
        c += kSqrt2 * s(2 * r * m);
      } else if (k % 2 == 0) {
        c += s(2 * r * m + k) + s(2 * r * m - k);
      } else {
        c += s(2 * r * m + k) + s(2 * r * m + 2 - k);
      }
    }
    out(k - 1) = std::sqrt(c + sigma_eps * sigma_eps / m) * tail;
  }
  return out;
}

FitResult fit_beta(const ProjectedModel& pm, FitMode mode,
                   const Eigen::VectorXd& lambdas, double tol) {
  const Eigen::Index n = pm.X.rows(), p = pm.X.cols();
  if (p < 1) throw std::invalid_argument("need p >= 1 covariates");
  FitResult out;
  out.K_beta = pm.K_beta;
  out.time_scheme = pm.scheme == TimeScheme::CommonGrid ? "common" : "random";
  Eigen::MatrixXd coeffs(pm.K_beta, p);

  if (mode == FitMode::LeastSquares) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(pm.X);
    if (qr.rank() < p) {
      throw std::runtime_error(
          "design is rank deficient: " + std::to_string(p - qr.rank()) +
          " dependent column(s)");
    }
    out.beta_converged.assign(static_cast<std::size_t>(pm.K_beta), 1);
    for (int k = 0; k < pm.K_beta; ++k) {
      coeffs.row(k) = qr.solve(pm.yproj.col(k)).transpose();
    }
  } else {
    out.beta_lambdas = broadcast_lambdas(lambdas, pm.K_beta);
    out.beta_converged.assign(static_cast<std::size_t>(pm.K_beta), 1);
    for (int k = 0; k < pm.K_beta; ++k) {
      LinearProblem prob{pm.X, pm.yproj.col(k), static_cast<double>(n)};
      const LassoSolution sol = lasso(prob, out.beta_lambdas(k), tol);
      coeffs.row(k) = sol.coefficients.transpose();
      out.beta_converged[static_cast<std::size_t>(k)] = sol.converged ? 1 : 0;
    }
  }
  out.beta_hat = make_expansion(coeffs);
  return out;
}

FitResult two_stage_fit(const LongitudinalDataset& d, const TwoStageOptions& opt) {
  validate_dataset(d);
  const int p = d.p(), q = d.q();
  if (p == 0 && q == 0) throw std::invalid_argument("p = 0 and q = 0: nothing to fit");

  if (q == 0) {
    ProjectedModel pm =
        project_frequencies(d, opt.K_beta, ProjectionInput::Raw);
    return fit_beta(pm, opt.beta_mode, opt.beta_lambdas, opt.tol);
  }

  FitResult stage1;
  if (opt.forced_gamma != nullptr) {
    stage1.gamma_hat = *opt.forced_gamma;
    stage1.K_gamma = opt.forced_gamma->K();
    stage1.h = opt.h;
  } else {
    const DifferencedModel dm =
        build_differenced_model(d, opt.h, opt.K_gamma, opt.diff_scheme, opt.whiten);
    stage1 = fit_gamma(dm, opt.gamma_mode, opt.gamma_lambda, opt.tol);
  }
  if (p == 0) return stage1;

  ProjectedModel pm = project_frequencies(d, opt.K_beta, ProjectionInput::Residual,
                                          &*stage1.gamma_hat);
  FitResult out = fit_beta(pm, opt.beta_mode, opt.beta_lambdas, opt.tol);
  out.gamma_hat = std::move(stage1.gamma_hat);
  out.gamma_lambda = stage1.gamma_lambda;
  out.gamma_converged = stage1.gamma_converged;
  out.N = stage1.N;
  out.K_gamma = stage1.K_gamma;
  out.h = opt.h;
  out.diff_scheme = stage1.diff_scheme;
  return out;
}

}  // namespace vcband
