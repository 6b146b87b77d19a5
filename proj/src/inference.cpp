#include "vcband/inference.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "vcband/basis.hpp"
#include "vcband/mathutil.hpp"

namespace vcband {

Eigen::VectorXd estimate_noise_scales(const ProjectedModel& pm, double lambda0,
                                      double tol) {
  const Eigen::Index n = pm.X.rows(), p = pm.X.cols();
  if (p < 1) throw std::invalid_argument("need p >= 1 covariates");
  if (lambda0 <= 0.0) {
    lambda0 = 2.0 * std::sqrt(2.0 * std::log(std::max<double>(p, 2.0)) /
                              static_cast<double>(n));
  }
  Eigen::VectorXd scales(pm.K_beta);
  for (int k = 0; k < pm.K_beta; ++k) {
    LinearProblem prob{pm.X, pm.yproj.col(k), static_cast<double>(n)};
    scales(k) = scaled_lasso(prob, lambda0, tol).noise_sd;
  }
  return scales;
}

DebiasState debias_coordinate(const ProjectedModel& pm, const FitResult& fit,
                              const NodewiseResult& nodewise, int coord,
                              const Eigen::VectorXd& noise_scales, double tol) {
  const Eigen::Index n = pm.X.rows(), p = pm.X.cols();
  if (!fit.beta_hat || fit.beta_hat->K() < pm.K_beta ||
      fit.beta_hat->dim() != p) {
    throw std::invalid_argument("fit is missing frequency coefficients");
  }
  if (coord < 1 || coord > p) throw std::invalid_argument("coordinate out of range");
  if (nodewise.Theta.rows() != p || nodewise.Theta.cols() != p) {
    throw std::invalid_argument("relaxed inverse must be p x p");
  }
  const bool penalized = fit.beta_lambdas.size() == pm.K_beta;

  DebiasState ds;
  ds.coord = coord;
  ds.n = n;
  ds.theta_row = nodewise.Theta.row(coord - 1).transpose();
  ds.max_violation = nodewise.max_violation;
  ds.theta_sigma_theta =
      ds.theta_row.dot(pm.X.transpose() * (pm.X * ds.theta_row)) /
      static_cast<double>(n);
  ds.debiased.resize(pm.K_beta);
  ds.delta_bound.setZero(pm.K_beta);

  for (int k = 0; k < pm.K_beta; ++k) {
    const Eigen::VectorXd beta_k = fit.beta_hat->coeffs.row(k).transpose();
    const Eigen::VectorXd resid = pm.yproj.col(k) - pm.X * beta_k;
    ds.debiased(k) = beta_k(coord - 1) +
                     ds.theta_row.dot(pm.X.transpose() * resid) /
                         static_cast<double>(n);
    if (penalized && fit.beta_lambdas(k) > 0.0) {
      LinearProblem prob{pm.X, pm.yproj.col(k), static_cast<double>(n)};
      const LassoSolution refit = lasso(prob, 2.0 * fit.beta_lambdas(k), tol);
      ds.delta_bound(k) = ds.max_violation *
                          (beta_k - refit.coefficients).lpNorm<1>() *
                          std::sqrt(static_cast<double>(n));
    }
  }

  ds.noise_scales =
      noise_scales.size() > 0 ? noise_scales : estimate_noise_scales(pm, 0.0, tol);
  if (ds.noise_scales.size() != pm.K_beta || ds.noise_scales.minCoeff() <= 0.0) {
    throw std::invalid_argument("need one positive noise scale per frequency");
  }
  return ds;
}

IntervalSet simultaneous_intervals(const DebiasState& ds, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must be in (0,1)");
  const int K = static_cast<int>(ds.debiased.size());
  const double z = normal_upper_quantile(tau / (2.0 * K));
  IntervalSet out;
  out.tau = tau;
  out.lower.resize(K);
  out.upper.resize(K);
  for (int k = 0; k < K; ++k) {
    const double half = z * ds.noise_scales(k) / std::sqrt(static_cast<double>(ds.n));
    out.lower(k) = ds.debiased(k) - half;
    out.upper(k) = ds.debiased(k) + half;
  }
  return out;
}

double BandResult::weight(int k, double t) const {
  if (kind == BandKind::FourierBox) return trig_basis(k, t);
  return sinc_kernel(static_cast<double>(terms()) * t - k);
}

double BandResult::upper_raw(double t) const {
  double s = 0.0;
  for (int k = 1; k <= terms(); ++k) {
    const double w = weight(k, t);
    s += (w >= 0.0 ? b(k - 1) : a(k - 1)) * w;
  }
  return s;
}

double BandResult::lower_raw(double t) const {
  double s = 0.0;
  for (int k = 1; k <= terms(); ++k) {
    const double w = weight(k, t);
    s += (w >= 0.0 ? a(k - 1) : b(k - 1)) * w;
  }
  return s;
}

double BandResult::estimate(double t) const {
  double s = 0.0;
  for (int k = 1; k <= terms(); ++k) {
    s += 0.5 * (a(k - 1) + b(k - 1)) * weight(k, t);
  }
  return s;
}

namespace {

BandResult make_band(BandKind kind, const IntervalSet& intervals, double delta) {
  if (delta < 0.0) throw std::invalid_argument("delta must be >= 0");
  if (intervals.lower.size() != intervals.upper.size() ||
      intervals.lower.size() == 0) {
    throw std::invalid_argument("need matching nonempty interval ends");
  }
  if ((intervals.upper - intervals.lower).minCoeff() < 0.0) {
    throw std::invalid_argument("interval ends are crossed");
  }
  BandResult band;
  band.kind = kind;
  band.a = intervals.lower;
  band.b = intervals.upper;
  band.tau = intervals.tau;
  band.delta = delta;
  return band;
}

}  // namespace

BandResult fourier_box_band(const IntervalSet& intervals, double delta) {
  return make_band(BandKind::FourierBox, intervals, delta);
}

BandResult sinc_grid_band(const IntervalSet& grid_intervals, double delta) {
  return make_band(BandKind::SincGrid, grid_intervals, delta);
}

double choose_delta(int K, double alpha, double c) {
  if (K < 2) throw std::invalid_argument("K must be >= 2");
  if (alpha < 2.0) throw std::invalid_argument("alpha must be >= 2");
  if (c < 0.0) throw std::invalid_argument("c must be >= 0");
  return c * std::pow(static_cast<double>(K), -alpha) * std::log(static_cast<double>(K));
}

GridIntervals gamma_grid_intervals(const DifferencedModel& dm,
                                   const FitResult& fit, double tau,
                                   const Eigen::VectorXd& tstars, double nu,
                                   double tol, int threads) {
  if (!fit.gamma_hat || fit.gamma_hat->K() != dm.K_gamma ||
      fit.gamma_hat->dim() != dm.q) {
    throw std::invalid_argument("fit is missing frequency coefficients");
  }
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must be in (0,1)");
  if (nu < 0.0) throw std::invalid_argument("nu must be >= 0");
  const int G = static_cast<int>(tstars.size());
  if (G < 1) throw std::invalid_argument("need at least one grid point");
  for (int g = 0; g < G; ++g) {
    if (!(tstars(g) > 0.0 && tstars(g) <= 1.0)) {
      throw std::invalid_argument("grid points must lie in (0, 1]");
    }
  }

  const Eigen::Index N = dm.Psi.rows();
  const Eigen::Index P = dm.Psi.cols();
  const double scaleN = static_cast<double>(N);

  // Flatten the fitted expansion back to the stacked coefficient vector.
  Eigen::VectorXd ghat(P);
  for (int k = 0; k < dm.K_gamma; ++k) {
    ghat.segment(static_cast<Eigen::Index>(k) * dm.q, dm.q) =
        fit.gamma_hat->coeffs.row(k).transpose();
  }
  const Eigen::VectorXd resid = dm.ydiff - dm.Psi * ghat;
  const Eigen::VectorXd psi_t_resid = dm.Psi.transpose() * resid;

  // Residual-noise scale of the differenced problem, self-tuned.
  const double lambda0 =
      2.0 * std::sqrt(2.0 * std::log(std::max<double>(P, 2.0)) / scaleN);
  LinearProblem full{dm.Psi, dm.ydiff, scaleN};
  const double noise_sd = scaled_lasso(full, lambda0, tol).noise_sd;

  // Relaxed-inverse rows for the coordinate-1 position of each frequency
  // block: node regression of that column on all the others.
  Eigen::MatrixXd theta_rows(dm.K_gamma, P);
  std::vector<std::string> errors(static_cast<std::size_t>(dm.K_gamma));
  parallel_for(
      static_cast<std::size_t>(dm.K_gamma),
      [&](std::size_t idx) {
        const Eigen::Index col = static_cast<Eigen::Index>(idx) * dm.q;
        Eigen::MatrixXd others(N, P - 1);
        Eigen::Index c = 0;
        for (Eigen::Index j = 0; j < P; ++j) {
          if (j != col) others.col(c++) = dm.Psi.col(j);
        }
        LinearProblem node{others, dm.Psi.col(col), scaleN};
        const LassoSolution nf = lasso(node, nu, tol);
        const double rss = (dm.Psi.col(col) - others * nf.coefficients).squaredNorm();
        const double tau_sq = rss / scaleN + nu * nf.coefficients.lpNorm<1>();
        if (tau_sq <= 0.0) {
          errors[idx] = "zero residual variance in node regression " +
                        std::to_string(col + 1);
          return;
        }
        Eigen::VectorXd row = Eigen::VectorXd::Zero(P);
        row(col) = 1.0 / tau_sq;
        c = 0;
        for (Eigen::Index j = 0; j < P; ++j) {
          if (j == col) continue;
          row(j) = -nf.coefficients(c++) / tau_sq;
        }
        theta_rows.row(static_cast<Eigen::Index>(idx)) = row.transpose();
      },
      threads);
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }

  const double z = normal_upper_quantile(tau / (2.0 * G));
  GridIntervals out;
  out.tau = tau;
  out.noise_sd = noise_sd;
  out.tstars = tstars;
  out.center.resize(G);
  out.lower.resize(G);
  out.upper.resize(G);
  for (int g = 0; g < G; ++g) {
    const double t = tstars(g);
    // v = sum_k phi_k(t*) theta_row_k: the relaxed-inverse image of the
    // loading that evaluates coordinate 1 at t*.
    Eigen::VectorXd v = Eigen::VectorXd::Zero(P);
    for (int k = 1; k <= dm.K_gamma; ++k) {
      v += trig_basis(k, t) * theta_rows.row(k - 1).transpose();
    }
    const double point = eval_expansion(*fit.gamma_hat, t)(0);
    const double center = point + v.dot(psi_t_resid) / scaleN;
    const double se = noise_sd * (dm.Psi * v).norm() / scaleN;
    out.center(g) = center;
    out.lower(g) = center - z * se;
    out.upper(g) = center + z * se;
  }
  return out;
}

}  // namespace vcband
