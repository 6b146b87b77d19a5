#include "vcband/regress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vcband/mathutil.hpp"
#include "vcband/rng.hpp"

namespace vcband {

namespace {

void check_problem(const LinearProblem& p) {
  if (p.design.rows() < 1 || p.design.cols() < 1) {
    throw std::invalid_argument("design must be at least 1 x 1");
  }
  if (p.response.size() != p.design.rows()) {
    throw std::invalid_argument("response length must match design rows");
  }
  if (!(p.sample_scale > 0.0)) {
    throw std::invalid_argument("sample_scale must be positive");
  }
  if (!p.design.allFinite() || !p.response.allFinite()) {
    throw std::invalid_argument("non-finite entries in problem");
  }
}

double soft_threshold(double x, double cut) {
  if (x > cut) return x - cut;
  if (x < -cut) return x + cut;
  return 0.0;
}

}  // namespace

Eigen::VectorXd ols(const LinearProblem& p) {
  check_problem(p);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(p.design);
  const auto rank = qr.rank();
  if (rank < p.design.cols()) {
    throw std::runtime_error(
        "design is rank deficient: " +
        std::to_string(p.design.cols() - rank) + " dependent column(s)");
  }
  return qr.solve(p.response);
}

LassoSolution lasso(const LinearProblem& p, double lambda, double tol,
                    int max_iter) {
  check_problem(p);
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  const auto& X = p.design;
  const double S = p.sample_scale;
  const Eigen::Index P = X.cols();

  Eigen::VectorXd col_sq(P);
  for (Eigen::Index j = 0; j < P; ++j) col_sq(j) = X.col(j).squaredNorm();

  LassoSolution sol;
  sol.lambda = lambda;
  sol.coefficients = Eigen::VectorXd::Zero(P);
  Eigen::VectorXd resid = p.response;

  const double cut = lambda * S / 2.0;
  auto kkt_violation = [&]() {
    // Gradient of the quadratic part is -(2/S) X^T resid; stationarity wants
    // (2/S) X_j^T resid = lambda sign(c_j) on the support, |.| <= lambda off.
    double worst = 0.0;
    for (Eigen::Index j = 0; j < P; ++j) {
      const double g = 2.0 * X.col(j).dot(resid) / S;
      const double c = sol.coefficients(j);
      if (c > 0.0) {
        worst = std::max(worst, std::abs(g - lambda));
      } else if (c < 0.0) {
        worst = std::max(worst, std::abs(g + lambda));
      } else {
        worst = std::max(worst, std::max(0.0, std::abs(g) - lambda));
      }
    }
    return worst;
  };

  sol.converged = false;
  for (int sweep = 0; sweep < max_iter; ++sweep) {
    for (Eigen::Index j = 0; j < P; ++j) {
      if (col_sq(j) == 0.0) continue;  // zero column: 0 stays optimal
      const double old = sol.coefficients(j);
      const double rho = X.col(j).dot(resid) + col_sq(j) * old;
      const double updated = soft_threshold(rho, cut) / col_sq(j);
      if (updated != old) {
        resid += X.col(j) * (old - updated);
        sol.coefficients(j) = updated;
      }
    }
    sol.sweeps = sweep + 1;
    sol.objective = resid.squaredNorm() / S +
                    lambda * sol.coefficients.lpNorm<1>();
    sol.objective_path.push_back(sol.objective);
    sol.kkt_violation = kkt_violation();
    if (sol.kkt_violation < tol) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

ScaledLassoResult scaled_lasso(const LinearProblem& p, double lambda0,
                               double tol) {
  check_problem(p);
  if (p.design.rows() < 2) throw std::invalid_argument("need N >= 2 rows");
  if (lambda0 < 0.0) throw std::invalid_argument("lambda0 must be >= 0");

  ScaledLassoResult out;
  double sd = std::sqrt(p.response.squaredNorm() / p.sample_scale);
  if (sd == 0.0) {
    throw std::runtime_error("noise level collapsed to zero: response is null");
  }
  out.converged = false;
  LassoSolution fit;
  for (int round = 0; round < 100; ++round) {
    fit = lasso(p, sd * lambda0, tol);
    const double rss = (p.response - p.design * fit.coefficients).squaredNorm();
    const double new_sd = std::sqrt(rss / p.sample_scale);
    out.rounds = round + 1;
    const double change = std::abs(new_sd - sd);
    if (new_sd == 0.0) {
      throw std::runtime_error("noise level collapsed to zero: exact interpolation");
    }
    sd = new_sd;
    if (change < 1e-8) {
      out.converged = true;
      break;
    }
  }
  out.coefficients = fit.coefficients;
  out.noise_sd = sd;
  out.lambda = sd * lambda0;
  return out;
}

NodewiseResult nodewise_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& nu,
                              double tol, int threads) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (p < 2) throw std::invalid_argument("nodewise needs p >= 2 columns");
  if (nu.size() != p) throw std::invalid_argument("need one penalty per column");

  NodewiseResult out;
  out.Theta = Eigen::MatrixXd::Zero(p, p);
  out.tau_sq = Eigen::VectorXd::Zero(p);

  std::vector<std::string> errors(static_cast<std::size_t>(p));
  parallel_for(
      static_cast<std::size_t>(p),
      [&](std::size_t idx) {
        const Eigen::Index j = static_cast<Eigen::Index>(idx);
        Eigen::MatrixXd others(n, p - 1);
        Eigen::Index c = 0;
        for (Eigen::Index k = 0; k < p; ++k) {
          if (k != j) others.col(c++) = X.col(k);
        }
        LinearProblem node{others, X.col(j), static_cast<double>(n)};
        const LassoSolution fit = lasso(node, nu(j), tol);
        const double rss = (X.col(j) - others * fit.coefficients).squaredNorm();
        const double tau =
            rss / static_cast<double>(n) + nu(j) * fit.coefficients.lpNorm<1>();
        if (tau <= 0.0) {
          errors[idx] = "zero residual variance in node regression " +
                        std::to_string(j + 1);
          return;
        }
        out.tau_sq(j) = tau;
        out.Theta(j, j) = 1.0 / tau;
        c = 0;
        for (Eigen::Index k = 0; k < p; ++k) {
          if (k == j) continue;
          out.Theta(j, k) = -fit.coefficients(c++) / tau;
        }
      },
      threads);
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }

  const Eigen::MatrixXd sigma = X.transpose() * X / static_cast<double>(n);
  out.max_violation =
      (Eigen::MatrixXd::Identity(p, p) - out.Theta * sigma).cwiseAbs().maxCoeff();
  return out;
}

NodewiseResult nodewise_lasso(const Eigen::MatrixXd& X, double nu, double tol,
                              int threads) {
  return nodewise_lasso(X, Eigen::VectorXd::Constant(X.cols(), nu), tol, threads);
}

CvResult kfold_cv(const LinearProblem& p, const std::vector<double>& lambda_grid,
                  int folds, std::uint64_t rng_seed, double tol) {
  check_problem(p);
  if (folds < 2) throw std::invalid_argument("need at least 2 folds");
  const Eigen::Index N = p.design.rows();
  if (N < folds) throw std::invalid_argument("fewer rows than folds");
  if (lambda_grid.empty()) throw std::invalid_argument("empty lambda grid");

  // Deterministic Fisher-Yates shuffle, then round-robin fold assignment.
  std::vector<Eigen::Index> order(N);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(rng_seed);
  for (Eigen::Index i = N - 1; i > 0; --i) {
    const Eigen::Index k =
        static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[k]);
  }
  std::vector<int> fold_of(N);
  for (Eigen::Index r = 0; r < N; ++r) {
    fold_of[order[r]] = static_cast<int>(r % folds);
  }

  CvResult out;
  out.cv_errors = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lambda_grid.size()));
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index r = 0; r < N; ++r) {
      (fold_of[r] == f ? test : train).push_back(r);
    }
    Eigen::MatrixXd Xtr(train.size(), p.design.cols());
    Eigen::VectorXd ytr(train.size());
    for (std::size_t r = 0; r < train.size(); ++r) {
      Xtr.row(r) = p.design.row(train[r]);
      ytr(r) = p.response(train[r]);
    }
    LinearProblem sub{Xtr, ytr, static_cast<double>(train.size())};
    for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
      const LassoSolution fit = lasso(sub, lambda_grid[g], tol);
      double err = 0.0;
      for (Eigen::Index r : test) {
        const double pred = p.design.row(r).dot(fit.coefficients);
        err += (p.response(r) - pred) * (p.response(r) - pred);
      }
      out.cv_errors(static_cast<Eigen::Index>(g)) += err;
    }
  }
  out.cv_errors /= static_cast<double>(N);

  std::size_t best = 0;
  for (std::size_t g = 1; g < lambda_grid.size(); ++g) {
    const double cur = out.cv_errors(static_cast<Eigen::Index>(g));
    const double best_err = out.cv_errors(static_cast<Eigen::Index>(best));
    if (cur < best_err || (cur == best_err && lambda_grid[g] > lambda_grid[best])) {
      best = g;
    }
  }
  out.best_lambda = lambda_grid[best];
  return out;
}

}  // namespace vcband
