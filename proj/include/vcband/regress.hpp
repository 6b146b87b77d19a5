#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace vcband {

// Least-squares data with the objective's normalizing count made explicit:
// lasso minimizes sample_scale^{-1} ||response - design c||_2^2 + lambda ||c||_1.
struct LinearProblem {
  Eigen::MatrixXd design;    // N x P
  Eigen::VectorXd response;  // N
  double sample_scale;       // normalizer in the quadratic term (typically N)
};

struct LassoSolution {
  Eigen::VectorXd coefficients;
  double lambda = 0.0;
  double objective = 0.0;
  double kkt_violation = 0.0;  // max subgradient slack at return
  bool converged = true;
  int sweeps = 0;
  std::vector<double> objective_path;  // objective after each sweep
};

// Exact least squares via column-pivoted QR. Requires full column rank
// (P <= N); throws std::runtime_error naming the deficient column count.
Eigen::VectorXd ols(const LinearProblem& p);

// Cyclic coordinate descent for the lasso objective above, columns visited in
// natural order. Stops when the maximum KKT violation drops below tol or
// after max_iter sweeps (converged=false). Zero columns keep coefficient 0.
LassoSolution lasso(const LinearProblem& p, double lambda, double tol = 1e-7,
                    int max_iter = 10000);

struct ScaledLassoResult {
  Eigen::VectorXd coefficients;
  double noise_sd = 0.0;
  double lambda = 0.0;  // self-consistent penalty noise_sd * lambda0
  int rounds = 0;
  bool converged = true;
};

// Joint coefficient / noise-level estimation: alternates a lasso fit at
// lambda = sd * lambda0 with the variance update sd^2 = RSS / sample_scale
// until the sd change is below 1e-8 or 100 rounds. Throws std::runtime_error
// if the variance estimate collapses to exactly zero (degenerate input).
ScaledLassoResult scaled_lasso(const LinearProblem& p, double lambda0,
                               double tol = 1e-7);

struct NodewiseResult {
  Eigen::MatrixXd Theta;      // p x p relaxed inverse of X^T X / n
  Eigen::VectorXd tau_sq;     // per-node scale tau_j^2
  double max_violation = 0.0; // || I - Theta * Sigma_hat ||_inf
};

// Per-column lasso regressions of X_j on the remaining columns at penalty
// nu(j); row j of Theta is the regression coefficients normalized by
// tau_j^2 = RSS_j / n + nu_j ||coef_j||_1. Throws when some tau_j^2 is zero.
// Node regressions run in parallel.
NodewiseResult nodewise_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& nu,
                              double tol = 1e-7, int threads = 0);
NodewiseResult nodewise_lasso(const Eigen::MatrixXd& X, double nu,
                              double tol = 1e-7, int threads = 0);

struct CvResult {
  double best_lambda = 0.0;
  Eigen::VectorXd cv_errors;  // aligned with the grid, mean held-out sq. error
};

// K-fold cross-validation over a lambda grid. Rows are shuffled into folds
// deterministically from the seed; exact ties in CV error resolve to the
// larger lambda. Throws when N < K.
CvResult kfold_cv(const LinearProblem& p, const std::vector<double>& lambda_grid,
                  int folds, std::uint64_t rng_seed, double tol = 1e-7);

}  // namespace vcband
