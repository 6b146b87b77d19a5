#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "vcband/basis.hpp"
#include "vcband/regress.hpp"
#include "vcband/sampling.hpp"

namespace vcband {

// Theory-side constants consumed by penalty formulas and synthetic runs.
// None of these are estimated from data; on real data the caller supplies
// them (or uses the data-driven penalty rules instead).
struct TheoryParams {
  double alpha = 2.0;              // coefficient-decay smoothness order
  double radius = 1.0;             // smoothness-class radius
  double lipschitz = 1.0;          // envelope Lipschitz constant
  double signal_envelope = 1.0;    // sup-norm envelope of the coefficients
  double sigma_eps = 1.0;          // measurement-noise standard deviation
  Eigen::VectorXd sigma_daleth_sq; // per-frequency random-effect coefficient
                                   // variances (synthetic / known-truth mode)
};

// Longitudinal observations: per individual i, responses y_i and time-varying
// covariates z_i at the sampling times, plus time-invariant covariates x_i.
// p = 0 and q = 0 are both permitted (degenerate submodels).
struct LongitudinalDataset {
  TimeDesign times;
  Eigen::MatrixXd x;               // n x p
  std::vector<Eigen::MatrixXd> z;  // per individual: m_i x q, storage order
  std::vector<Eigen::VectorXd> y;  // per individual: m_i, storage order

  int n() const { return times.n(); }
  int p() const { return static_cast<int>(x.cols()); }
  int q() const { return z.empty() ? 0 : static_cast<int>(z[0].cols()); }
};

// Shape and finiteness validation; throws std::invalid_argument naming the
// offending individual.
void validate_dataset(const LongitudinalDataset& d);

// Differenced regression built from consecutive-pair responses: row (i,j)
// holds ydiff = y at the pair's upper time minus y at its lower time, and the
// design block for frequency k (columns (k-1)q .. kq-1) holds
// phi_k(t_up) z_i(t_up) - phi_k(t_lo) z_i(t_lo). Rows are ordered by
// (individual, pair index). When whitened, rows have been transformed so the
// measurement-noise contribution is independent across rows with the variance
// of a single difference (2 sigma_eps^2).
struct DifferencedModel {
  DifferencePlan plan;
  Eigen::MatrixXd Psi;    // N x (q * K_gamma)
  Eigen::VectorXd ydiff;  // N
  int K_gamma = 0;
  int q = 0;
  bool whitened = false;
};

// Assembles the differenced model. Whitening applies only to the overlapping
// scheme (the paired scheme already has independent rows) and pre-multiplies
// each individual's block of Psi and ydiff by sqrt(2) times that individual's
// whitening matrix. Throws std::runtime_error when no pair survives the
// bandwidth (advising a larger h) and std::invalid_argument on q = 0.
DifferencedModel build_differenced_model(const LongitudinalDataset& d, double h,
                                         int K_gamma, DiffScheme scheme,
                                         bool whiten);

// Penalty floor for the differenced problem:
//   2 sigma_eps sqrt(max_j ||Psi_j||_2^2 / N) sqrt((t^2 + 2 log(q K)) / N).
double lambda0_differenced(const DifferencedModel& dm, double sigma_eps,
                           double t);

enum class FitMode { LeastSquares, Lasso };

// Fitted coefficient expansions plus the tuning values and diagnostics needed
// to reproduce and serialize the fit.
struct FitResult {
  std::optional<CoefficientExpansion> gamma_hat;  // K_gamma x q
  std::optional<CoefficientExpansion> beta_hat;   // K_beta x p
  double gamma_lambda = 0.0;       // 0 for least-squares fits
  Eigen::VectorXd beta_lambdas;    // per-frequency penalties (empty for LS)
  long N = 0;                      // differenced rows backing the gamma fit
  int K_gamma = 0;
  int K_beta = 0;
  double h = 0.0;
  bool gamma_converged = true;
  std::vector<unsigned char> beta_converged;  // per-frequency solver flags
  std::string time_scheme;  // "common" | "random" | "" (unknown)
  std::string diff_scheme;  // "paired" | "overlapping" | "" (no stage 1)
};

// Estimates the time-varying coefficients from the differenced model: least
// squares (requires q K_gamma <= N and full rank) or lasso at the given
// penalty. The solved vector is reshaped into a K_gamma x q expansion.
FitResult fit_gamma(const DifferencedModel& dm, FitMode mode, double lambda,
                    double tol = 1e-7);

enum class ProjectionInput { Raw, Residual };

// Per-frequency projected observations: yproj(i, k-1) holds the average of
// the chosen per-observation values against basis function k,
//   m_i^{-1} sum_j value_i(t_{i,j}) phi_k(t_{i,j}).
struct ProjectedModel {
  int K_beta = 0;
  Eigen::MatrixXd yproj;  // n x K_beta
  Eigen::MatrixXd X;      // n x p
  TimeScheme scheme;
  int m = 0;              // common grid size (0 under irregular times)
};

// Projects raw responses, or residuals y - z^T gamma_hat when input is
// Residual (gamma_hat required and q >= 1). On a common grid K_beta must be
// at most m-1: at m and beyond the sampled basis functions collide and the
// per-frequency problems are no longer separated.
ProjectedModel project_frequencies(const LongitudinalDataset& d, int K_beta,
                                   ProjectionInput input,
                                   const CoefficientExpansion* gamma_hat = nullptr);

// Per-frequency penalty floors for irregular sampling times:
//   lambda0_k = sqrt(max_j n^{-1} sum_i v(i,k) X(i,j)^2)
//              * sqrt((t^2 + 2 log p) / n),
// where v(i,k) is the supplied per-individual, per-frequency variance proxy.
Eigen::VectorXd lambda0_projected(const ProjectedModel& pm,
                                  const Eigen::MatrixXd& variance_proxies,
                                  double t);

// Common-grid variant: lambda0_k = sqrt(c_k + sigma_eps^2 / m)
//                                 * sqrt((t^2 + 2 log p) / n),
// where c_k combines the random-effect coefficient variances s_l (1-based,
// truncated at the stored length) with their grid-folded images:
//   k = 1     : s_1 + sqrt(2) sum_r s_{2rm}
//   k even    : s_k + sum_r (s_{2rm+k} + s_{2rm-k})
//   k odd >= 3: s_k + sum_r (s_{2rm+k} + s_{2rm+2-k}).
Eigen::VectorXd lambda0_projected_common_grid(const ProjectedModel& pm,
                                              const Eigen::VectorXd& sigma_daleth_sq,
                                              double sigma_eps, double t);

// Estimates the time-invariant coefficient functions, one independent
// regression per frequency k = 1..K_beta sharing the design X. Least squares
// requires p <= n and full rank (the factorization is shared across
// frequencies). For lasso, `lambdas` holds one penalty per frequency, or a
// single value broadcast to all. Frequencies above K_beta are implicitly
// zero.
FitResult fit_beta(const ProjectedModel& pm, FitMode mode,
                   const Eigen::VectorXd& lambdas, double tol = 1e-7);

// Options for the combined pipeline.
struct TwoStageOptions {
  double h = 0.0;
  int K_gamma = 1;
  int K_beta = 1;
  DiffScheme diff_scheme = DiffScheme::PairedA;
  bool whiten = false;
  FitMode gamma_mode = FitMode::Lasso;
  FitMode beta_mode = FitMode::Lasso;
  double gamma_lambda = 0.0;
  Eigen::VectorXd beta_lambdas;  // per frequency, or single value broadcast
  double tol = 1e-7;
  // Test hook: use this expansion for the stage-2 residuals instead of the
  // stage-1 estimate (stage 1 is skipped).
  const CoefficientExpansion* forced_gamma = nullptr;
};

// Stage 1 estimates gamma from differenced responses (differencing removes
// both the time-invariant signal and the random effects); stage 2 projects
// the per-observation residuals y - z^T gamma_hat and estimates beta from
// them. q = 0 delegates to the projection stage alone, p = 0 to the
// differencing stage alone.
FitResult two_stage_fit(const LongitudinalDataset& d, const TwoStageOptions& opt);

}  // namespace vcband
