#pragma once

#include <Eigen/Dense>

#include "vcband/estimators.hpp"
#include "vcband/regress.hpp"

namespace vcband {

// One-step bias correction of a lasso coordinate across all frequencies,
// plus everything needed to build its simultaneous intervals.
struct DebiasState {
  int coord = 1;                 // 1-based covariate index
  long n = 0;                    // individuals
  Eigen::VectorXd theta_row;     // relaxed-inverse row for the coordinate
  Eigen::VectorXd debiased;      // per-frequency corrected estimates
  Eigen::VectorXd noise_scales;  // per-frequency residual-noise sd estimates
  Eigen::VectorXd delta_bound;   // per-frequency remainder-bias diagnostic
  double theta_sigma_theta = 0.0;  // theta^T (X^T X / n) theta
  double max_violation = 0.0;      // || I - Theta Sigma_hat ||_inf input
};

// Estimates the per-frequency residual-noise scale by a self-tuned lasso on
// each frequency's problem. lambda0 <= 0 selects the default
// 2 sqrt(2 log(max(p, 2)) / n). Scales are strictly positive on return.
Eigen::VectorXd estimate_noise_scales(const ProjectedModel& pm,
                                      double lambda0 = 0.0, double tol = 1e-7);

// Corrects the fitted coordinate at every frequency:
//   debiased_k = fit_k[coord] + theta_row^T X^T (yproj_k - X fit_k) / n.
// The remainder diagnostic per frequency is
//   max_violation * || fit_k - refit of the same problem at twice lambda_k ||_1 * sqrt(n)
// (zero for least-squares fits, where lambda = 0). `noise_scales` overrides
// the per-frequency scale estimates; empty means estimate them here.
DebiasState debias_coordinate(const ProjectedModel& pm, const FitResult& fit,
                              const NodewiseResult& nodewise, int coord,
                              const Eigen::VectorXd& noise_scales = Eigen::VectorXd(),
                              double tol = 1e-7);

// Per-frequency simultaneous confidence intervals with a union bound over
// frequencies: center +- upper_quantile(tau / (2K)) * scale_k / sqrt(n).
struct IntervalSet {
  Eigen::VectorXd lower;  // a_k
  Eigen::VectorXd upper;  // b_k
  double tau = 0.0;       // nominal simultaneous level
};

IntervalSet simultaneous_intervals(const DebiasState& ds, double tau);

enum class BandKind { FourierBox, SincGrid };

// Simultaneous band for a function reconstructed from interval-valued
// coefficients: at each t the band extremizes the linear reconstruction over
// the hyperrectangle of coefficient intervals (attained coordinatewise at an
// interval end, by sign), then widens by delta:
//   u(t) = sum_k (w_k(t) >= 0 ? b_k : a_k) w_k(t),
//   l(t) = sum_k (w_k(t) >= 0 ? a_k : b_k) w_k(t),
// with w_k the trigonometric basis (FourierBox) or the cardinal-sine
// interpolation weight sin(pi(Gt - k)) / (pi(Gt - k)) on the grid k/G
// (SincGrid, G = number of intervals).
struct BandResult {
  BandKind kind = BandKind::FourierBox;
  Eigen::VectorXd a;  // per-term lower ends
  Eigen::VectorXd b;  // per-term upper ends
  double tau = 0.0;
  double delta = 0.0;

  int terms() const { return static_cast<int>(a.size()); }
  double weight(int k, double t) const;  // w_k(t), k 1-based
  double lower_raw(double t) const;      // l(t)
  double upper_raw(double t) const;      // u(t)
  double lower(double t) const { return lower_raw(t) - delta; }
  double upper(double t) const { return upper_raw(t) + delta; }
  double estimate(double t) const;       // interval midpoints reconstructed
};

BandResult fourier_box_band(const IntervalSet& intervals, double delta);

// Grid intervals are indexed j = 1..G at points j/G.
BandResult sinc_grid_band(const IntervalSet& grid_intervals, double delta);

// Band enlargement for truncation bias: c * K^{-alpha} * log(K).
// Requires K >= 2, alpha >= 2, c >= 0.
double choose_delta(int K, double alpha, double c);

// Debiased linear-functional intervals for the first time-varying coefficient
// at each grid point t*: the loading puts phi_k(t*) on the coordinate-1
// position of each frequency block of the differenced design, the correction
// uses relaxed-inverse rows for exactly those positions (node regressions at
// penalty nu), and the scale comes from a self-tuned lasso residual sd:
//   center = gamma_hat_1(t*) + v^T Psi^T (ydiff - Psi g_hat) / N,
//   half   = upper_quantile(tau / (2 G)) * noise_sd * ||Psi v||_2 / N,
// with v the relaxed-inverse combination of the loading and G the grid size.
struct GridIntervals {
  Eigen::VectorXd tstars;
  Eigen::VectorXd center;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double noise_sd = 0.0;
  double tau = 0.0;
};

GridIntervals gamma_grid_intervals(const DifferencedModel& dm,
                                   const FitResult& fit, double tau,
                                   const Eigen::VectorXd& tstars, double nu,
                                   double tol = 1e-7, int threads = 0);

}  // namespace vcband
