#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace vcband {

// A d-vector of functions on (0,1) represented by rows of trigonometric
// coefficients: function l is sum_k coeffs(k-1, l-1) * trig_basis(k, t).
// Row count K >= 1 is the truncation level, column count d >= 1 the dimension.
struct CoefficientExpansion {
  Eigen::MatrixXd coeffs;  // K x d

  int K() const { return static_cast<int>(coeffs.rows()); }
  int dim() const { return static_cast<int>(coeffs.cols()); }
};

// Validates finiteness and K, d >= 1; throws std::invalid_argument otherwise.
CoefficientExpansion make_expansion(const Eigen::MatrixXd& coeffs);

// A callable d-vector-valued function on the unit interval with an origin
// tag ("expansion" | "spline" | "closed-form").
struct FunctionOnUnitInterval {
  std::function<Eigen::VectorXd(double)> evaluator;
  std::string description;
};

// Orthonormal trigonometric basis on (0,1), 1-based:
//   phi_1 = 1, phi_k = sqrt(2) cos(pi k t) for even k,
//   phi_k = sqrt(2) sin(pi (k-1) t) for odd k >= 3.
// Throws std::domain_error for k < 1. t is not range-checked: common sampling
// grids include the endpoint t = 1, where the same formulas apply.
double trig_basis(int k, double t);

// First K basis values at t.
Eigen::VectorXd trig_basis_vector(int K, double t);

// Evaluates the represented function: returns the d-vector
// sum_k coeffs.row(k-1) * phi_k(t).
Eigen::VectorXd eval_expansion(const CoefficientExpansion& c, double t);

// Integrated squared error between the functions represented by a and b:
// sum_k ||a_k - b_k||_2^2 (basis orthonormality turns the L2 integral into a
// coefficient-space sum; the shorter expansion is zero-padded). Throws on
// dimension mismatch.
double ise_between(const CoefficientExpansion& a, const CoefficientExpansion& b);

// Gram value m^{-1} sum_{j=1..m} phi_k(j/m) phi_l(j/m) on the uniform grid,
// computed in closed form (integer divisibility tests only):
//   l <= m-1          : delta_{k,l}
//   l >= m, k = 1     : sqrt(2) * [l/m even integer]
//   l >= m, k even    : [(l-k)/m even integer] + [(l+k)/m even integer]
//   l >= m, k odd >= 3: [(l-k)/m even integer] - [(l+k-2)/m even integer]
// Requires 1 <= k <= m-1 and l >= 1; throws std::domain_error otherwise.
double discrete_gram(int k, int l, int m);

// Coefficients folded onto frequencies 1..K when a function with coefficients
// `coef` (rows 1..L, zero beyond) is sampled on the m-point uniform grid:
// row k of the result is sum_{l >= m} discrete_gram(k, l, m) * coef_l, i.e.
//   k = 1     : sqrt(2) sum_r coef_{2rm}
//   k even    : sum_r (coef_{2rm+k} + coef_{2rm-k})
//   k odd >= 3: sum_r (coef_{2rm+k} - coef_{2rm+2-k}),
// with sums truncated at L. Requires K <= m-1.
CoefficientExpansion aliasing_coefficients(const CoefficientExpansion& coef,
                                           int m, int K);

// sin(pi x) / (pi x); exactly 1 at 0 and exactly 0 at nonzero integers, so
// interpolation through integer grid points is exact.
double sinc_kernel(double x);

// Cox-de Boor B-spline basis value N_{j,degree}(t) for the given knot vector,
// j 0-based over the knots.size() - degree - 1 basis functions. Returns 0
// outside the knot range; the terminal knot is treated as inside so clamped
// bases sum to 1 on the whole closed interval.
double bspline_basis(int degree, const std::vector<double>& knots, int j,
                     double t);

// Clamped knot vector on [0,1] for `num_basis` functions of the given degree:
// degree+1 repeated endpoints and equally spaced interior knots.
std::vector<double> clamped_uniform_knots(int degree, int num_basis);

// Kronecker-delta bound on int_0^1 phi_a phi_b phi_k phi_l dt (fourth moments
// of the basis): a sum of indicator terms on index sums, plus extra groups
// when any index equals 1.
double fourth_moment_bound(int a, int b, int k, int l);

// Numerically integrates the quartic product (composite trapezoid with
// quad_nodes panels) and checks it against fourth_moment_bound plus a small
// quadrature tolerance.
bool fourth_moment_bound_check(int a, int b, int k, int l, int quad_nodes);

}  // namespace vcband
