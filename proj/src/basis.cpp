#include "vcband/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vcband/mathutil.hpp"

namespace vcband {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

// True iff v is a nonnegative even integer multiple of m (v = 2rm, r >= 0).
bool even_multiple(long v, long m) { return v % m == 0 && (v / m) % 2 == 0; }
}  // namespace

CoefficientExpansion make_expansion(const Eigen::MatrixXd& coeffs) {
  if (coeffs.rows() < 1 || coeffs.cols() < 1) {
    throw std::invalid_argument("expansion needs K >= 1 rows and d >= 1 columns");
  }
  if (!coeffs.allFinite()) {
    throw std::invalid_argument("expansion coefficients must be finite");
  }
  return CoefficientExpansion{coeffs};
}

double trig_basis(int k, double t) {
  if (k < 1) throw std::domain_error("basis index must be >= 1");
  if (k == 1) return 1.0;
  if (k % 2 == 0) return kSqrt2 * std::cos(kPi * k * t);
  return kSqrt2 * std::sin(kPi * (k - 1) * t);
}

Eigen::VectorXd trig_basis_vector(int K, double t) {
  if (K < 1) throw std::domain_error("basis count must be >= 1");
  Eigen::VectorXd out(K);
  for (int k = 1; k <= K; ++k) out(k - 1) = trig_basis(k, t);
  return out;
}

Eigen::VectorXd eval_expansion(const CoefficientExpansion& c, double t) {
  return c.coeffs.transpose() * trig_basis_vector(c.K(), t);
}

double ise_between(const CoefficientExpansion& a, const CoefficientExpansion& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("expansions differ in dimension");
  }
  const int Ka = a.K(), Kb = b.K();
  double acc = 0.0;
  for (int k = 0; k < std::max(Ka, Kb); ++k) {
    Eigen::VectorXd diff = Eigen::VectorXd::Zero(a.dim());
    if (k < Ka) diff += a.coeffs.row(k).transpose();
    if (k < Kb) diff -= b.coeffs.row(k).transpose();
    acc += diff.squaredNorm();
  }
  return acc;
}

double discrete_gram(int k, int l, int m) {
  if (k < 1 || l < 1) throw std::domain_error("basis indices must be >= 1");
  if (k >= m) throw std::domain_error("closed form requires k <= m-1");
  if (l <= m - 1) return (k == l) ? 1.0 : 0.0;
  if (k == 1) return even_multiple(l, m) ? kSqrt2 : 0.0;
  if (k % 2 == 0) {
    return (even_multiple(l - k, m) ? 1.0 : 0.0) +
           (even_multiple(l + k, m) ? 1.0 : 0.0);
  }
  return (even_multiple(l - k, m) ? 1.0 : 0.0) -
         (even_multiple(l + k - 2, m) ? 1.0 : 0.0);
}

CoefficientExpansion aliasing_coefficients(const CoefficientExpansion& coef,
                                           int m, int K) {
  if (K >= m) throw std::domain_error("aliasing closed form requires K <= m-1");
  if (K < 1) throw std::domain_error("need K >= 1");
  const int L = coef.K();
  Eigen::MatrixXd folded = Eigen::MatrixXd::Zero(K, coef.dim());
  auto row = [&](long idx) -> Eigen::RowVectorXd {
    if (idx >= 1 && idx <= L) return coef.coeffs.row(idx - 1);
    return Eigen::RowVectorXd::Zero(coef.dim());
  };
  for (int k = 1; k <= K; ++k) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(coef.dim());
    for (long r = 1; 2L * r * m - m <= L; ++r) {
      const long base = 2L * r * m;
      if (k == 1) {
        acc += kSqrt2 * row(base);
      } else if (k % 2 == 0) {
        acc += row(base + k) + row(base - k);
      } else {
        acc += row(base + k) - row(base + 2 - k);
      }
    }
    folded.row(k - 1) = acc;
  }
  return CoefficientExpansion{folded};
}

double sinc_kernel(double x) {
  if (std::round(x) == x) return (x == 0.0) ? 1.0 : 0.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

double bspline_basis(int degree, const std::vector<double>& knots, int j,
                     double t) {
  if (degree < 0) throw std::invalid_argument("spline degree must be >= 0");
  const int num_basis = static_cast<int>(knots.size()) - degree - 1;
  if (num_basis < 1) throw std::invalid_argument("knot vector too short");
  if (j < 0 || j >= num_basis) throw std::invalid_argument("basis index out of range");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (knots[i] < knots[i - 1]) {
      throw std::invalid_argument("knots must be nondecreasing");
    }
  }
  if (t < knots.front() || t > knots.back()) return 0.0;

  if (degree == 0) {
    if (knots[j] == knots[j + 1]) return 0.0;  // empty span
    // The terminal knot counts as inside its last nonempty span, so clamped
    // bases stay a partition of unity at the right endpoint.
    if (t >= knots[j] &&
        (t < knots[j + 1] || (t == knots.back() && knots[j + 1] == knots.back()))) {
      return 1.0;
    }
    return 0.0;
  }
  const double left_den = knots[j + degree] - knots[j];
  const double right_den = knots[j + degree + 1] - knots[j + 1];
  double value = 0.0;
  if (left_den > 0.0) {
    value += (t - knots[j]) / left_den * bspline_basis(degree - 1, knots, j, t);
  }
  if (right_den > 0.0 && j + 1 < static_cast<int>(knots.size()) - degree) {
    value += (knots[j + degree + 1] - t) / right_den *
             bspline_basis(degree - 1, knots, j + 1, t);
  }
  return value;
}

std::vector<double> clamped_uniform_knots(int degree, int num_basis) {
  if (degree < 0 || num_basis < degree + 1) {
    throw std::invalid_argument("need num_basis >= degree + 1");
  }
  const int interior = num_basis - degree - 1;
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(num_basis + degree + 1));
  for (int i = 0; i <= degree; ++i) knots.push_back(0.0);
  for (int i = 1; i <= interior; ++i) {
    knots.push_back(static_cast<double>(i) / (interior + 1));
  }
  for (int i = 0; i <= degree; ++i) knots.push_back(1.0);
  return knots;
}

double fourth_moment_bound(int a, int b, int k, int l) {
  if (a < 1 || b < 1 || k < 1 || l < 1) {
    throw std::domain_error("basis indices must be >= 1");
  }
  auto d = [](int u, int v) { return u == v ? 1.0 : 0.0; };
  double bound = d(a + b, k + l) + d(a + b + k, l) + d(a + b + l, k) +
                 d(a + k + l, b) + d(a, b + k + l) + d(a + k, b + l) +
                 d(a + l, b + k);
  bound += d(l, 1) * (d(a + b, k) + d(a + k, b) + d(a, b + k));
  bound += d(k, 1) * (d(a + b, l) + d(a + l, b) + d(a, b + l));
  bound += d(b, 1) * (d(a + k, l) + d(a + l, k) + d(a, k + l));
  bound += d(a, 1) * (d(b + k, l) + d(b + l, k) + d(b, k + l));
  return bound;
}

bool fourth_moment_bound_check(int a, int b, int k, int l, int quad_nodes) {
  const double integral = trapezoid(
      [&](double t) {
        return trig_basis(a, t) * trig_basis(b, t) * trig_basis(k, t) *
               trig_basis(l, t);
      },
      0.0, 1.0, quad_nodes);
  // The integrand is a trigonometric polynomial; the uniform trapezoid rule
  // is exact for it once quad_nodes exceeds the total frequency a+b+k+l, so
  // a flat rounding tolerance suffices.
  return integral <= fourth_moment_bound(a, b, k, l) + 1e-8;
}

}  // namespace vcband
