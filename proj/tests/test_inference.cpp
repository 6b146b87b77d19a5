#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "vcband/estimators.hpp"
#include "vcband/inference.hpp"
#include "vcband/mathutil.hpp"
#include "vcband/rng.hpp"

using namespace vcband;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

ProjectedModel make_projected(Rng& rng, int n, int p, int K,
                              const Eigen::MatrixXd& beta,
                              const Eigen::VectorXd& noise_sd) {
  ProjectedModel pm;
  pm.K_beta = K;
  pm.X = random_matrix(rng, n, p);
  pm.yproj.resize(n, K);
  for (int k = 0; k < K; ++k) {
    pm.yproj.col(k) = pm.X * beta.row(k).transpose();
    for (int i = 0; i < n; ++i) pm.yproj(i, k) += noise_sd(k) * rng.normal();
  }
  pm.scheme = TimeScheme::RandomUniform;
  pm.m = 0;
  return pm;
}

// Brute-force extremes of the reconstruction over all interval-end choices,
// accumulating in the same term order as the closed form.
std::pair<double, double> vertex_extremes(const BandResult& band, double t) {
  const int K = band.terms();
  double best = -std::numeric_limits<double>::infinity();
  double worst = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << K); ++mask) {
    double v = 0.0;
    for (int k = 0; k < K; ++k) {
      const double end = (mask >> k) & 1u ? band.b(k) : band.a(k);
      v += end * band.weight(k + 1, t);
    }
    best = std::max(best, v);
    worst = std::min(worst, v);
  }
  return {worst, best};
}

IntervalSet random_intervals(Rng& rng, int K) {
  IntervalSet iv;
  iv.lower.resize(K);
  iv.upper.resize(K);
  for (int k = 0; k < K; ++k) {
    const double c = rng.uniform(-2.0, 2.0);
    const double w = rng.uniform(0.0, 1.5);
    iv.lower(k) = c - w;
    iv.upper(k) = c + w;
  }
  iv.tau = 0.05;
  return iv;
}

}  // namespace

TEST_CASE("per-frequency noise scales track the generating levels") {
  Rng rng(41);
  const int n = 250, p = 4, K = 2;
  Eigen::MatrixXd beta(K, p);
  beta.setZero();
  beta(0, 0) = 1.0;
  Eigen::VectorXd sd(K);
  sd << 0.5, 1.25;
  const ProjectedModel pm = make_projected(rng, n, p, K, beta, sd);
  const Eigen::VectorXd scales = estimate_noise_scales(pm);
  REQUIRE(scales.size() == K);
  CHECK(scales(0) == doctest::Approx(0.5).epsilon(0.3));
  CHECK(scales(1) == doctest::Approx(1.25).epsilon(0.3));
}

TEST_CASE("debiasing is a no-op on least-squares fits") {
  Rng rng(42);
  const int n = 60, p = 3, K = 3;
  Eigen::MatrixXd beta = random_matrix(rng, K, p);
  Eigen::VectorXd sd = Eigen::VectorXd::Constant(K, 0.4);
  const ProjectedModel pm = make_projected(rng, n, p, K, beta, sd);
  const FitResult fit = fit_beta(pm, FitMode::LeastSquares, Eigen::VectorXd());
  const NodewiseResult nw = nodewise_lasso(pm.X, 0.05);
  const DebiasState ds = debias_coordinate(pm, fit, nw, 2);
  REQUIRE(ds.debiased.size() == K);
  for (int k = 0; k < K; ++k) {
    // Least-squares residuals are orthogonal to every column, so the
    // correction term vanishes and the remainder diagnostic is zero.
    CHECK(ds.debiased(k) ==
          doctest::Approx(fit.beta_hat->coeffs(k, 1)).scale(1.0).epsilon(1e-10));
    CHECK(ds.delta_bound(k) == 0.0);
  }
  CHECK(ds.coord == 2);
  CHECK(ds.n == n);
}

TEST_CASE("debiasing moves shrunken coefficients back toward the truth") {
  Rng rng(43);
  const int n = 150, p = 40, K = 2;
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(K, p);
  beta(0, 0) = 2.0;
  beta(1, 0) = -1.0;
  Eigen::VectorXd sd = Eigen::VectorXd::Constant(K, 0.3);
  const ProjectedModel pm = make_projected(rng, n, p, K, beta, sd);
  const double lambda = 0.25;
  const FitResult fit =
      fit_beta(pm, FitMode::Lasso, Eigen::VectorXd::Constant(K, lambda));
  const NodewiseResult nw =
      nodewise_lasso(pm.X, std::sqrt(std::log(double(p)) / n));
  const DebiasState ds = debias_coordinate(pm, fit, nw, 1);
  for (int k = 0; k < K; ++k) {
    const double biased_err = std::abs(fit.beta_hat->coeffs(k, 0) - beta(k, 0));
    const double debiased_err = std::abs(ds.debiased(k) - beta(k, 0));
    CHECK(debiased_err < biased_err);
    CHECK(ds.delta_bound(k) >= 0.0);
  }
  // Passing explicit noise scales pins them in the state.
  Eigen::VectorXd forced = Eigen::VectorXd::Constant(K, 0.3);
  const DebiasState forced_ds = debias_coordinate(pm, fit, nw, 1, forced);
  CHECK((forced_ds.noise_scales - forced).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("simultaneous intervals apply the union-corrected quantile") {
  Rng rng(44);
  const int n = 80, p = 2, K = 4;
  const Eigen::MatrixXd beta = random_matrix(rng, K, p);
  const Eigen::VectorXd sd = Eigen::VectorXd::Constant(K, 0.5);
  const ProjectedModel pm = make_projected(rng, n, p, K, beta, sd);
  const FitResult fit = fit_beta(pm, FitMode::LeastSquares, Eigen::VectorXd());
  const NodewiseResult nw = nodewise_lasso(pm.X, 0.02);
  const DebiasState ds = debias_coordinate(pm, fit, nw, 1);
  const double tau = 0.05;
  const IntervalSet iv = simultaneous_intervals(ds, tau);
  const double z = normal_upper_quantile(tau / (2.0 * K));
  for (int k = 0; k < K; ++k) {
    const double half = z * ds.noise_scales(k) / std::sqrt(double(n));
    CHECK(iv.upper(k) - ds.debiased(k) == doctest::Approx(half).epsilon(1e-12));
    CHECK(ds.debiased(k) - iv.lower(k) == doctest::Approx(half).epsilon(1e-12));
  }
  CHECK_THROWS_AS(simultaneous_intervals(ds, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(simultaneous_intervals(ds, 1.0), std::invalid_argument);
}

TEST_CASE("a single flat-frequency interval gives a constant band") {
  IntervalSet iv;
  iv.lower = Eigen::VectorXd::Constant(1, -1.0);
  iv.upper = Eigen::VectorXd::Constant(1, 2.0);
  iv.tau = 0.05;
  const BandResult band = fourier_box_band(iv, 0.0);
  for (double t : {0.01, 0.3, 0.99}) {
    CHECK(band.lower(t) == -1.0);
    CHECK(band.upper(t) == 2.0);
  }
}

TEST_CASE("two-frequency band splits by the sign of the oscillating weight") {
  IntervalSet iv;
  iv.lower.resize(2);
  iv.upper.resize(2);
  iv.lower << 0.0, 0.0;
  iv.upper << 0.0, 1.0;
  iv.tau = 0.05;
  const BandResult band = fourier_box_band(iv, 0.0);
  // At t = 0 the second weight is sqrt(2) > 0, the first term is pinned at 0.
  CHECK(band.upper(0.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(band.lower(0.0) == 0.0);
}

TEST_CASE("the closed-form band equals vertex enumeration bit for bit") {
  Rng rng(45);
  for (int trial = 0; trial < 6; ++trial) {
    const int K = 2 + static_cast<int>(rng.next_u64() % 5);
    const IntervalSet iv = random_intervals(rng, K);
    const BandResult fourier = fourier_box_band(iv, 0.0);
    const BandResult sinc = sinc_grid_band(iv, 0.0);
    for (int i = 0; i < 150; ++i) {
      const double t = rng.uniform();
      const auto [flo, fhi] = vertex_extremes(fourier, t);
      CHECK(fourier.upper_raw(t) == fhi);
      CHECK(fourier.lower_raw(t) == flo);
      const auto [slo, shi] = vertex_extremes(sinc, t);
      CHECK(sinc.upper_raw(t) == shi);
      CHECK(sinc.lower_raw(t) == slo);
    }
  }
}

TEST_CASE("every box point stays inside the band") {
  Rng rng(46);
  const int K = 5;
  const IntervalSet iv = random_intervals(rng, K);
  const BandResult band = fourier_box_band(iv, 0.0);
  for (int i = 0; i < 200; ++i) {
    const double t = rng.uniform();
    Eigen::VectorXd c(K);
    for (int k = 0; k < K; ++k) {
      c(k) = iv.lower(k) + rng.uniform() * (iv.upper(k) - iv.lower(k));
    }
    double v = 0.0;
    for (int k = 1; k <= K; ++k) v += c(k - 1) * band.weight(k, t);
    CHECK(v >= band.lower(t) - 1e-12);
    CHECK(v <= band.upper(t) + 1e-12);
  }
}

TEST_CASE("the band is monotone in its inflation and contains the estimate") {
  Rng rng(47);
  const IntervalSet iv = random_intervals(rng, 4);
  const BandResult tight = fourier_box_band(iv, 0.01);
  const BandResult loose = fourier_box_band(iv, 0.05);
  for (int i = 0; i < 100; ++i) {
    const double t = rng.uniform();
    CHECK(loose.lower(t) <= tight.lower(t));
    CHECK(loose.upper(t) >= tight.upper(t));
    CHECK(tight.estimate(t) >= tight.lower(t));
    CHECK(tight.estimate(t) <= tight.upper(t));
  }
}

TEST_CASE("band width obeys the absolute-weight identity") {
  Rng rng(48);
  const int K = 6;
  const IntervalSet iv = random_intervals(rng, K);
  const double delta = 0.03;
  for (const BandResult& band :
       {fourier_box_band(iv, delta), sinc_grid_band(iv, delta)}) {
    for (int i = 0; i < 100; ++i) {
      const double t = rng.uniform();
      double want = 2.0 * delta;
      for (int k = 1; k <= K; ++k) {
        want += (iv.upper(k - 1) - iv.lower(k - 1)) * std::abs(band.weight(k, t));
      }
      CHECK(band.upper(t) - band.lower(t) ==
            doctest::Approx(want).scale(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("the grid band interpolates its interval ends at grid points") {
  Rng rng(49);
  const int G = 7;
  const IntervalSet iv = random_intervals(rng, G);
  const BandResult band = sinc_grid_band(iv, 0.0);
  for (int j = 1; j <= G; ++j) {
    const double t = static_cast<double>(j) / G;
    CHECK(band.upper(t) == doctest::Approx(iv.upper(j - 1)).scale(1.0).epsilon(1e-12));
    CHECK(band.lower(t) == doctest::Approx(iv.lower(j - 1)).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("degenerate grid intervals collapse to the cardinal interpolant") {
  Rng rng(50);
  const int G = 5;
  IntervalSet iv;
  iv.lower.resize(G);
  iv.upper.resize(G);
  for (int j = 0; j < G; ++j) {
    iv.lower(j) = rng.uniform(-1.0, 1.0);
    iv.upper(j) = iv.lower(j);
  }
  iv.tau = 0.05;
  const BandResult band = sinc_grid_band(iv, 0.0);
  for (int i = 0; i < 50; ++i) {
    const double t = rng.uniform();
    double interp = 0.0;
    for (int k = 1; k <= G; ++k) interp += iv.lower(k - 1) * band.weight(k, t);
    CHECK(band.upper(t) == doctest::Approx(interp).scale(1.0).epsilon(1e-13));
    CHECK(band.lower(t) == doctest::Approx(interp).scale(1.0).epsilon(1e-13));
  }
}

TEST_CASE("mismatched or crossed interval ends are rejected") {
  IntervalSet iv;
  iv.lower = Eigen::VectorXd::Zero(2);
  iv.upper = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(fourier_box_band(iv, 0.0), std::invalid_argument);
  iv.upper = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(fourier_box_band(iv, -0.1), std::invalid_argument);
  iv.upper(1) = -1.0;  // upper < lower
  CHECK_THROWS_AS(fourier_box_band(iv, 0.0), std::invalid_argument);
}

TEST_CASE("inflation rule values and preconditions") {
  CHECK(choose_delta(10, 2.0, 0.0) == 0.0);
  CHECK(choose_delta(10, 2.0, 1.0) ==
        doctest::Approx(0.01 * std::log(10.0)).epsilon(1e-14));
  CHECK(choose_delta(10, 2.0, 2.0) ==
        doctest::Approx(2.0 * choose_delta(10, 2.0, 1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(choose_delta(1, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(choose_delta(10, 1.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(choose_delta(10, 2.0, -1.0), std::invalid_argument);
}

namespace {

struct GammaProblem {
  LongitudinalDataset d;
  Eigen::MatrixXd gamma_coeffs;
};

GammaProblem make_gamma_problem(int n, int m, int q, int K, double noise_sd,
                                std::uint64_t seed) {
  Rng rng(derive_seed(seed, 50));
  GammaProblem gp;
  gp.gamma_coeffs = Eigen::MatrixXd::Zero(K, q);
  Rng coef_rng(7);  // same truth across sizes
  for (int k = 0; k < K; ++k) {
    for (int c = 0; c < q; ++c) gp.gamma_coeffs(k, c) = coef_rng.uniform(-1.0, 1.0);
  }
  gp.d.times = generate_times(TimeScheme::RandomUniform, n, m, derive_seed(seed, 1));
  gp.d.x = Eigen::MatrixXd(n, 0);
  gp.d.z.resize(n);
  gp.d.y.resize(n);
  const CoefficientExpansion gamma = make_expansion(gp.gamma_coeffs);
  for (int i = 0; i < n; ++i) {
    gp.d.z[i] = random_matrix(rng, m, q);
    gp.d.y[i].resize(m);
    for (int j = 0; j < m; ++j) {
      const double t = gp.d.times.times[i][j];
      gp.d.y[i](j) = gp.d.z[i].row(j).dot(eval_expansion(gamma, t)) +
                     noise_sd * rng.normal();
    }
  }
  return gp;
}

}  // namespace

TEST_CASE("grid intervals center on the truth for noise-free in-span fits") {
  const GammaProblem gp = make_gamma_problem(40, 6, 2, 3, 0.0, 61);
  const DifferencedModel dm =
      build_differenced_model(gp.d, 1.0, 3, DiffScheme::OverlappingB, false);
  const FitResult fit = fit_gamma(dm, FitMode::Lasso, 1e-9);
  Eigen::VectorXd tstars(4);
  tstars << 0.2, 0.45, 0.7, 1.0;
  const GridIntervals gi = gamma_grid_intervals(dm, fit, 0.05, tstars, 0.05);
  const CoefficientExpansion gamma = make_expansion(gp.gamma_coeffs);
  for (int g = 0; g < 4; ++g) {
    const double truth = eval_expansion(gamma, tstars(g))(0);
    CHECK(gi.center(g) == doctest::Approx(truth).scale(1.0).epsilon(1e-6));
    CHECK(gi.lower(g) <= gi.center(g));
    CHECK(gi.upper(g) >= gi.center(g));
  }
}

TEST_CASE("grid interval widths scale with the union-corrected quantile") {
  const GammaProblem gp = make_gamma_problem(50, 6, 2, 3, 0.3, 62);
  const DifferencedModel dm =
      build_differenced_model(gp.d, 1.0, 3, DiffScheme::OverlappingB, false);
  const FitResult fit = fit_gamma(dm, FitMode::Lasso, 0.05);
  Eigen::VectorXd one(1), two(2);
  one << 0.4;
  two << 0.4, 0.4;
  const double tau = 0.05;
  const GridIntervals g1 = gamma_grid_intervals(dm, fit, tau, one, 0.05);
  const GridIntervals g2 = gamma_grid_intervals(dm, fit, tau, two, 0.05);
  const double w1 = g1.upper(0) - g1.lower(0);
  const double w2 = g2.upper(0) - g2.lower(0);
  const double want =
      normal_upper_quantile(tau / 4.0) / normal_upper_quantile(tau / 2.0);
  CHECK(w2 / w1 == doctest::Approx(want).epsilon(1e-10));
  CHECK(g1.noise_sd == g2.noise_sd);
}

TEST_CASE("grid interval widths shrink like the root of the sample size") {
  std::vector<double> ratios;
  for (int rep = 0; rep < 9; ++rep) {
    const std::uint64_t seed = 100 + rep;
    Eigen::VectorXd tstars(3);
    tstars << 0.25, 0.5, 0.75;
    double width_small = 0.0, width_large = 0.0;
    {
      const GammaProblem gp = make_gamma_problem(60, 5, 2, 2, 0.5, seed);
      const DifferencedModel dm =
          build_differenced_model(gp.d, 1.0, 2, DiffScheme::OverlappingB, false);
      const FitResult fit = fit_gamma(dm, FitMode::Lasso, 0.02);
      const GridIntervals gi = gamma_grid_intervals(dm, fit, 0.05, tstars, 0.05);
      width_small = (gi.upper - gi.lower).mean();
    }
    {
      const GammaProblem gp = make_gamma_problem(240, 5, 2, 2, 0.5, seed);
      const DifferencedModel dm =
          build_differenced_model(gp.d, 1.0, 2, DiffScheme::OverlappingB, false);
      const FitResult fit = fit_gamma(dm, FitMode::Lasso, 0.01);
      const GridIntervals gi = gamma_grid_intervals(dm, fit, 0.05, tstars, 0.05);
      width_large = (gi.upper - gi.lower).mean();
    }
    ratios.push_back(width_large / width_small);
  }
  std::sort(ratios.begin(), ratios.end());
  const double median = ratios[ratios.size() / 2];
  CHECK(median > 0.4);
  CHECK(median < 0.6);
}

TEST_CASE("grid intervals validate their inputs") {
  const GammaProblem gp = make_gamma_problem(30, 5, 2, 2, 0.2, 63);
  const DifferencedModel dm =
      build_differenced_model(gp.d, 1.0, 2, DiffScheme::OverlappingB, false);
  const FitResult fit = fit_gamma(dm, FitMode::Lasso, 0.05);
  Eigen::VectorXd ok(1), zero(1), above(1);
  ok << 0.5;
  zero << 0.0;
  above << 1.5;
  CHECK_NOTHROW(gamma_grid_intervals(dm, fit, 0.05, ok, 0.05));
  CHECK_THROWS_AS(gamma_grid_intervals(dm, fit, 0.05, zero, 0.05),
                  std::invalid_argument);
  CHECK_THROWS_AS(gamma_grid_intervals(dm, fit, 0.05, above, 0.05),
                  std::invalid_argument);
  CHECK_THROWS_AS(gamma_grid_intervals(dm, fit, 1.5, ok, 0.05),
                  std::invalid_argument);
  CHECK_THROWS_AS(gamma_grid_intervals(dm, fit, 0.05, ok, -1.0),
                  std::invalid_argument);
}
