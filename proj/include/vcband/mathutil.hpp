#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace vcband {

// Standard normal CDF.
double normal_cdf(double x);

// Upper-tail standard normal quantile: returns z with P(Z > z) = p for
// p in (0,1). Wichura's PPND16 rational approximation (absolute error
// below 1e-15).
double normal_upper_quantile(double p);

// Composite trapezoid rule on [a, b] with `nodes` panels (nodes + 1 samples).
double trapezoid(const std::function<double(double)>& f, double a, double b,
                 int nodes);

// One-sample Kolmogorov-Smirnov statistic against the standard normal CDF:
// sup_x |F_n(x) - Phi(x)|. `sample` need not be sorted.
double ks_statistic_normal(std::vector<double> sample);

// Same statistic against the uniform CDF on (0,1).
double ks_statistic_uniform(std::vector<double> sample);

// Upper tail of the asymptotic Kolmogorov distribution,
// Q(c) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 c^2).
double kolmogorov_tail(double c);

// Critical value for the KS test at level alpha and sample size n (asymptotic:
// c with Q(c) = alpha, scaled by 1/sqrt(n)).
double ks_critical_value(double alpha, std::size_t n);

// Runs fn(i) for i = 0..count-1 across hardware threads. Each index is
// processed exactly once; callers must make fn(i) write only to slot i so the
// result is order-independent. threads <= 0 selects the hardware count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

}  // namespace vcband
