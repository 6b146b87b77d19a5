#include "vcband/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "vcband/mathutil.hpp"
#include "vcband/rng.hpp"

namespace vcband {

TimeDesign generate_times(TimeScheme scheme, int n, const std::vector<int>& m,
                          std::uint64_t rng_seed) {
  if (n < 1) throw std::invalid_argument("need n >= 1 individuals");
  if (static_cast<int>(m.size()) != n) {
    throw std::invalid_argument("need one count per individual");
  }
  for (int mi : m) {
    if (mi < 1) throw std::invalid_argument("need m_i >= 1 observations");
  }

  TimeDesign td;
  td.scheme = scheme;
  td.times.resize(n);
  td.sort_order.resize(n);

  if (scheme == TimeScheme::CommonGrid) {
    for (int mi : m) {
      if (mi != m[0]) {
        throw std::invalid_argument("common grid requires equal m_i");
      }
    }
    for (int i = 0; i < n; ++i) {
      td.times[i].resize(m[i]);
      td.sort_order[i].resize(m[i]);
      for (int j = 0; j < m[i]; ++j) {
        td.times[i][j] = static_cast<double>(j + 1) / m[i];
        td.sort_order[i][j] = j;
      }
    }
    return td;
  }

  Rng rng(rng_seed);
  for (int i = 0; i < n; ++i) {
    td.times[i].resize(m[i]);
    for (int j = 0; j < m[i]; ++j) td.times[i][j] = rng.uniform();
    td.sort_order[i].resize(m[i]);
    std::iota(td.sort_order[i].begin(), td.sort_order[i].end(), 0);
    // stable_sort breaks exact ties by storage order, keeping the design a
    // deterministic function of the seed.
    std::stable_sort(td.sort_order[i].begin(), td.sort_order[i].end(),
                     [&](int a, int b) { return td.times[i][a] < td.times[i][b]; });
  }
  return td;
}

TimeDesign generate_times(TimeScheme scheme, int n, int m, std::uint64_t rng_seed) {
  return generate_times(scheme, n, std::vector<int>(n, m), rng_seed);
}

DifferencePlan build_difference_plan(const TimeDesign& td, double h,
                                     DiffScheme scheme) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  DifferencePlan plan;
  plan.scheme = scheme;
  plan.h = h;
  const int step = (scheme == DiffScheme::PairedA) ? 2 : 1;
  for (int i = 0; i < td.n(); ++i) {
    for (int j = 0; j + 1 < td.m(i); j += step) {
      const double gap = td.sorted_time(i, j + 1) - td.sorted_time(i, j);
      if (gap < h) plan.pairs.push_back({i, j});
    }
  }
  return plan;
}

std::vector<Eigen::MatrixXd> whitening_matrix(const TimeDesign& td,
                                              const DifferencePlan& plan) {
  if (plan.scheme != DiffScheme::OverlappingB) {
    throw std::invalid_argument("whitening applies to overlapping plans only");
  }
  std::vector<std::vector<int>> positions(td.n());
  for (const auto& pr : plan.pairs) positions[pr.individual].push_back(pr.position);

  std::vector<Eigen::MatrixXd> out(td.n());
  for (int i = 0; i < td.n(); ++i) {
    const auto& pos = positions[i];
    const int c = static_cast<int>(pos.size());
    if (c == 0) {
      out[i] = Eigen::MatrixXd(0, 0);
      continue;
    }
    // Differences d_j = e_{j+1} - e_j of i.i.d. unit-variance errors:
    // Var = 2, Cov = -1 exactly when the retained positions are adjacent.
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(c, c);
    for (int a = 0; a < c; ++a) {
      T(a, a) = 2.0;
      if (a + 1 < c && pos[a + 1] == pos[a] + 1) {
        T(a, a + 1) = -1.0;
        T(a + 1, a) = -1.0;
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(T);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("difference covariance not positive definite");
    }
    Eigen::MatrixXd L = llt.matrixL();
    out[i] = L.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(c, c));
  }
  return out;
}

SampleSizeSummary sample_size_mc(int n, int m, double h, int replications,
                                 std::uint64_t rng_seed, int threads) {
  if (replications < 1) throw std::invalid_argument("need >= 1 replications");
  std::vector<double> overlapping(replications), inv_paired(replications);
  std::vector<char> all_kept(replications);
  parallel_for(
      static_cast<std::size_t>(replications),
      [&](std::size_t rep) {
        const TimeDesign td = generate_times(TimeScheme::RandomUniform, n, m,
                                             derive_seed(rng_seed, rep));
        const auto b = build_difference_plan(td, h, DiffScheme::OverlappingB);
        const auto a = build_difference_plan(td, h, DiffScheme::PairedA);
        overlapping[rep] = static_cast<double>(b.N());
        inv_paired[rep] = 1.0 / (static_cast<double>(a.N()) + 1.0);
        all_kept[rep] = (b.N() == static_cast<long>(n) * (m - 1)) ? 1 : 0;
      },
      threads);
  SampleSizeSummary s{0.0, 0.0, 0.0};
  for (int rep = 0; rep < replications; ++rep) {
    s.mean_overlapping += overlapping[rep];
    s.mean_inv_paired += inv_paired[rep];
    s.prob_all_kept += all_kept[rep];
  }
  s.mean_overlapping /= replications;
  s.mean_inv_paired /= replications;
  s.prob_all_kept /= replications;
  return s;
}

}  // namespace vcband
