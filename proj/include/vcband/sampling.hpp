#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace vcband {

enum class TimeScheme { RandomUniform, CommonGrid };

// Per-individual sampling times on (0,1]. RandomUniform stores the draws in
// generation order together with the sorting permutation; CommonGrid stores
// t_{i,j} = j/m exactly (j = 1..m, including the endpoint 1) and an identity
// permutation.
struct TimeDesign {
  TimeScheme scheme;
  std::vector<std::vector<double>> times;     // storage order
  std::vector<std::vector<int>> sort_order;   // sort_order[i][j] = storage index
                                              // of the (j+1)-th smallest time

  int n() const { return static_cast<int>(times.size()); }
  int m(int i) const { return static_cast<int>(times[i].size()); }
  // Time at sorted position j (0-based).
  double sorted_time(int i, int j) const { return times[i][sort_order[i][j]]; }
};

enum class DiffScheme {
  PairedA,       // disjoint pairs at odd sorted positions
  OverlappingB,  // all consecutive pairs
};

// Consecutive-order-statistic pairs surviving the bandwidth filter. Each
// entry pairs sorted positions (position, position+1) of one individual;
// positions are 0-based (the paired scheme uses even 0-based positions,
// i.e. odd 1-based ones).
struct DifferencePlan {
  struct Pair {
    int individual;
    int position;
  };

  DiffScheme scheme;
  double h;
  std::vector<Pair> pairs;

  long N() const { return static_cast<long>(pairs.size()); }
};

// Draws a TimeDesign. RandomUniform draws m_i times per individual i.i.d. from
// the open unit interval, reproducibly from the seed; ties are broken by
// storage order when sorting. CommonGrid requires all m_i equal and ignores
// the seed. Throws on unequal counts under CommonGrid.
TimeDesign generate_times(TimeScheme scheme, int n, const std::vector<int>& m,
                          std::uint64_t rng_seed);

// Convenience overload for equal counts.
TimeDesign generate_times(TimeScheme scheme, int n, int m, std::uint64_t rng_seed);

// Collects the pairs with gap t_{i,(j+1)} - t_{i,(j)} < h. PairedA walks odd
// sorted positions only (disjoint pairs; an odd trailing observation is left
// unpaired), OverlappingB walks every consecutive position.
DifferencePlan build_difference_plan(const TimeDesign& td, double h,
                                     DiffScheme scheme);

// For an OverlappingB plan: per-individual lower-triangular B with
// B * T * B^T = I, where T is the unit-variance covariance pattern of
// consecutive differences of i.i.d. errors (2 on the diagonal, -1 between
// pairs sharing an endpoint). Computed as the inverse Cholesky factor of T.
// Entries of the result align with that individual's pairs in plan order;
// individuals with no pairs get an empty matrix.
std::vector<Eigen::MatrixXd> whitening_matrix(const TimeDesign& td,
                                              const DifferencePlan& plan);

// Monte Carlo summary of retained pair counts under RandomUniform times.
struct SampleSizeSummary {
  double mean_overlapping;      // E |overlapping pairs|
  double mean_inv_paired;       // E 1 / (|disjoint pairs| + 1)
  double prob_all_kept;         // P(every consecutive gap < h), i.e. the
                                // overlapping count hits its maximum n(m-1)
};

// Estimates the three summary quantities over `replications` independent
// designs with n individuals and m draws each. Replications run in parallel
// on per-replication seed streams; the reduction is ordered, so results are
// reproducible.
SampleSizeSummary sample_size_mc(int n, int m, double h, int replications,
                                 std::uint64_t rng_seed, int threads = 0);

}  // namespace vcband
