#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "vcband/estimators.hpp"
#include "vcband/inference.hpp"

namespace vcband {

enum class TruthBasis { Trig, BSpline };

// Flat simulation configuration. Every field maps to one `key = value`
// configuration entry (and one CLI flag); unknown keys are hard errors.
struct SimConfig {
  int n = 200;
  int m = 25;
  int p = 200;
  int q = 0;
  int s_beta = 15;
  int s_gamma = 5;
  TruthBasis basis = TruthBasis::Trig;
  TimeScheme scheme = TimeScheme::CommonGrid;
  DiffScheme diff = DiffScheme::PairedA;
  bool whiten = false;
  double h = 0.0;       // <= 0: 1.5 / m
  int K_gamma = 6;
  int K_beta = 0;       // <= 0: min(30, m - 1)
  FitMode gamma_mode = FitMode::Lasso;
  FitMode beta_mode = FitMode::Lasso;
  double lambda_gamma = 0.0;      // <= 0: twice the differenced penalty floor
  double lambda_beta = 0.0;       // > 0: fixed shared per-frequency penalty
  double lambda_beta_scale = 2.0; // multiplier on the per-frequency floor
  double lambda_t = 1.0;          // deviation parameter in the penalty floors
  int replications = 50;
  std::uint64_t rng_seed = 1;
  double tau = 0.05;
  double delta_alpha = 2.0;
  double delta_c = 0.0;   // 0: no band enlargement
  double nu = 0.0;        // <= 0: five-fold CV on the band coordinate's node
  double sigma_eps = 1.0;
  bool xi = true;         // random effects on/off
  bool unit_x = false;    // fix x at 1 (intercept-only designs)
  int coord = 1;          // band coordinate (1-based)
  int grid_points = 512;
  int threads = 0;        // 0: hardware concurrency
};

// Applies one key=value entry; throws std::invalid_argument on unknown keys
// or unparseable values.
void apply_config_entry(SimConfig& cfg, const std::string& key,
                        const std::string& value);

// Parses a flat key=value file ('#' starts a comment). Errors are prefixed
// with path:line.
SimConfig load_config_file(const std::string& path);

// The data-generating signal: coefficient matrices in the generating basis
// (rows = basis index, columns = covariate), plus the per-coefficient scale
// of the random-effect draws. Coefficients are rescaled so the expected
// integrated squared signal is 4 per block and the random-effect variance
// integrates to 1.
struct Truth {
  TruthBasis basis = TruthBasis::Trig;
  Eigen::MatrixXd beta_coeffs;   // rows x p
  Eigen::MatrixXd gamma_coeffs;  // rows x q
  Eigen::VectorXd xi_scale;      // per-coefficient sd multiplier

  int rows() const { return static_cast<int>(xi_scale.size()); }
  // Generating-basis function k (1-based) at t.
  double basis_value(int k, double t) const;
  Eigen::VectorXd beta_at(double t) const;
  Eigen::VectorXd gamma_at(double t) const;
  // Coefficients of the best trigonometric representation up to K: exact for
  // the trigonometric basis, an L2 projection (quadrature) otherwise.
  Eigen::MatrixXd trig_coeffs(const Eigen::MatrixXd& coeffs, int K) const;
};

// Draws the truth from stream 0 of the configured seed: for each block, the
// active entries (columns 1..s) get independent U(-1,1) draws scaled by the
// per-frequency decay ((k+1)/2)^{-2.1} for odd k, ((k+2)/2)^{-2.1} for even k,
// over rows k = 1..30 (trigonometric) or flat over the 3 quadratic spline
// functions. Draw order: beta row-major, then gamma row-major.
Truth generate_truth(const SimConfig& cfg);

// Draws one dataset on sub-streams of derive_seed(rng_seed, rep_index + 1):
// stream 1 sampling times, stream 2 x (row-major), stream 3 z (individual,
// then observation, then column), stream 4 random-effect coefficients (per
// individual), stream 5 measurement noise.
LongitudinalDataset simulate_dataset(const SimConfig& cfg, const Truth& truth,
                                     int rep_index);

struct RepOutcome {
  int rep = 0;
  bool failed = false;
  std::string error;
  double loss_beta = std::numeric_limits<double>::quiet_NaN();
  double loss_beta_raw = std::numeric_limits<double>::quiet_NaN();
  double loss_gamma = std::numeric_limits<double>::quiet_NaN();
  int covered = -1;  // -1: no band constructed
  double length = std::numeric_limits<double>::quiet_NaN();
  double lambda_gamma_used = std::numeric_limits<double>::quiet_NaN();
  double nu_used = std::numeric_limits<double>::quiet_NaN();
  double delta_used = std::numeric_limits<double>::quiet_NaN();
};

struct MetricsReport {
  int replications = 0;
  int failures = 0;
  double average_loss_beta = std::numeric_limits<double>::quiet_NaN();
  double average_loss_gamma = std::numeric_limits<double>::quiet_NaN();
  double coverage = std::numeric_limits<double>::quiet_NaN();
  double average_length = std::numeric_limits<double>::quiet_NaN();
  std::vector<RepOutcome> reps;
};

// Runs the configured study: per replication, simulate, fit (projection path
// when q = 0, differencing path when p = 0, both stages otherwise), build the
// simultaneous band for the configured coordinate when p >= 1, and score
// loss/coverage/length against the truth on the report grid. Replications run
// in parallel on independent seed streams; failures are recorded per rep and
// excluded from the averages, never silently dropped.
MetricsReport run_simulation(const SimConfig& cfg);

void write_metrics_csv(const MetricsReport& report, const std::string& path);
void write_per_rep_csv(const MetricsReport& report, const std::string& path);

struct LemmaReportRow {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // worst observed error / ratio deviation / probability
};

// Property suite over the basis closed forms plus the pair-count Monte Carlo
// regimes; one row per registered property. `corrupt_gram` perturbs the
// closed-form grid product (negative-control hook: the orthogonality row must
// then fail).
std::vector<LemmaReportRow> verify_lemmas(std::uint64_t seed, int max_m = 32,
                                          int tuples = 500,
                                          bool corrupt_gram = false);

void write_lemma_csv(const std::vector<LemmaReportRow>& rows,
                     const std::string& path);

// Reads a dataset from a covariate file (header individual_id,x_1..x_p) and a
// long observation file (header individual_id,time,y[,z_1..z_q]). Every long
// row must reference a known individual and every individual must have at
// least one observation. With normalize_times, times are shifted/scaled so
// the smallest maps to 0 and the largest to (T-1)/T, T the number of distinct
// observed times; times must land in [0,1]. Errors carry file and line.
LongitudinalDataset ingest_csv(const std::string& x_path,
                               const std::string& long_path,
                               bool normalize_times);

// Writes the dataset in the ingestible format (individual ids 1..n, 17
// significant digits; exact round trip).
void export_dataset(const LongitudinalDataset& d, const std::string& x_path,
                    const std::string& long_path);

// Serializes a fit as basepath.manifest.csv (key,value: truncation levels,
// bandwidth, penalties, schemes, convergence flags) plus basepath.coeffs.csv
// (component,frequency,coordinate,value).
void save_fit(const FitResult& fit, const std::string& basepath);
FitResult load_fit(const std::string& basepath);

// Uniform report grid in (0,1): (g - 0.5) / points for g = 1..points.
Eigen::VectorXd report_grid(int points);

// Band table with columns t,l,u,l_delta,u_delta,estimate on the report grid.
void write_band_csv(const BandResult& band, int grid_points,
                    const std::string& path);

}  // namespace vcband
