// SPDX-License-Identifier: Apache-2.0
//
// Seeded Monte Carlo experiments comparing sampled attack costs against the
// asymptotic formulas.
//
// Every trial draws from its own RandomStream substream keyed by
// (master seed, stream tag, trial index), and results are stored by trial
// index. Reports are therefore bit-identical for any thread count.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stealthrmt/attack_engine.hpp"
#include "stealthrmt/covariance_models.hpp"
#include "stealthrmt/grid_io.hpp"
#include "stealthrmt/rmt_core.hpp"
#include "stealthrmt/spectrum.hpp"

namespace stealthrmt::experiment {

enum class CostForm { Direct, Equivalent };

std::string_view to_string(CostForm form);
CostForm parse_cost_form(std::string_view text);

struct ExperimentConfig {
  std::string case_source = "ieee30";
  double decay_r = 0.1;
  double snr_db = 30.0;
  std::vector<double> beta_grid = {2.0, 5.0, 10.0, 30.0};
  std::size_t trials = 1000;
  std::uint64_t master_seed = 42;
  std::size_t replication_l = 1;
  rmt::LogdetVariant logdet_variant = rmt::LogdetVariant::AsPrinted;
  CostForm cost_form = CostForm::Direct;

  /// OutOfRange / InsufficientTrials naming the offending field.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Resolves "ieee30" / "ieee118" to the bundled case files (directory from
/// STEALTHRMT_CASE_DIR if set); any other value is taken as a path.
std::string resolve_case_path(const std::string& case_source);

/// A concrete attacked system: Jacobian, state covariance, calibrated noise
/// and the resulting spectral profile.
struct AttackSetup {
  Eigen::MatrixXd H;
  cov::StateCovariance sigma_xx;
  double sigma2 = 1.0;
  SpectralProfile profile;

  Eigen::Index m() const { return H.rows(); }
  Eigen::Index n() const { return H.cols(); }

  static AttackSetup from_model(const grid::MeasurementModel& model, double decay_r, double snr_db);

  /// H = I, Sigma_XX = diag(lambda), sigma^2 = 1: the smallest system with
  /// the given profile.
  static AttackSetup canonical(const SpectralProfile& profile);
};

AttackSetup load_setup(const ExperimentConfig& config);

struct RunOptions {
  unsigned threads = 0;  // 0 picks the hardware concurrency
};

/// k - 1 = round(beta * n); DomainError if that is below one.
Eigen::Index degrees_of_freedom(double beta, Eigen::Index n);

/// F of learned attacks built from k = dof + 1 sampled states per trial.
std::vector<double> sample_direct_costs(const AttackSetup& setup, double beta, std::size_t trials,
                                        std::uint64_t seed, std::uint64_t tag, const RunOptions& options = {});

enum class TermSelection { All, TraceOnly };

/// Spectral-form terms per trial for the profile replicated l times. Z is
/// formed explicitly when k-1 < n; otherwise W = Z Z^T is drawn by Bartlett
/// decomposition. With TraceOnly the log-determinant is skipped (left 0).
std::vector<attack::EquivalentTerms> sample_equivalent_terms(const SpectralProfile& profile, std::size_t l,
                                                             double beta, std::size_t trials, std::uint64_t seed,
                                                             std::uint64_t tag, const RunOptions& options = {},
                                                             TermSelection selection = TermSelection::All);

struct VarianceCheck {
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool inside = false;  // CI intersects [var_lower, var_upper]
};

struct BetaResult {
  double beta = 0.0;
  Eigen::Index k = 0;
  std::vector<double> cost_samples;  // unnormalized F per trial
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
  std::optional<double> fa_fb_correlation;
  rmt::AsymptoticReport asymptotic;
  std::optional<VarianceCheck> variance_check;
};

struct MonteCarloReport {
  ExperimentConfig config;
  std::size_t n_state = 0;  // n, after replication
  std::size_t m = 0;
  double alpha = 0.0;  // n/m of the underlying system, reported only
  double perfect_cost_per_state = 0.0;
  std::vector<BetaResult> per_beta;
};

MonteCarloReport run_ergodic_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Like the ergodic run, but asymptotic quantities are evaluated strictly
/// (domain errors propagate) and each beta carries a 95% chi-square CI on
/// the sample variance of F checked against the variance bounds.
MonteCarloReport run_variance_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// Two-sample Kolmogorov-Smirnov with the asymptotic p-value at
/// lambda = sqrt(n1 n2 / (n1 + n2)) D.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// KS between direct-form and spectral-form costs of the same system.
KsResult distribution_equivalence_check(const AttackSetup& setup, double beta, std::size_t trials,
                                        std::uint64_t seed, const RunOptions& options = {});

struct CorrelationResult {
  double rho = 0.0;  // NaN when degenerate
  bool degenerate = false;
  std::string note;
};

/// Pearson correlation; NaN if either sample has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Sample correlation of F_a and F_b under the spectral form.
CorrelationResult correlation_check(const SpectralProfile& profile, double beta, std::size_t trials,
                                    std::uint64_t seed, std::size_t l = 1, const RunOptions& options = {});

/// Two-sided chi-square confidence interval for a variance estimated from
/// `trials` samples.
std::pair<double, double> variance_confidence_interval(double sample_variance, std::size_t trials,
                                                       double level = 0.95);

}  // namespace stealthrmt::experiment
