// SPDX-License-Identifier: Apache-2.0
#include "stealthrmt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

#include "stealthrmt/error.hpp"

#ifndef STEALTHRMT_DEFAULT_CASE_DIR
#define STEALTHRMT_DEFAULT_CASE_DIR "data"
#endif

namespace stealthrmt::experiment {
namespace {

constexpr std::uint64_t kKsDirectTag = 0x4b53000000000001ULL;
constexpr std::uint64_t kKsEquivalentTag = 0x4b53000000000002ULL;
constexpr std::uint64_t kCorrelationTag = 0x434f520000000001ULL;

[[noreturn]] void out_of_range(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::OutOfRange, key + ": " + why);
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(std::span<const double> x) {
  Moments out;
  if (x.empty()) return out;
  double sum = 0.0;
  for (double v : x) sum += v;
  out.mean = sum / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - out.mean) * (v - out.mean);
    out.variance = ss / static_cast<double>(x.size() - 1);
  }
  return out;
}

BetaResult summarize(double beta, Eigen::Index k, std::vector<double> samples) {
  BetaResult r;
  r.beta = beta;
  r.k = k;
  auto mom = moments(samples);
  r.mean = mom.mean;
  r.variance = mom.variance;
  r.std_error = std::sqrt(mom.variance / static_cast<double>(samples.size()));
  r.cost_samples = std::move(samples);
  return r;
}

MonteCarloReport run_experiment(const ExperimentConfig& config, const RunOptions& options, bool strict) {
  config.validate();
  AttackSetup setup = load_setup(config);
  MonteCarloReport report;
  report.config = config;
  report.m = static_cast<std::size_t>(setup.m());
  const std::size_t l = config.cost_form == CostForm::Equivalent ? config.replication_l : 1;
  report.n_state = static_cast<std::size_t>(setup.n()) * l;
  report.alpha = static_cast<double>(setup.n()) / static_cast<double>(setup.m());
  report.perfect_cost_per_state = attack::perfect_knowledge_cost(setup.profile, l) / static_cast<double>(report.n_state);

  for (std::size_t b = 0; b < config.beta_grid.size(); ++b) {
    const double beta = config.beta_grid[b];
    const Eigen::Index dof = degrees_of_freedom(beta, static_cast<Eigen::Index>(report.n_state));
    std::vector<double> costs;
    std::optional<double> correlation;
    if (config.cost_form == CostForm::Direct) {
      costs = sample_direct_costs(setup, beta, config.trials, config.master_seed, b, options);
    } else {
      auto terms = sample_equivalent_terms(setup.profile, l, beta, config.trials, config.master_seed, b, options);
      std::vector<double> fa, fb;
      for (const auto& t : terms) {
        costs.push_back(t.cost());
        fa.push_back(t.trace_term);
        fb.push_back(t.logdet_term);
      }
      correlation = pearson(fa, fb);
    }
    BetaResult r = summarize(beta, dof + 1, std::move(costs));
    r.fa_fb_correlation = correlation;
    r.asymptotic = rmt::asymptotic_report(setup.profile, beta, config.logdet_variant, strict);
    if (strict) {
      auto [lo, hi] = variance_confidence_interval(r.variance, config.trials);
      r.variance_check = VarianceCheck{lo, hi, lo <= r.asymptotic.var_upper && hi >= r.asymptotic.var_lower};
    }
    report.per_beta.push_back(std::move(r));
  }
  return report;
}

}  // namespace

std::string_view to_string(CostForm form) { return form == CostForm::Direct ? "direct" : "equivalent"; }

CostForm parse_cost_form(std::string_view text) {
  if (text == "direct") return CostForm::Direct;
  if (text == "equivalent") return CostForm::Equivalent;
  out_of_range("cost_form", "expected 'direct' or 'equivalent', got '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  if (case_source.empty()) out_of_range("case_source", "must not be empty");
  if (!(decay_r >= 0.0 && decay_r <= 1.0)) out_of_range("decay_r", "must lie in [0, 1]");
  if (!std::isfinite(snr_db)) out_of_range("snr_db", "must be finite");
  if (trials < 2) throw Error(ErrorKind::InsufficientTrials, "trials: need at least 2");
  if (replication_l < 1) out_of_range("replication_l", "must be >= 1");
  if (beta_grid.empty()) out_of_range("beta_grid", "must not be empty");
  for (double beta : beta_grid) {
    if (!(beta > 0.0) || !std::isfinite(beta)) out_of_range("beta_grid", "values must be positive");
    if (cost_form == CostForm::Direct && beta < 1.0) out_of_range("beta_grid", "direct-form runs need beta >= 1");
  }
  if (cost_form == CostForm::Direct && replication_l != 1)
    out_of_range("replication_l", "replication applies to the equivalent form only");
}

std::string resolve_case_path(const std::string& case_source) {
  std::string dir = STEALTHRMT_DEFAULT_CASE_DIR;
  if (const char* env = std::getenv("STEALTHRMT_CASE_DIR"); env && *env) dir = env;
  if (case_source == "ieee30") return (std::filesystem::path(dir) / "case30.m").string();
  if (case_source == "ieee118") return (std::filesystem::path(dir) / "case118.m").string();
  return case_source;
}

AttackSetup AttackSetup::from_model(const grid::MeasurementModel& model, double decay_r, double snr_db) {
  AttackSetup s;
  s.H = model.H;
  s.sigma_xx = cov::toeplitz_covariance(static_cast<Eigen::Index>(model.n), decay_r);
  s.sigma2 = cov::calibrate_noise(s.H, s.sigma_xx, snr_db);
  s.profile = attack::spectral_profile(s.H, s.sigma_xx, s.sigma2);
  return s;
}

AttackSetup AttackSetup::canonical(const SpectralProfile& profile) {
  const auto n = static_cast<Eigen::Index>(profile.n0);
  AttackSetup s;
  s.H = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(profile.lambdas.data(), n);
  s.sigma_xx = cov::StateCovariance::from_matrix(diag.asDiagonal().toDenseMatrix());
  s.sigma2 = 1.0;
  s.profile = profile;
  return s;
}

AttackSetup load_setup(const ExperimentConfig& config) {
  grid::GridCase grid = grid::load_matpower_file(resolve_case_path(config.case_source));
  return AttackSetup::from_model(grid::build_dc_jacobian(grid), config.decay_r, config.snr_db);
}

Eigen::Index degrees_of_freedom(double beta, Eigen::Index n) {
  double dof = std::round(beta * static_cast<double>(n));
  if (!(dof >= 1.0)) throw Error(ErrorKind::DomainError, "beta * n rounds below one sample of freedom");
  if (dof > static_cast<double>(std::numeric_limits<int>::max()))
    throw Error(ErrorKind::DomainError, "beta * n is too large");
  return static_cast<Eigen::Index>(dof);
}

std::vector<double> sample_direct_costs(const AttackSetup& setup, double beta, std::size_t trials,
                                        std::uint64_t seed, std::uint64_t tag, const RunOptions& options) {
  const Eigen::Index k = degrees_of_freedom(beta, setup.n()) + 1;
  attack::KlCostModel model(setup.H, setup.sigma_xx, setup.sigma2);
  std::vector<double> out(trials);
  parallel_for(trials, options.threads, [&](std::size_t i) {
    auto rng = cov::RandomStream::substream(seed, tag, i);
    Eigen::MatrixXd states = cov::sample_states(setup.sigma_xx, k, rng);
    out[i] = model.learned_cost(cov::sample_covariance(states));
  });
  return out;
}

std::vector<attack::EquivalentTerms> sample_equivalent_terms(const SpectralProfile& profile, std::size_t l,
                                                             double beta, std::size_t trials, std::uint64_t seed,
                                                             std::uint64_t tag, const RunOptions& options,
                                                             TermSelection selection) {
  const std::vector<double> lambdas = profile.replicated(l);
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  const Eigen::Index dof = degrees_of_freedom(beta, n);
  double constant = 0.0;
  for (double v : lambdas) constant += std::log1p(v);

  std::vector<attack::EquivalentTerms> out(trials);
  parallel_for(trials, options.threads, [&](std::size_t i) {
    auto rng = cov::RandomStream::substream(seed, tag, i);
    if (dof < n) {
      out[i] = attack::equivalent_terms(cov::sample_normalized_gaussian(n, dof, rng), lambdas);
    } else if (selection == TermSelection::All) {
      out[i] = attack::equivalent_terms_from_gram(cov::sample_normalized_wishart(n, dof, rng), lambdas);
    } else {
      // Diagonal of the Bartlett product only, drawn in the same order as
      // sample_normalized_wishart.
      attack::EquivalentTerms t;
      for (Eigen::Index r = 0; r < n; ++r) {
        double w = rng.chi_squared(static_cast<double>(dof - r));
        for (Eigen::Index c = 0; c < r; ++c) {
          double g = rng.normal();
          w += g * g;
        }
        double lam = lambdas[static_cast<std::size_t>(r)];
        t.trace_term += lam / (1.0 + lam) * w / static_cast<double>(dof);
      }
      t.constant = constant;
      out[i] = t;
    }
  });
  return out;
}

MonteCarloReport run_ergodic_experiment(const ExperimentConfig& config, const RunOptions& options) {
  return run_experiment(config, options, false);
}

MonteCarloReport run_variance_experiment(const ExperimentConfig& config, const RunOptions& options) {
  return run_experiment(config, options, true);
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form converges fast for small lambda.
    const double pi = std::numbers::pi;
    double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
    double cdf = std::sqrt(2.0 * pi) / lambda * (y + std::pow(y, 9) + std::pow(y, 25) + std::pow(y, 49));
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-18) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::InsufficientSamples, "KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_survival(std::sqrt(na * nb / (na + nb)) * d);
  return r;
}

KsResult distribution_equivalence_check(const AttackSetup& setup, double beta, std::size_t trials,
                                        std::uint64_t seed, const RunOptions& options) {
  if (trials < 200) throw Error(ErrorKind::InsufficientTrials, "distribution check needs at least 200 trials");
  if (beta < 1.0) throw Error(ErrorKind::DomainError, "the direct form needs beta >= 1");
  auto direct = sample_direct_costs(setup, beta, trials, seed, kKsDirectTag, options);
  auto terms = sample_equivalent_terms(setup.profile, 1, beta, trials, seed, kKsEquivalentTag, options);
  std::vector<double> equivalent;
  equivalent.reserve(terms.size());
  for (const auto& t : terms) equivalent.push_back(t.cost());
  return ks_two_sample(std::move(direct), std::move(equivalent));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw Error(ErrorKind::DimensionMismatch, "pearson needs paired samples");
  auto ma = moments(a);
  auto mb = moments(b);
  double cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma.mean) * (b[i] - mb.mean);
  cov /= static_cast<double>(a.size() - 1);
  if (!(ma.variance > 0.0) || !(mb.variance > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return cov / std::sqrt(ma.variance * mb.variance);
}

CorrelationResult correlation_check(const SpectralProfile& profile, double beta, std::size_t trials,
                                    std::uint64_t seed, std::size_t l, const RunOptions& options) {
  if (trials < 200) throw Error(ErrorKind::InsufficientTrials, "correlation check needs at least 200 trials");
  auto terms = sample_equivalent_terms(profile, l, beta, trials, seed, kCorrelationTag, options);
  std::vector<double> fa, fb;
  for (const auto& t : terms) {
    fa.push_back(t.trace_term);
    fb.push_back(t.logdet_term);
  }
  CorrelationResult r;
  r.rho = pearson(fa, fb);
  if (std::isnan(r.rho)) {
    r.degenerate = true;
    r.note = "DegenerateSamples: F_a or F_b has zero sample variance";
  }
  return r;
}

std::pair<double, double> variance_confidence_interval(double sample_variance, std::size_t trials, double level) {
  if (trials < 2) throw Error(ErrorKind::InsufficientTrials, "variance CI needs at least 2 samples");
  const double dof = static_cast<double>(trials - 1);
  boost::math::chi_squared dist(dof);
  const double tail = 0.5 * (1.0 - level);
  double upper_q = boost::math::quantile(dist, 1.0 - tail);
  double lower_q = boost::math::quantile(dist, tail);
  return {dof * sample_variance / upper_q, dof * sample_variance / lower_q};
}

}  // namespace stealthrmt::experiment
