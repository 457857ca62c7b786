// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Dense>

namespace stealthrmt::cov {

/// Seedable generator. Trials draw from substreams keyed by
/// (master seed, stream tag, index) so that results do not depend on the
/// order in which trials execute.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  static RandomStream substream(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index);

  double normal() { return normal_(engine_); }
  double chi_squared(double dof);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct StateCovariance {
  Eigen::MatrixXd matrix;
  std::optional<double> decay_r;

  Eigen::Index dim() const { return matrix.rows(); }

  /// Wraps an arbitrary matrix; DegenerateCovariance unless symmetric to
  /// 1e-12 and positive definite.
  static StateCovariance from_matrix(Eigen::MatrixXd matrix);
};

struct SampleCovariance {
  Eigen::MatrixXd matrix;
  Eigen::Index sample_count_k = 0;
};

/// n x (k-1) matrix of i.i.d. N(0, 1/(k-1)) entries.
struct NormalizedGaussianMatrix {
  Eigen::MatrixXd matrix;

  double entry_variance() const { return 1.0 / static_cast<double>(matrix.cols()); }
};

/// Sigma_ij = r^|i-j|. r = 1 with n > 1 is rejected (rank one).
StateCovariance toeplitz_covariance(Eigen::Index n, double r);

/// sigma^2 = tr(H Sigma H^T) / (m 10^(snr_db/10)).
double calibrate_noise(const Eigen::MatrixXd& H, const StateCovariance& sigma_xx, double snr_db);

/// Inverse of calibrate_noise: 10 log10(tr(H Sigma H^T) / (m sigma^2)).
double snr_db(const Eigen::MatrixXd& H, const StateCovariance& sigma_xx, double sigma2);

/// k draws from N(0, Sigma) as the columns of an n x k matrix (Cholesky coloring).
Eigen::MatrixXd sample_states(const StateCovariance& sigma_xx, Eigen::Index k, RandomStream& rng);

/// Unbiased estimator over the columns of `samples`; InsufficientSamples for k < 2.
SampleCovariance sample_covariance(const Eigen::MatrixXd& samples);

NormalizedGaussianMatrix sample_normalized_gaussian(Eigen::Index n, Eigen::Index k_minus_1, RandomStream& rng);

/// Draws Z Z^T for Z ~ NormalizedGaussianMatrix(n, dof) without forming Z,
/// via the Bartlett decomposition. Requires dof >= n.
Eigen::MatrixXd sample_normalized_wishart(Eigen::Index n, Eigen::Index dof, RandomStream& rng);

}  // namespace stealthrmt::cov
