// SPDX-License-Identifier: Apache-2.0
#include "stealthrmt/covariance_models.hpp"

#include <cmath>
#include <string>

#include "stealthrmt/error.hpp"

namespace stealthrmt::cov {

RandomStream::RandomStream(std::uint64_t seed) : engine_(seed) {}

RandomStream RandomStream::substream(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(tag),         static_cast<std::uint32_t>(tag >> 32),
                    static_cast<std::uint32_t>(index),       static_cast<std::uint32_t>(index >> 32)};
  RandomStream out(0);
  out.engine_.seed(seq);
  return out;
}

double RandomStream::chi_squared(double dof) {
  std::chi_squared_distribution<double> dist(dof);
  return dist(engine_);
}

StateCovariance StateCovariance::from_matrix(Eigen::MatrixXd matrix) {
  if (matrix.rows() != matrix.cols()) throw Error(ErrorKind::DimensionMismatch, "covariance must be square");
  if (matrix.size() > 0 && (matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorKind::DegenerateCovariance, "covariance is not symmetric");
  if (matrix.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= 1e-12)
      throw Error(ErrorKind::DegenerateCovariance, "covariance is not positive definite");
  }
  return StateCovariance{std::move(matrix), std::nullopt};
}

StateCovariance toeplitz_covariance(Eigen::Index n, double r) {
  if (n < 1) throw Error(ErrorKind::DimensionMismatch, "toeplitz covariance needs n >= 1");
  if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorKind::OutOfRange, "decay r must lie in [0, 1]");
  if (r == 1.0 && n > 1)
    throw Error(ErrorKind::DegenerateCovariance,
                "r = 1 gives the rank-one all-ones matrix; the state covariance must be full rank");
  StateCovariance out;
  out.decay_r = r;
  out.matrix.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out.matrix(i, j) = std::pow(r, static_cast<double>(std::abs(i - j)));
  return out;
}

double calibrate_noise(const Eigen::MatrixXd& H, const StateCovariance& sigma_xx, double snr_db_value) {
  if (H.cols() != sigma_xx.dim()) throw Error(ErrorKind::DimensionMismatch, "H columns must match the state dimension");
  double signal = (H * sigma_xx.matrix * H.transpose()).trace();
  return signal / (static_cast<double>(H.rows()) * std::pow(10.0, snr_db_value / 10.0));
}

double snr_db(const Eigen::MatrixXd& H, const StateCovariance& sigma_xx, double sigma2) {
  double signal = (H * sigma_xx.matrix * H.transpose()).trace();
  return 10.0 * std::log10(signal / (static_cast<double>(H.rows()) * sigma2));
}

Eigen::MatrixXd sample_states(const StateCovariance& sigma_xx, Eigen::Index k, RandomStream& rng) {
  if (k < 1) throw Error(ErrorKind::InsufficientSamples, "need at least one sample");
  const Eigen::Index n = sigma_xx.dim();
  if (n == 0) return Eigen::MatrixXd(0, k);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_xx.matrix);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::DegenerateCovariance, "Cholesky factorization failed");
  Eigen::MatrixXd white(n, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) white(i, j) = rng.normal();
  return llt.matrixL() * white;
}

SampleCovariance sample_covariance(const Eigen::MatrixXd& samples) {
  const Eigen::Index k = samples.cols();
  if (k < 2) throw Error(ErrorKind::InsufficientSamples, "sample covariance needs k >= 2, got " + std::to_string(k));
  Eigen::VectorXd mean = samples.rowwise().mean();
  Eigen::MatrixXd centered = samples.colwise() - mean;
  Eigen::MatrixXd s = (centered * centered.transpose()) / static_cast<double>(k - 1);
  // Symmetrize away rounding so downstream Cholesky sees an exactly symmetric matrix.
  s = 0.5 * (s + s.transpose()).eval();
  return SampleCovariance{std::move(s), k};
}

NormalizedGaussianMatrix sample_normalized_gaussian(Eigen::Index n, Eigen::Index k_minus_1, RandomStream& rng) {
  if (n < 1 || k_minus_1 < 1) throw Error(ErrorKind::DimensionMismatch, "need n >= 1 and k-1 >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(k_minus_1));
  NormalizedGaussianMatrix z{Eigen::MatrixXd(n, k_minus_1)};
  for (Eigen::Index j = 0; j < k_minus_1; ++j)
    for (Eigen::Index i = 0; i < n; ++i) z.matrix(i, j) = scale * rng.normal();
  return z;
}

Eigen::MatrixXd sample_normalized_wishart(Eigen::Index n, Eigen::Index dof, RandomStream& rng) {
  if (n < 1 || dof < n) throw Error(ErrorKind::DimensionMismatch, "Bartlett sampling needs dof >= n >= 1");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(static_cast<double>(dof - i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  Eigen::MatrixXd w = a * a.transpose() / static_cast<double>(dof);
  return 0.5 * (w + w.transpose());
}

}  // namespace stealthrmt::cov
