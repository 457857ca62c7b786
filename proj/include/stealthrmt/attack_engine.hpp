// SPDX-License-Identifier: Apache-2.0
//
// Stealth attack construction and the KL data-integrity cost.
//
// The attacker injects A ~ N(0, Sigma_AA). With perfect knowledge the optimal
// covariance is H Sigma_XX H^T; a learning attacker substitutes the sample
// covariance. The cost of either is
//
//   F = 1/2 [ tr(Sigma_YY^-1 Sigma_AA) - ln|Sigma_AA + s2 I| + ln|Sigma_YY| ],
//   Sigma_YY = H Sigma_XX H^T + s2 I,
//
// in nats. For a learned attack F has the same law as the spectral form
//
//   F = 1/2 [ tr(Z^T (L + I)^-1 L Z) - ln|Z^T L Z + I| + ln|L + I| ]
//
// with L the diagonal of noise-normalized eigenvalues and Z an n x (k-1)
// matrix of i.i.d. N(0, 1/(k-1)) entries.
#pragma once

#include <span>

#include <Eigen/Dense>

#include "stealthrmt/covariance_models.hpp"
#include "stealthrmt/spectrum.hpp"

namespace stealthrmt::attack {

enum class Provenance { Perfect, Learned };

struct AttackCovariance {
  Eigen::MatrixXd matrix;  // m x m, symmetric PSD
  Provenance provenance = Provenance::Perfect;
};

AttackCovariance optimal_attack_covariance(const Eigen::MatrixXd& H, const cov::StateCovariance& sigma);
AttackCovariance optimal_attack_covariance(const Eigen::MatrixXd& H, const cov::SampleCovariance& sigma);

/// One-shot evaluation of F. Throws SingularMatrix when Sigma_YY or
/// Sigma_AA + s2 I is not positive definite.
double kl_cost(const AttackCovariance& attack, const Eigen::MatrixXd& H, const cov::StateCovariance& sigma_xx,
               double sigma2);

/// Factorizes Sigma_YY once so that many attacks against the same system
/// can be scored cheaply.
class KlCostModel {
 public:
  KlCostModel(const Eigen::MatrixXd& H, const cov::StateCovariance& sigma_xx, double sigma2);

  double cost(const Eigen::MatrixXd& attack_matrix) const;
  double cost(const AttackCovariance& attack) const { return cost(attack.matrix); }

  /// Cost of the attack built from a sample covariance of the states.
  double learned_cost(const cov::SampleCovariance& s) const;

  Eigen::Index m() const { return H_.rows(); }
  Eigen::Index n() const { return H_.cols(); }

 private:
  Eigen::MatrixXd H_;
  double sigma2_;
  Eigen::LLT<Eigen::MatrixXd> syy_;
  Eigen::MatrixXd syy_inv_;
  Eigen::MatrixXd projected_inv_;  // H^T Sigma_YY^-1 H
  double logdet_syy_ = 0.0;
};

/// Eigenvalues of H Sigma_XX H^T / s2 restricted to the n nonzero ones.
/// RankDeficient when fewer than n exceed 1e-10 of the largest.
SpectralProfile spectral_profile(const Eigen::MatrixXd& H, const cov::StateCovariance& sigma_xx, double sigma2);

/// The two random pieces of the spectral form plus its constant.
struct EquivalentTerms {
  double trace_term = 0.0;   // F_a = tr(Z^T (L + I)^-1 L Z)
  double logdet_term = 0.0;  // F_b = ln|Z^T L Z + I|
  double constant = 0.0;     // ln|L + I|

  double cost() const { return 0.5 * (trace_term - logdet_term + constant); }
};

/// `lambdas` is the (possibly replicated) diagonal of L, one entry per row
/// of z. The log-determinant uses whichever Gram form is smaller.
EquivalentTerms equivalent_terms(const cov::NormalizedGaussianMatrix& z, std::span<const double> lambdas);

/// Same terms computed from W = Z Z^T alone (n x n); F only depends on Z
/// through W, which lets large k-1 be sampled without forming Z.
EquivalentTerms equivalent_terms_from_gram(const Eigen::MatrixXd& w, std::span<const double> lambdas);

double equivalent_cost(const cov::NormalizedGaussianMatrix& z, std::span<const double> lambdas);

/// F of the perfect attack, 1/2 sum lambda/(1+lambda) over the replicated
/// dimension l*n0. Per state this is theta/2.
double perfect_knowledge_cost(const SpectralProfile& profile, std::size_t replication_l = 1);

}  // namespace stealthrmt::attack
