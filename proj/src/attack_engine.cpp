// SPDX-License-Identifier: Apache-2.0
#include "stealthrmt/attack_engine.hpp"

#include <cmath>
#include <string>

#include "stealthrmt/error.hpp"
#include "stealthrmt/grid_io.hpp"

namespace stealthrmt::attack {
namespace {

double logdet_spd(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularMatrix, std::string(what) + " is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

void check_dims(const Eigen::MatrixXd& H, Eigen::Index state_dim) {
  if (H.cols() != state_dim)
    throw Error(ErrorKind::DimensionMismatch, "H has " + std::to_string(H.cols()) + " columns but the covariance is " +
                                                  std::to_string(state_dim) + "-dimensional");
}

Eigen::MatrixXd sandwich(const Eigen::MatrixXd& H, const Eigen::MatrixXd& s) {
  Eigen::MatrixXd out = H * s * H.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

AttackCovariance optimal_attack_covariance(const Eigen::MatrixXd& H, const cov::StateCovariance& sigma) {
  check_dims(H, sigma.dim());
  return {sandwich(H, sigma.matrix), Provenance::Perfect};
}

AttackCovariance optimal_attack_covariance(const Eigen::MatrixXd& H, const cov::SampleCovariance& sigma) {
  check_dims(H, sigma.matrix.rows());
  return {sandwich(H, sigma.matrix), Provenance::Learned};
}

double kl_cost(const AttackCovariance& attack, const Eigen::MatrixXd& H, const cov::StateCovariance& sigma_xx,
               double sigma2) {
  return KlCostModel(H, sigma_xx, sigma2).cost(attack);
}

KlCostModel::KlCostModel(const Eigen::MatrixXd& H, const cov::StateCovariance& sigma_xx, double sigma2)
    : H_(H), sigma2_(sigma2) {
  check_dims(H, sigma_xx.dim());
  if (!(sigma2 > 0.0)) throw Error(ErrorKind::SingularMatrix, "noise variance must be positive");
  Eigen::MatrixXd syy = sandwich(H, sigma_xx.matrix);
  syy.diagonal().array() += sigma2;
  syy_.compute(syy);
  if (syy_.info() != Eigen::Success) throw Error(ErrorKind::SingularMatrix, "Sigma_YY is not positive definite");
  logdet_syy_ = 2.0 * syy_.matrixLLT().diagonal().array().log().sum();
  syy_inv_ = syy_.solve(Eigen::MatrixXd::Identity(syy.rows(), syy.cols()));
  projected_inv_ = H_.transpose() * syy_inv_ * H_;
}

double KlCostModel::cost(const Eigen::MatrixXd& attack_matrix) const {
  if (attack_matrix.rows() != H_.rows() || attack_matrix.cols() != H_.rows())
    throw Error(ErrorKind::DimensionMismatch, "attack covariance must be m x m");
  double trace = syy_inv_.cwiseProduct(attack_matrix).sum();
  Eigen::MatrixXd shifted = attack_matrix;
  shifted.diagonal().array() += sigma2_;
  return 0.5 * (trace - logdet_spd(shifted, "Sigma_AA + sigma^2 I") + logdet_syy_);
}

double KlCostModel::learned_cost(const cov::SampleCovariance& s) const {
  if (s.matrix.rows() != H_.cols()) throw Error(ErrorKind::DimensionMismatch, "sample covariance must be n x n");
  double trace = projected_inv_.cwiseProduct(s.matrix).sum();
  Eigen::MatrixXd shifted = sandwich(H_, s.matrix);
  shifted.diagonal().array() += sigma2_;
  return 0.5 * (trace - logdet_spd(shifted, "Sigma_AA + sigma^2 I") + logdet_syy_);
}

SpectralProfile spectral_profile(const Eigen::MatrixXd& H, const cov::StateCovariance& sigma_xx, double sigma2) {
  check_dims(H, sigma_xx.dim());
  if (!(sigma2 > 0.0)) throw Error(ErrorKind::DomainError, "noise variance must be positive");
  const Eigen::Index n = H.cols();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sqrt_solver(sigma_xx.matrix);
  Eigen::MatrixXd root = sqrt_solver.operatorSqrt();
  // Same nonzero spectrum as H Sigma H^T, but n x n.
  Eigen::MatrixXd core = root * (H.transpose() * H) * root;
  core = 0.5 * (core + core.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(core, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& values = eig.eigenvalues();
  double largest = values.size() ? values.maxCoeff() : 0.0;
  std::vector<double> lambdas;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values(i) > grid::kRankTolerance * largest) lambdas.push_back(values(i) / sigma2);
  if (static_cast<Eigen::Index>(lambdas.size()) < n || largest <= 0.0)
    throw Error(ErrorKind::RankDeficient, "H Sigma_XX H^T has only " + std::to_string(lambdas.size()) +
                                              " nonzero eigenvalues, expected " + std::to_string(n));
  return SpectralProfile::from_lambdas(std::move(lambdas));
}

EquivalentTerms equivalent_terms(const cov::NormalizedGaussianMatrix& z, std::span<const double> lambdas) {
  const Eigen::MatrixXd& zm = z.matrix;
  if (zm.rows() != static_cast<Eigen::Index>(lambdas.size()))
    throw Error(ErrorKind::DimensionMismatch, "Z has " + std::to_string(zm.rows()) + " rows but the profile has " +
                                                  std::to_string(lambdas.size()) + " eigenvalues");
  Eigen::Map<const Eigen::VectorXd> lam(lambdas.data(), static_cast<Eigen::Index>(lambdas.size()));
  EquivalentTerms t;
  Eigen::VectorXd shrink = lam.array() / (1.0 + lam.array());
  t.trace_term = (zm.array().square().colwise() * shrink.array()).sum();
  t.constant = lam.array().log1p().sum();
  Eigen::MatrixXd scaled = lam.array().sqrt().matrix().asDiagonal() * zm;
  Eigen::MatrixXd gram = scaled.cols() < scaled.rows() ? Eigen::MatrixXd(scaled.transpose() * scaled)
                                                       : Eigen::MatrixXd(scaled * scaled.transpose());
  gram.diagonal().array() += 1.0;
  t.logdet_term = logdet_spd(gram, "Z^T L Z + I");
  return t;
}

EquivalentTerms equivalent_terms_from_gram(const Eigen::MatrixXd& w, std::span<const double> lambdas) {
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  if (w.rows() != n || w.cols() != n) throw Error(ErrorKind::DimensionMismatch, "Gram matrix must be n x n");
  Eigen::Map<const Eigen::VectorXd> lam(lambdas.data(), n);
  EquivalentTerms t;
  t.trace_term = (w.diagonal().array() * lam.array() / (1.0 + lam.array())).sum();
  t.constant = lam.array().log1p().sum();
  Eigen::VectorXd root = lam.array().sqrt();
  Eigen::MatrixXd inner = root.asDiagonal() * w * root.asDiagonal();
  inner = 0.5 * (inner + inner.transpose()).eval();
  inner.diagonal().array() += 1.0;
  t.logdet_term = logdet_spd(inner, "I + L^1/2 W L^1/2");
  return t;
}

double equivalent_cost(const cov::NormalizedGaussianMatrix& z, std::span<const double> lambdas) {
  return equivalent_terms(z, lambdas).cost();
}

double perfect_knowledge_cost(const SpectralProfile& profile, std::size_t replication_l) {
  double sum = 0.0;
  for (double v : profile.lambdas) sum += v / (1.0 + v);
  return 0.5 * sum * static_cast<double>(replication_l);
}

}  // namespace stealthrmt::attack
