// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "stealthrmt/attack_engine.hpp"
#include "stealthrmt/error.hpp"
#include "support.hpp"

using namespace stealthrmt;
using namespace stealthrmt::attack;
using stealthrmt::testing::error_kind_of;

namespace {

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

cov::StateCovariance unit_cov(Eigen::Index n) {
  return cov::StateCovariance::from_matrix(Eigen::MatrixXd::Identity(n, n));
}

/// KL cost written out from the Gaussian divergence formula, with no shared code.
double kl_oracle(const Eigen::MatrixXd& attack, const Eigen::MatrixXd& H, const Eigen::MatrixXd& sxx, double s2) {
  const Eigen::Index m = H.rows();
  Eigen::MatrixXd syy = H * sxx * H.transpose() + s2 * Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd saa = attack + s2 * Eigen::MatrixXd::Identity(m, m);
  double tr = syy.inverse().cwiseProduct(attack).sum();
  return 0.5 * (tr - std::log(saa.determinant()) + std::log(syy.determinant()));
}

}  // namespace

TEST_CASE("optimal attack covariance") {
  auto one = cov::StateCovariance::from_matrix(scalar(1.0));
  CHECK(optimal_attack_covariance(scalar(1.0), one).matrix == scalar(1.0));
  CHECK(optimal_attack_covariance(scalar(1.0), one).provenance == Provenance::Perfect);

  cov::StateCovariance zero{Eigen::MatrixXd::Zero(2, 2), std::nullopt};
  Eigen::MatrixXd H = Eigen::MatrixXd::Random(4, 2);
  CHECK(optimal_attack_covariance(H, zero).matrix.isZero(0.0));

  auto ring = grid::build_dc_jacobian(grid::parse_matpower(stealthrmt::testing::kRing3)).H;
  auto a = optimal_attack_covariance(ring, unit_cov(2)).matrix;
  CHECK(a == ring * ring.transpose());
  CHECK(a == a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
  CHECK(grid::numerical_rank(a) == 2);

  cov::SampleCovariance s{Eigen::MatrixXd::Identity(2, 2), 10};
  CHECK(optimal_attack_covariance(ring, s).provenance == Provenance::Learned);
  CHECK(error_kind_of([&] { optimal_attack_covariance(ring, unit_cov(3)); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("scalar KL costs") {
  auto one = cov::StateCovariance::from_matrix(scalar(1.0));
  AttackCovariance perfect{scalar(1.0), Provenance::Perfect};
  AttackCovariance none{scalar(0.0), Provenance::Perfect};
  CHECK(kl_cost(perfect, scalar(1.0), one, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(kl_cost(none, scalar(1.0), one, 1.0) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));
  SpectralProfile p = SpectralProfile::from_lambdas({1.0});
  CHECK(perfect_knowledge_cost(p) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("KL cost agrees with the dense-determinant formula") {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 2 + rep % 4, m = n + 1 + rep % 3;
    Eigen::MatrixXd H = Eigen::MatrixXd::Random(m, n);
    auto sxx = cov::toeplitz_covariance(n, 0.1 * (rep % 9));
    Eigen::MatrixXd b = Eigen::MatrixXd::Random(m, m);
    Eigen::MatrixXd attack = b * b.transpose();
    double s2 = 0.05 + 0.1 * rep;
    CHECK(kl_cost({attack, Provenance::Learned}, H, sxx, s2) ==
          doctest::Approx(kl_oracle(attack, H, sxx.matrix, s2)).epsilon(1e-10));
  }
}

TEST_CASE("perfect attack cost is half the sum of lambda / (1 + lambda)") {
  auto setup = stealthrmt::testing::ieee30_setup(0.8);
  auto perfect = optimal_attack_covariance(setup.H, setup.sigma_xx);
  double direct = kl_cost(perfect, setup.H, setup.sigma_xx, setup.sigma2);
  CHECK(direct == doctest::Approx(perfect_knowledge_cost(setup.profile)).epsilon(1e-10));
  CHECK(perfect_knowledge_cost(setup.profile, 3) == doctest::Approx(3 * direct).epsilon(1e-10));
}

TEST_CASE("perfect knowledge cost examples") {
  CHECK(perfect_knowledge_cost(SpectralProfile::from_lambdas({1, 1, 1, 1})) == doctest::Approx(1.0));
  CHECK(perfect_knowledge_cost(SpectralProfile::from_lambdas({1e12, 1e12})) == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("learned attacks never beat the perfect attack") {
  auto setup = stealthrmt::testing::ieee30_setup(0.1);
  KlCostModel model(setup.H, setup.sigma_xx, setup.sigma2);
  const double perfect = model.cost(optimal_attack_covariance(setup.H, setup.sigma_xx));
  int violations = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    auto rng = cov::RandomStream::substream(5, 0, t);
    const Eigen::Index k = 31 + static_cast<Eigen::Index>(t % 300);
    auto s = cov::sample_covariance(cov::sample_states(setup.sigma_xx, k, rng));
    if (model.learned_cost(s) < perfect) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("cost model matches the free function") {
  auto setup = stealthrmt::testing::ieee30_setup(0.8);
  KlCostModel model(setup.H, setup.sigma_xx, setup.sigma2);
  CHECK(model.m() == 70);
  CHECK(model.n() == 29);
  auto rng = cov::RandomStream::substream(1, 0, 0);
  auto s = cov::sample_covariance(cov::sample_states(setup.sigma_xx, 60, rng));
  auto learned = optimal_attack_covariance(setup.H, s);
  CHECK(model.learned_cost(s) ==
        doctest::Approx(kl_cost(learned, setup.H, setup.sigma_xx, setup.sigma2)).epsilon(1e-9));
  CHECK(error_kind_of([&] { model.cost(Eigen::MatrixXd::Zero(3, 3)); }) == ErrorKind::DimensionMismatch);
  Eigen::MatrixXd neg = -2.0 * setup.sigma2 * Eigen::MatrixXd::Identity(70, 70);
  CHECK(error_kind_of([&] { model.cost(neg); }) == ErrorKind::SingularMatrix);
}

TEST_CASE("spectral profile") {
  SUBCASE("orthonormal columns, identity covariance") {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Random(6, 3));
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(6, 3);
    auto p = spectral_profile(q, unit_cov(3), 1.0);
    for (double l : p.lambdas) CHECK(l == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("scalar H = 2, sigma^2 = 4") {
    auto p = spectral_profile(scalar(2.0), cov::StateCovariance::from_matrix(scalar(1.0)), 4.0);
    REQUIRE(p.n0 == 1);
    CHECK(p.lambdas[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("IEEE-30 constants are consistent with the eigenvalues") {
    auto setup = stealthrmt::testing::ieee30_setup(0.8);
    const auto& p = setup.profile;
    REQUIRE(p.n0 == 29);
    double dc = 0.0, th = 0.0;
    for (double l : p.lambdas) {
      CHECK(l > 0.0);
      dc += std::log1p(l);
      th += l / (1.0 + l);
    }
    CHECK(std::abs(dc / 29.0 - p.delta_c) < 1e-12);
    CHECK(std::abs(th / 29.0 - p.theta) < 1e-12);
    CHECK(std::is_sorted(p.lambdas.rbegin(), p.lambdas.rend()));
    // Same spectrum as H Sigma H^T / sigma^2, computed the other way round.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(setup.H * setup.sigma_xx.matrix * setup.H.transpose() /
                                                      setup.sigma2);
    auto ev = es.eigenvalues();
    for (std::size_t i = 0; i < 29; ++i)
      CHECK(p.lambdas[i] == doctest::Approx(ev(ev.size() - 1 - static_cast<Eigen::Index>(i))).epsilon(1e-9));
  }
  SUBCASE("noise rescaling composes with covariance rescaling") {
    auto setup = stealthrmt::testing::ieee30_setup(0.1);
    for (double c : {0.01, 3.0, 250.0}) {
      auto a = spectral_profile(setup.H, setup.sigma_xx, c * setup.sigma2);
      auto scaled = cov::StateCovariance::from_matrix(setup.sigma_xx.matrix / c);
      auto b = spectral_profile(setup.H, scaled, setup.sigma2);
      for (std::size_t i = 0; i < a.n0; ++i)
        CHECK(std::abs(a.lambdas[i] - b.lambdas[i]) <= 1e-10 * std::max(1.0, a.lambdas[i]));
    }
  }
  SUBCASE("rank-deficient H") {
    Eigen::MatrixXd H(3, 2);
    H << 1, 2, 2, 4, 3, 6;
    CHECK(error_kind_of([&] { spectral_profile(H, unit_cov(2), 1.0); }) == ErrorKind::RankDeficient);
  }
}

TEST_CASE("equivalent form") {
  std::vector<double> lambdas = {9.0, 4.0, 2.5, 1.0, 0.3};
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  SpectralProfile p = SpectralProfile::from_lambdas(lambdas);

  SUBCASE("Z = 0 leaves the constant term") {
    cov::NormalizedGaussianMatrix z{Eigen::MatrixXd::Zero(n, 7)};
    CHECK(equivalent_cost(z, lambdas) == doctest::Approx(0.5 * static_cast<double>(n) * p.delta_c).epsilon(1e-14));
  }
  SUBCASE("no signal, no divergence") {
    auto rng = cov::RandomStream::substream(0, 0, 0);
    auto z = cov::sample_normalized_gaussian(3, 4, rng);
    std::vector<double> tiny(3, 1e-300);
    CHECK(std::abs(equivalent_cost(z, tiny)) < 1e-250);
  }
  SUBCASE("matches the cost of the learned attack built from Z on the diagonal system") {
    // H = I, Sigma = L, sigma^2 = 1 and S = L^1/2 Z Z^T L^1/2 give the equivalent expression exactly.
    Eigen::VectorXd l = Eigen::Map<const Eigen::VectorXd>(lambdas.data(), n);
    Eigen::MatrixXd root = l.cwiseSqrt().asDiagonal();
    Eigen::MatrixXd sigma = l.asDiagonal();
    auto sxx = cov::StateCovariance::from_matrix(sigma);
    for (Eigen::Index dof : {2, 5, 40}) {
      auto rng = cov::RandomStream::substream(1, 2, static_cast<std::uint64_t>(dof));
      auto z = cov::sample_normalized_gaussian(n, dof, rng);
      Eigen::MatrixXd attack = root * z.matrix * z.matrix.transpose() * root;
      double oracle = kl_oracle(attack, Eigen::MatrixXd::Identity(n, n), sigma, 1.0);
      CHECK(equivalent_cost(z, lambdas) == doctest::Approx(oracle).epsilon(1e-11));
      auto terms = equivalent_terms(z, lambdas);
      auto gram = equivalent_terms_from_gram(z.matrix * z.matrix.transpose(), lambdas);
      CHECK(gram.trace_term == doctest::Approx(terms.trace_term).epsilon(1e-12));
      CHECK(gram.logdet_term == doctest::Approx(terms.logdet_term).epsilon(1e-12));
      CHECK(gram.constant == doctest::Approx(terms.constant).epsilon(1e-14));
      CHECK(kl_cost({attack, Provenance::Learned}, Eigen::MatrixXd::Identity(n, n), sxx, 1.0) ==
            doctest::Approx(oracle).epsilon(1e-11));
    }
  }
  SUBCASE("invariant under a joint permutation of lambdas and the rows of Z") {
    std::mt19937_64 gen(12);
    auto rng = cov::RandomStream::substream(9, 9, 9);
    auto z = cov::sample_normalized_gaussian(n, 8, rng);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int rep = 0; rep < 10; ++rep) {
      std::shuffle(perm.begin(), perm.end(), gen);
      cov::NormalizedGaussianMatrix zp{Eigen::MatrixXd(n, 8)};
      std::vector<double> lp(lambdas.size());
      for (std::size_t i = 0; i < perm.size(); ++i) {
        zp.matrix.row(static_cast<Eigen::Index>(i)) = z.matrix.row(perm[i]);
        lp[i] = lambdas[static_cast<std::size_t>(perm[i])];
      }
      CHECK(equivalent_cost(zp, lp) == doctest::Approx(equivalent_cost(z, lambdas)).epsilon(1e-12));
    }
  }
  SUBCASE("row count must match") {
    cov::NormalizedGaussianMatrix z{Eigen::MatrixXd::Zero(n + 1, 3)};
    CHECK(error_kind_of([&] { equivalent_cost(z, lambdas); }) == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("spectral profile validation and replication") {
  CHECK(error_kind_of([] { SpectralProfile::from_lambdas({1.0, 0.0}); }) == ErrorKind::DomainError);
  CHECK(error_kind_of([] { SpectralProfile::from_lambdas({}); }) == ErrorKind::DimensionMismatch);
  CHECK_NOTHROW(SpectralProfile::from_lambdas({1.0, 0.0}, true));
  auto p = SpectralProfile::from_lambdas({3.0, 1.0});
  auto r = p.replicated(3);
  CHECK(r.size() == 6);
  CHECK(std::count(r.begin(), r.end(), 3.0) == 3);
}
