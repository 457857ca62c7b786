// SPDX-License-Identifier: Apache-2.0
//
// Value types shared by the attack engine and the asymptotic machinery.
#pragma once

#include <cstddef>
#include <vector>

namespace stealthrmt {

/// Discrete eigenvalue distribution: equal mass 1/n0 on each atom. Every
/// expectation over it is an exact finite average.
class DiscreteAED {
 public:
  DiscreteAED() = default;
  explicit DiscreteAED(std::vector<double> atoms);

  static DiscreteAED point_mass(double atom) { return DiscreteAED({atom}); }

  const std::vector<double>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double weight() const { return 1.0 / static_cast<double>(atoms_.size()); }

  /// Each atom repeated l times (Kronecker product with I_l). The
  /// distribution itself is unchanged.
  DiscreteAED replicated(std::size_t l) const;

  template <class F>
  double expect(F&& f) const {
    double sum = 0.0;
    for (double a : atoms_) sum += f(a);
    return sum / static_cast<double>(atoms_.size());
  }

 private:
  std::vector<double> atoms_;
};

/// Noise-normalized nonzero eigenvalues of H Sigma_XX H^T / sigma^2, sorted
/// descending, with the two per-state constants derived from them:
///   delta_c = mean ln(1 + lambda),  theta = mean lambda / (1 + lambda).
struct SpectralProfile {
  std::vector<double> lambdas;
  std::size_t n0 = 0;
  double delta_c = 0.0;
  double theta = 0.0;

  /// Builds the profile and its constants; DomainError if any lambda <= 0
  /// unless `allow_zero` (used for the no-signal limit).
  static SpectralProfile from_lambdas(std::vector<double> lambdas, bool allow_zero = false);

  DiscreteAED aed() const { return DiscreteAED(lambdas); }

  /// Diagonal of Lambda_n0 (x) I_l: each eigenvalue repeated l times.
  std::vector<double> replicated(std::size_t l) const;
};

}  // namespace stealthrmt
