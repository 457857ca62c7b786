// SPDX-License-Identifier: Apache-2.0
#include "stealthrmt/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "stealthrmt/error.hpp"

namespace stealthrmt {

DiscreteAED::DiscreteAED(std::vector<double> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw Error(ErrorKind::DimensionMismatch, "an AED needs at least one atom");
  for (double a : atoms_)
    if (!(a >= 0.0) || !std::isfinite(a)) throw Error(ErrorKind::DomainError, "AED atoms must be finite and nonnegative");
}

DiscreteAED DiscreteAED::replicated(std::size_t l) const {
  std::vector<double> out;
  out.reserve(atoms_.size() * l);
  for (double a : atoms_) out.insert(out.end(), l, a);
  return DiscreteAED(std::move(out));
}

SpectralProfile SpectralProfile::from_lambdas(std::vector<double> lambdas, bool allow_zero) {
  if (lambdas.empty()) throw Error(ErrorKind::DimensionMismatch, "empty spectral profile");
  for (double v : lambdas) {
    if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0))
      throw Error(ErrorKind::DomainError, "profile eigenvalues must be positive");
  }
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  SpectralProfile p;
  p.n0 = lambdas.size();
  double dc = 0.0;
  double th = 0.0;
  for (double v : lambdas) {
    dc += std::log1p(v);
    th += v / (1.0 + v);
  }
  p.delta_c = dc / static_cast<double>(p.n0);
  p.theta = th / static_cast<double>(p.n0);
  p.lambdas = std::move(lambdas);
  return p;
}

std::vector<double> SpectralProfile::replicated(std::size_t l) const {
  std::vector<double> out;
  out.reserve(lambdas.size() * l);
  for (double v : lambdas) out.insert(out.end(), l, v);
  return out;
}

}  // namespace stealthrmt
