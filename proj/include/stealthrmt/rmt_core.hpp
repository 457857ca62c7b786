// SPDX-License-Identifier: Apache-2.0
//
// Large-system behaviour of the learned-attack cost.
//
// With T a nonnegative random variable distributed as a discrete AED and
// beta = (k-1)/n, the eta-transform eta of Z^T T Z at gamma solves
//
//   beta * eta - E[1 / (1 + gamma eta T)] = beta - 1,    eta in (0, 1],
//
// whose left side is increasing in eta, so bisection on (0, 1] always
// brackets the unique root. Everything below is in nats.
#pragma once

#include <string_view>
#include <utility>

#include "stealthrmt/spectrum.hpp"

namespace stealthrmt::rmt {

/// E[1 / (1 + gamma X)].
double eta_transform(const DiscreteAED& aed, double gamma);

/// E[ln(1 + gamma X)].
double shannon_transform(const DiscreteAED& aed, double gamma);

/// Residual beta*eta - eta_T(gamma*eta) - (beta - 1).
double fixed_point_residual(const DiscreteAED& aed, double beta, double gamma, double eta);

/// Unique root of the fixed-point equation by bisection on (0, 1].
/// NoConvergence if the residual is at least 1e-12 while the bracket is still
/// wider than one ulp.
double solve_eta_fixed_point(const DiscreteAED& aed, double beta, double gamma);

/// Shannon transform of Z^T T Z: V_T(gamma eta)/beta + ln(1/eta) + eta - 1.
double product_shannon_transform(const DiscreteAED& aed, double beta, double gamma);

/// Almost-sure limit of F/n averaged over training sets:
///   1/2 (theta + delta_c) - 1/2 (V_L(eta) - beta ln eta + beta (eta - 1)),
/// with eta solved at gamma = 1 on the profile's AED.
double ergodic_performance(const SpectralProfile& profile, double beta);

/// Asymptotic variance of tr(Z^T T Z) for T distributed as `aed_t`:
/// (2/beta) E[T^2]. Exact for Gaussian Z whenever k-1 = beta n.
double trace_statistic_variance(const DiscreteAED& aed_t, double beta);

/// var[F_a] for the profile eigenvalues, i.e. trace_statistic_variance with
/// T = lambda / (1 + lambda).
double var_trace(const DiscreteAED& aed_lambda, double beta);

/// How the log-determinant CLT variance is evaluated.
///  AsPrinted    -ln(1 - E[t]/beta)
///  Squared      -ln(1 - E[t^2]/beta)
///  RealGaussian -2 ln(1 - E[t^2]/beta), the real-valued Z counterpart
/// where t = lambda eta / (1 + lambda eta), eta at gamma = 1.
enum class LogdetVariant { AsPrinted, Squared, RealGaussian };

std::string_view to_string(LogdetVariant v);
LogdetVariant parse_logdet_variant(std::string_view text);

/// var[F_b]; NonpositiveLogArgument when 1 - E[.]/beta <= 0.
double var_logdet(const DiscreteAED& aed_lambda, double beta, LogdetVariant variant);

struct VarianceBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds on var[F] from 0 <= corr(F_a, F_b) <= 1:
///   1/4 (sqrt(var_a) - sqrt(var_b))^2 <= var[F] <= 1/4 (var_a + var_b).
VarianceBounds variance_bounds(const SpectralProfile& profile, double beta, LogdetVariant variant);

/// Cap on upper - lower that holds for any profile:
/// 1/2 sqrt(2/beta) sqrt(-ln(1 - 1/beta)). DomainError for beta <= 1.
double gap_bound(double beta);

struct AsymptoticReport {
  double beta = 0.0;
  double gamma = 1.0;
  double eta = 1.0;
  double shannon_v = 0.0;
  double theta = 0.0;
  double delta_c = 0.0;
  double ergodic_mean = 0.0;
  double var_fa = 0.0;
  double var_fb = 0.0;
  double var_lower = 0.0;
  double var_upper = 0.0;
  double gap_bound = 0.0;
  LogdetVariant logdet_variant = LogdetVariant::AsPrinted;
};

/// Fills every field. When `strict` is false, quantities whose formulas
/// leave their domain (gap_bound for beta <= 1, a nonpositive log argument)
/// are reported as NaN instead of throwing.
AsymptoticReport asymptotic_report(const SpectralProfile& profile, double beta, LogdetVariant variant,
                                   bool strict = true);

}  // namespace stealthrmt::rmt
