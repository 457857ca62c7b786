// SPDX-License-Identifier: Apache-2.0
#include "stealthrmt/rmt_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stealthrmt/error.hpp"

namespace stealthrmt::rmt {
namespace {

constexpr double kResidualTolerance = 1e-12;
constexpr int kMaxBisections = 200;

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) throw Error(ErrorKind::DomainError, std::string(name) + " must be positive");
}

// -ln(1 - x/beta) with the domain check shared by the variants.
double neg_log_one_minus(double x, double beta) {
  double arg = 1.0 - x / beta;
  if (!(arg > 0.0))
    throw Error(ErrorKind::NonpositiveLogArgument,
                "1 - E/beta = " + std::to_string(arg) + " at beta = " + std::to_string(beta));
  return -std::log(arg);
}

}  // namespace

double eta_transform(const DiscreteAED& aed, double gamma) {
  if (gamma < 0.0) throw Error(ErrorKind::DomainError, "gamma must be nonnegative");
  return aed.expect([gamma](double x) { return 1.0 / (1.0 + gamma * x); });
}

double shannon_transform(const DiscreteAED& aed, double gamma) {
  if (gamma < 0.0) throw Error(ErrorKind::DomainError, "gamma must be nonnegative");
  return aed.expect([gamma](double x) { return std::log1p(gamma * x); });
}

double fixed_point_residual(const DiscreteAED& aed, double beta, double gamma, double eta) {
  // beta*eta - (beta - 1) written to stay accurate for eta near 1.
  return beta * (eta - 1.0) + 1.0 - eta_transform(aed, gamma * eta);
}

double solve_eta_fixed_point(const DiscreteAED& aed, double beta, double gamma) {
  require_positive(beta, "beta");
  require_positive(gamma, "gamma");
  double lo = 0.0;
  double hi = 1.0;
  if (fixed_point_residual(aed, beta, gamma, hi) <= 0.0) return 1.0;
  for (int i = 0; i < kMaxBisections; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fixed_point_residual(aed, beta, gamma, mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  double r_lo = std::abs(fixed_point_residual(aed, beta, gamma, lo));
  double r_hi = std::abs(fixed_point_residual(aed, beta, gamma, hi));
  double eta = r_lo < r_hi ? lo : hi;
  double residual = std::min(r_lo, r_hi);
  // At large beta one ulp of eta moves the residual by about beta * 1e-16, so
  // a sign change across adjacent doubles is accepted as converged.
  bool at_machine_precision = std::nextafter(lo, hi) >= hi;
  if (!(eta > 0.0) || !(residual < kResidualTolerance || at_machine_precision))
    throw Error(ErrorKind::NoConvergence, "fixed point residual " + std::to_string(residual) + " at beta = " +
                                              std::to_string(beta) + ", gamma = " + std::to_string(gamma));
  return eta;
}

double product_shannon_transform(const DiscreteAED& aed, double beta, double gamma) {
  double eta = solve_eta_fixed_point(aed, beta, gamma);
  return shannon_transform(aed, gamma * eta) / beta - std::log1p(eta - 1.0) + (eta - 1.0);
}

double ergodic_performance(const SpectralProfile& profile, double beta) {
  DiscreteAED aed = profile.aed();
  double eta = solve_eta_fixed_point(aed, beta, 1.0);
  double penalty = shannon_transform(aed, eta) - beta * std::log1p(eta - 1.0) + beta * (eta - 1.0);
  return 0.5 * (profile.theta + profile.delta_c) - 0.5 * penalty;
}

double trace_statistic_variance(const DiscreteAED& aed_t, double beta) {
  require_positive(beta, "beta");
  return 2.0 / beta * aed_t.expect([](double t) { return t * t; });
}

double var_trace(const DiscreteAED& aed_lambda, double beta) {
  require_positive(beta, "beta");
  return 2.0 / beta * aed_lambda.expect([](double x) {
    double t = x / (1.0 + x);
    return t * t;
  });
}

std::string_view to_string(LogdetVariant v) {
  switch (v) {
    case LogdetVariant::AsPrinted: return "as-printed";
    case LogdetVariant::Squared: return "squared";
    case LogdetVariant::RealGaussian: return "real-gaussian";
  }
  return "unknown";
}

LogdetVariant parse_logdet_variant(std::string_view text) {
  if (text == "as-printed") return LogdetVariant::AsPrinted;
  if (text == "squared") return LogdetVariant::Squared;
  if (text == "real-gaussian") return LogdetVariant::RealGaussian;
  throw Error(ErrorKind::OutOfRange, "unknown logdet variant '" + std::string(text) + "'");
}

double var_logdet(const DiscreteAED& aed_lambda, double beta, LogdetVariant variant) {
  require_positive(beta, "beta");
  double eta = solve_eta_fixed_point(aed_lambda, beta, 1.0);
  auto ratio = [eta](double x) { return x * eta / (1.0 + x * eta); };
  switch (variant) {
    case LogdetVariant::AsPrinted:
      return neg_log_one_minus(aed_lambda.expect(ratio), beta);
    case LogdetVariant::Squared:
    case LogdetVariant::RealGaussian: {
      double e2 = aed_lambda.expect([&](double x) {
        double t = ratio(x);
        return t * t;
      });
      double v = neg_log_one_minus(e2, beta);
      return variant == LogdetVariant::RealGaussian ? 2.0 * v : v;
    }
  }
  return 0.0;
}

VarianceBounds variance_bounds(const SpectralProfile& profile, double beta, LogdetVariant variant) {
  DiscreteAED aed = profile.aed();
  double a = var_trace(aed, beta);
  double b = var_logdet(aed, beta, variant);
  double gap = std::sqrt(a) - std::sqrt(b);
  return {0.25 * gap * gap, 0.25 * (a + b)};
}

double gap_bound(double beta) {
  if (!(beta > 1.0)) throw Error(ErrorKind::DomainError, "gap bound needs beta > 1, got " + std::to_string(beta));
  return 0.5 * std::sqrt(2.0 / beta) * std::sqrt(-std::log1p(-1.0 / beta));
}

AsymptoticReport asymptotic_report(const SpectralProfile& profile, double beta, LogdetVariant variant, bool strict) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  DiscreteAED aed = profile.aed();
  AsymptoticReport r;
  r.beta = beta;
  r.gamma = 1.0;
  r.logdet_variant = variant;
  r.theta = profile.theta;
  r.delta_c = profile.delta_c;
  r.eta = solve_eta_fixed_point(aed, beta, 1.0);
  r.shannon_v = product_shannon_transform(aed, beta, 1.0);
  r.ergodic_mean = ergodic_performance(profile, beta);
  r.var_fa = var_trace(aed, beta);
  try {
    r.var_fb = var_logdet(aed, beta, variant);
    double gap = std::sqrt(r.var_fa) - std::sqrt(r.var_fb);
    r.var_lower = 0.25 * gap * gap;
    r.var_upper = 0.25 * (r.var_fa + r.var_fb);
  } catch (const Error& e) {
    if (strict || e.kind() != ErrorKind::NonpositiveLogArgument) throw;
    r.var_fb = r.var_lower = r.var_upper = nan;
  }
  try {
    r.gap_bound = gap_bound(beta);
  } catch (const Error&) {
    if (strict) throw;
    r.gap_bound = nan;
  }
  return r;
}

}  // namespace stealthrmt::rmt
