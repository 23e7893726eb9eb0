#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>

namespace cbdp {

using Integrand = std::function<double(double)>;

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

inline constexpr int kMaxDepth = 60;
inline constexpr std::size_t kMaxSegments = 20000;
inline constexpr double kDefaultTol = 1e-10;

// Globally adaptive 21-point Gauss-Kronrod quadrature on [a, b]. Succeeds when
// the summed error estimate is below max(tol, tol * |value|); throws
// QuadratureError (carrying the best estimate) when an interval would have to
// be bisected more than kMaxDepth times or kMaxSegments intervals are in use.
QuadResult integrate(const Integrand& f, double a, double b, double tol = kDefaultTol);

// Integral over [a, inf) for f eventually dominated by C exp(-decay_rate t).
// Maps t = a - ln(u) / decay_rate onto u in (0, 1].
QuadResult integrate_to_infinity(const Integrand& f, double a, double tol, double decay_rate);

// Integral over [a, inf) for f with an algebraic tail. Maps
// t = a + scale * u / (1 - u) onto u in [0, 1).
QuadResult integrate_to_infinity_algebraic(const Integrand& f, double a, double tol,
                                           double scale = 1.0);

// Returns x in [lo, hi] with |F(x) - target| <= tol for nondecreasing F.
// Bracketed bisection with secant steps; throws DomainError when target is
// not bracketed by F(lo), F(hi). Where F jumps over the target the result is
// the jump point, inf{x : F(x) >= target}.
double invert_monotone_cdf(const Integrand& F, double target, double lo, double hi, double tol);

template <typename Real>
struct CompensatedSum {
  Real value = 0;
  // sum |term| / |value|; infinite when value == 0.
  Real cancellation_index = std::numeric_limits<Real>::infinity();
};

// Kahan-Neumaier summation.
template <typename Real>
CompensatedSum<Real> compensated_sum(std::span<const Real> terms) {
  Real sum = 0;
  Real compensation = 0;
  Real magnitude = 0;
  for (const Real term : terms) {
    const Real t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      compensation += (sum - t) + term;
    } else {
      compensation += (term - t) + sum;
    }
    sum = t;
    magnitude += std::abs(term);
  }
  CompensatedSum<Real> result;
  result.value = sum + compensation;
  result.cancellation_index = result.value == 0 ? std::numeric_limits<Real>::infinity()
                                                : magnitude / std::abs(result.value);
  return result;
}

inline CompensatedSum<double> compensated_sum(std::span<const double> terms) {
  return compensated_sum<double>(terms);
}

// Binomial coefficient C(n, k) as a double. Exact integer arithmetic while
// the result fits in 64 bits, log-gamma beyond.
double binomial(int n, int k);
long double binomial_ld(int n, int k);
double log_binomial(int n, int k);
double log_factorial(int n);

}  // namespace cbdp
