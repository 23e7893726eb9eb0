#include "cbdp/numerics.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "cbdp/errors.hpp"

namespace cbdp {

namespace {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208737611184, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for the odd-indexed Kronrod nodes.
constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  int depth;

  bool operator<(const Segment& other) const { return error < other.error; }
};

double checked(const Integrand& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y)) {
    throw QuadratureError("integrand is not finite at x=" + std::to_string(x), y,
                          std::numeric_limits<double>::infinity());
  }
  return y;
}

Segment gauss_kronrod(const Integrand& f, double a, double b, int depth) {
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kUnderflow = std::numeric_limits<double>::min();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<double, 21> fx{};
  fx[10] = checked(f, center);
  for (int i = 0; i < 10; ++i) {
    const double dx = half * kKronrodNodes[i];
    fx[i] = checked(f, center - dx);
    fx[20 - i] = checked(f, center + dx);
  }

  double kronrod = kKronrodWeights[10] * fx[10];
  double gauss = 0.0;
  double abs_sum = std::abs(kronrod);
  for (int i = 0; i < 10; ++i) {
    const double pair = fx[i] + fx[20 - i];
    kronrod += kKronrodWeights[i] * pair;
    abs_sum += kKronrodWeights[i] * (std::abs(fx[i]) + std::abs(fx[20 - i]));
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[10] * std::abs(fx[10] - mean);
  for (int i = 0; i < 10; ++i) {
    asc += kKronrodWeights[i] * (std::abs(fx[i] - mean) + std::abs(fx[20 - i] - mean));
  }

  const double habs = std::abs(half);
  asc *= habs;
  abs_sum *= habs;
  double error = std::abs((kronrod - gauss) * half);
  if (asc != 0.0 && error != 0.0) {
    error = asc * std::min(1.0, std::pow(200.0 * error / asc, 1.5));
  }
  if (abs_sum > kUnderflow / (50.0 * kEps)) {
    error = std::max(50.0 * kEps * abs_sum, error);
  }
  return Segment{a, b, kronrod * half, error, depth};
}

}  // namespace

QuadResult integrate(const Integrand& f, double a, double b, double tol) {
  if (!(tol > 0.0)) throw DomainError("quadrature tolerance must be positive");
  if (!std::isfinite(a) || !std::isfinite(b) || a > b) {
    throw DomainError("quadrature needs finite a <= b");
  }
  QuadResult result;
  if (a == b) return result;

  // Max-heap on the error estimate, kept in a vector so it can be re-summed.
  std::vector<Segment> heap{gauss_kronrod(f, a, b, 0)};
  result.evaluations = 21;
  double value = heap.front().value;
  double error = heap.front().error;

  while (error > std::max(tol, tol * std::abs(value))) {
    std::pop_heap(heap.begin(), heap.end());
    const Segment worst = heap.back();
    if (worst.depth >= kMaxDepth || heap.size() >= kMaxSegments) {
      throw QuadratureError("quadrature did not converge within the subdivision limit", value, error);
    }
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = gauss_kronrod(f, worst.a, mid, worst.depth + 1);
    const Segment right = gauss_kronrod(f, mid, worst.b, worst.depth + 1);
    result.evaluations += 42;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());

    // Re-sum from scratch now and then to avoid drift in the running totals.
    if (heap.size() % 256 == 0) {
      value = 0.0;
      error = 0.0;
      for (const auto& segment : heap) {
        value += segment.value;
        error += segment.error;
      }
    } else {
      value += left.value + right.value - worst.value;
      error += left.error + right.error - worst.error;
    }
  }

  // Final total by compensated summation over all segments.
  std::vector<double> values;
  values.reserve(heap.size());
  double total_error = 0.0;
  for (const auto& segment : heap) {
    values.push_back(segment.value);
    total_error += segment.error;
  }
  result.value = compensated_sum(std::span<const double>(values)).value;
  result.error_estimate = total_error;
  return result;
}

QuadResult integrate_to_infinity(const Integrand& f, double a, double tol, double decay_rate) {
  if (!(decay_rate > 0.0)) throw DomainError("decay rate must be positive");
  const Integrand mapped = [&](double u) {
    const double t = a - std::log(u) / decay_rate;
    const double y = f(t);
    if (y == 0.0) return 0.0;
    return y / (decay_rate * u);
  };
  return integrate(mapped, 0.0, 1.0, tol);
}

QuadResult integrate_to_infinity_algebraic(const Integrand& f, double a, double tol, double scale) {
  if (!(scale > 0.0)) throw DomainError("scale must be positive");
  const Integrand mapped = [&](double u) {
    const double one_minus = 1.0 - u;
    const double t = a + scale * u / one_minus;
    const double y = f(t);
    if (y == 0.0) return 0.0;
    return y * scale / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, tol);
}

double invert_monotone_cdf(const Integrand& F, double target, double lo, double hi, double tol) {
  if (!(lo <= hi)) throw DomainError("inversion bracket must satisfy lo <= hi");
  if (!(tol > 0.0)) throw DomainError("inversion tolerance must be positive");
  double a = lo;
  double b = hi;
  double fa = F(a) - target;
  double fb = F(b) - target;
  if (std::abs(fa) <= tol) return a;
  if (std::abs(fb) <= tol) return b;
  if (fa > 0.0 || fb < 0.0 || std::isnan(fa) || std::isnan(fb)) {
    throw DomainError("target probability is not bracketed by [lo, hi]");
  }

  double best = std::abs(fa) < std::abs(fb) ? a : b;
  double best_residual = std::min(std::abs(fa), std::abs(fb));
  double previous_width = b - a;
  for (int iter = 0; iter < 400; ++iter) {
    const double width = b - a;
    double x = a - fa * width / (fb - fa);
    // Fall back to bisection when the secant point leaves the bracket or the
    // bracket stopped shrinking fast enough.
    if (!(x > a && x < b) || width > 0.5 * previous_width) x = 0.5 * (a + b);
    previous_width = width;

    const double fx = F(x) - target;
    if (std::abs(fx) < best_residual) {
      best = x;
      best_residual = std::abs(fx);
    }
    if (std::abs(fx) <= tol) return x;
    if (fx < 0.0) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b))) {
      // F jumps across the target here: the generalized inverse is b.
      return b;
    }
  }
  return best;
}

namespace {

__extension__ using UInt128 = unsigned __int128;

// Exact C(n, k) when it fits in 64 bits; returns false otherwise.
bool exact_binomial(int n, int k, std::uint64_t& out) {
  k = std::min(k, n - k);
  UInt128 c = 1;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (c > std::numeric_limits<std::uint64_t>::max()) return false;
  }
  out = static_cast<std::uint64_t>(c);
  return true;
}

}  // namespace

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  std::uint64_t exact = 0;
  if (n <= 62 && exact_binomial(n, k, exact)) return static_cast<double>(exact);
  return std::exp(log_binomial(n, k));
}

long double binomial_ld(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0L;
  std::uint64_t exact = 0;
  if (n <= 62 && exact_binomial(n, k, exact)) return static_cast<long double>(exact);
  return std::exp(std::lgamma(static_cast<long double>(n) + 1) -
                  std::lgamma(static_cast<long double>(k) + 1) -
                  std::lgamma(static_cast<long double>(n - k) + 1));
}

double log_binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double log_factorial(int n) {
  if (n < 0) throw DomainError("factorial of a negative number");
  return std::lgamma(static_cast<double>(n) + 1.0);
}

}  // namespace cbdp
