#include "cbdp/densities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cbdp/errors.hpp"
#include "cbdp/numerics.hpp"
#include "detail.hpp"

namespace cbdp {

AgeCondition AgeCondition::origin(double age) {
  if (!std::isfinite(age) || !(age > 0.0)) throw DomainError("origin age must be finite and > 0");
  return AgeCondition(Kind::OriginAge, age);
}

AgeCondition AgeCondition::mrca(double age) {
  if (!std::isfinite(age) || !(age > 0.0)) throw DomainError("mrca age must be finite and > 0");
  return AgeCondition(Kind::MrcaAge, age);
}

double AgeCondition::age() const {
  if (kind_ == Kind::UniformPrior) throw DomainError("no age under the uniform prior");
  return age_;
}

namespace detail {

Rates rates_of(const BDParams& params) {
  switch (params.regime()) {
    case Regime::Yule: return Rates{params.lambda(), 0.0, params.lambda(), false};
    case Regime::Critical: return Rates{params.lambda(), params.lambda(), 0.0, true};
    case Regime::General: break;
  }
  return Rates{params.lambda(), params.mu(), params.net_rate(), false};
}

SpecTerms spec_terms(const Rates& rates, double s, double t) {
  if (s > t) return SpecTerms{0.0, 1.0, 0.0};
  const double lambda = rates.lambda;
  if (rates.critical) {
    const double scale = (1.0 + lambda * t) / t;
    const double denom = 1.0 + lambda * s;
    return SpecTerms{scale / (denom * denom), s / denom * scale, (t - s) / (denom * t)};
  }
  const double r = rates.r;
  const double mu = rates.mu;
  const double em_s = -std::expm1(-r * s);
  const double em_t = -std::expm1(-r * t);
  const double e_s = std::exp(-r * s);
  const double d_s = r + mu * em_s;
  const double d_t = r + mu * em_t;
  const double em_gap = -std::expm1(-r * (t - s));
  return SpecTerms{r * r * e_s / (d_s * d_s) * d_t / em_t, em_s / d_s * d_t / em_t,
                   r * e_s * em_gap / (d_s * em_t)};
}

double xlogy(double x, double y) {
  if (x == 0.0) return 0.0;
  return x * std::log(y);
}

void check_kth_indices(int n, int k) {
  if (n < 2) throw DomainError("need n >= 2 extant species, got " + std::to_string(n));
  if (k < 1 || k > n - 1) {
    throw DomainError("speciation index k must be in 1..n-1, got k=" + std::to_string(k) +
                      " for n=" + std::to_string(n));
  }
}

void check_gap_indices(int n, int k, int l) {
  if (n < 3) throw DomainError("gap densities need n >= 3, got " + std::to_string(n));
  if (k < 1 || l <= k || l > n - 1) {
    throw DomainError("gap indices must satisfy 1 <= k < l <= n-1, got k=" + std::to_string(k) +
                      " l=" + std::to_string(l) + " for n=" + std::to_string(n));
  }
}

}  // namespace detail

namespace {

using detail::rates_of;
using detail::spec_terms;
using detail::xlogy;

double age_of(const AgeCondition& cond) {
  if (!cond.has_age()) {
    throw DomainError("speciation-time density needs an origin or mrca age");
  }
  return cond.age();
}

void check_time(double s) {
  if (std::isnan(s) || s < 0.0) throw DomainError("time must be >= 0");
}

void require_proper_prior(const BDParams& params) {
  if (params.regime() == Regime::Critical) {
    throw RegimeError("origin posterior under the flat prior needs mu < lambda");
  }
}

}  // namespace

double spec_time_pdf(const BDParams& params, double s, const AgeCondition& cond) {
  const double t = age_of(cond);
  check_time(s);
  return spec_terms(rates_of(params), s, t).pdf;
}

double spec_time_cdf(const BDParams& params, double s, const AgeCondition& cond) {
  const double t = age_of(cond);
  check_time(s);
  return spec_terms(rates_of(params), s, t).cdf;
}

double spec_time_inv_cdf(const BDParams& params, double u, const AgeCondition& cond) {
  const double t = age_of(cond);
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("probability must be in [0, 1]");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return t;
  const auto rates = rates_of(params);
  double s = 0.0;
  if (rates.critical) {
    const double y = u * t / (1.0 + rates.lambda * t);
    s = y / (1.0 - rates.lambda * y);
  } else {
    const double r = rates.r;
    const double em_t = -std::expm1(-r * t);
    const double y = u * em_t / (r + rates.mu * em_t);
    const double em_s = y * r / (1.0 - rates.mu * y);
    s = -std::log1p(-em_s) / r;
  }
  return std::clamp(s, 0.0, t);
}

double origin_pdf(const BDParams& params, double t, int n) {
  require_proper_prior(params);
  if (n < 1) throw DomainError("origin density needs n >= 1");
  check_time(t);
  return std::exp(std::log(static_cast<double>(n)) + std::log(params.lambda()) +
                  log_transition_probability(params, n, t));
}

double origin_cdf(const BDParams& params, double t, int n) {
  require_proper_prior(params);
  if (n < 1) throw DomainError("origin distribution needs n >= 1");
  check_time(t);
  if (t == 0.0) return 0.0;
  if (std::isinf(t)) return 1.0;
  const auto rates = rates_of(params);
  const double em = -std::expm1(-rates.r * t);
  const double base = rates.lambda * em / (rates.r + rates.mu * em);
  return std::exp(n * std::log(base));
}

double origin_inv_cdf(const BDParams& params, double u, int n) {
  require_proper_prior(params);
  if (n < 1) throw DomainError("origin distribution needs n >= 1");
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("probability must be in [0, 1)");
  if (u == 0.0) return 0.0;
  const auto rates = rates_of(params);
  const double one_minus_w = -std::expm1(std::log(u) / n);
  // e^{-rt} = lambda (1 - w) / (lambda - mu w)
  const double log_e = std::log(rates.lambda) + std::log(one_minus_w) -
                       std::log(rates.r + rates.mu * one_minus_w);
  return std::max(0.0, -log_e / rates.r);
}

double kth_pdf_given_age(const BDParams& params, int n, int k, double s, double t) {
  detail::check_kth_indices(n, k);
  check_time(s);
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("age must be finite and > 0");
  const auto terms = spec_terms(rates_of(params), s, t);
  if (terms.pdf == 0.0) return 0.0;
  const double log_coef = log_factorial(n - 1) - log_factorial(k - 1) - log_factorial(n - k - 1);
  return std::exp(log_coef + xlogy(n - k - 1, terms.cdf) + xlogy(k - 1, terms.ccdf)) * terms.pdf;
}

double kth_cdf_given_age(const BDParams& params, int n, int k, double s, double t) {
  detail::check_kth_indices(n, k);
  check_time(s);
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("age must be finite and > 0");
  if (s >= t) return 1.0;
  const auto terms = spec_terms(rates_of(params), s, t);
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    sum += std::exp(log_binomial(n - 1, i) + xlogy(n - 1 - i, terms.cdf) + xlogy(i, terms.ccdf));
  }
  return std::min(1.0, sum);
}

double kth_pdf_uniform_prior(const BDParams& params, int n, int k, double s) {
  detail::check_kth_indices(n, k);
  check_time(s);
  const auto rates = rates_of(params);
  const double log_coef = std::log(k + 1.0) + log_binomial(n, k + 1) + (n - k) * std::log(rates.lambda);
  if (rates.critical) {
    return std::exp(log_coef + xlogy(n - k - 1, s) - (n + 1) * std::log1p(rates.lambda * s));
  }
  const double r = rates.r;
  const double em = -std::expm1(-r * s);
  const double denom = r + rates.mu * em;
  return std::exp(log_coef + (k + 2) * std::log(r) - (k + 1) * r * s + xlogy(n - k - 1, em) -
                  (n + 1) * std::log(denom));
}

double kth_cdf_uniform_prior(const BDParams& params, int n, int k, double s) {
  detail::check_kth_indices(n, k);
  check_time(s);
  if (std::isinf(s)) return 1.0;
  const auto rates = rates_of(params);
  double z = 0.0;
  double one_minus_z = 0.0;
  if (rates.critical) {
    const double x = rates.lambda * s;
    z = 1.0 / (1.0 + x);
    one_minus_z = x / (1.0 + x);
  } else {
    const double em = -std::expm1(-rates.r * s);
    const double denom = rates.r + rates.mu * em;
    z = rates.r * std::exp(-rates.r * s) / denom;
    one_minus_z = rates.lambda * em / denom;
  }
  double sum = 0.0;
  for (int j = 0; j <= k; ++j) {
    sum += std::exp(log_binomial(n, j) + xlogy(j, z) + xlogy(n - j, one_minus_z));
  }
  return std::min(1.0, sum);
}

namespace {

void check_ordered(std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !std::isfinite(x[i])) {
      throw DomainError("speciation times must be finite and positive");
    }
    if (i > 0 && !(x[i] < x[i - 1])) {
      throw DomainError("speciation times must be strictly decreasing");
    }
  }
}

// log of lambda-free factor r^2 e^{-rx} / (lambda - mu e^{-rx})^2, or its
// critical limit 1 / (1 + lambda x)^2.
double log_point_factor(const detail::Rates& rates, double x) {
  if (rates.critical) return -2.0 * std::log1p(rates.lambda * x);
  const double denom = rates.r + rates.mu * -std::expm1(-rates.r * x);
  return 2.0 * std::log(rates.r) - rates.r * x - 2.0 * std::log(denom);
}

}  // namespace

double joint_log_density_ordered(const BDParams& params, std::span<const double> x, int n) {
  if (n < 2) throw DomainError("joint density needs n >= 2");
  if (x.size() != static_cast<std::size_t>(n - 1)) {
    throw DomainError("joint density needs n-1 speciation times");
  }
  check_ordered(x);
  const auto rates = rates_of(params);
  double result = log_factorial(n) + (n - 1) * std::log(rates.lambda);
  if (rates.critical) {
    result -= std::log1p(rates.lambda * x[0]);
  } else {
    const double denom = rates.r + rates.mu * -std::expm1(-rates.r * x[0]);
    result += std::log(rates.r) - rates.r * x[0] - std::log(denom);
  }
  for (const double xi : x) result += log_point_factor(rates, xi);
  return result;
}

double joint_log_density_unordered(const BDParams& params, std::span<const double> s, int n) {
  std::vector<double> sorted(s.begin(), s.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return joint_log_density_ordered(params, sorted, n) - log_factorial(n - 1);
}

double joint_log_density_with_origin(const BDParams& params, std::span<const double> x, int n) {
  if (n < 1) throw DomainError("joint density needs n >= 1");
  if (x.size() != static_cast<std::size_t>(n)) {
    throw DomainError("joint density with origin needs n times (origin first)");
  }
  check_ordered(x);
  const auto rates = rates_of(params);
  double result = log_factorial(n) + n * std::log(rates.lambda);
  for (const double xi : x) result += log_point_factor(rates, xi);
  return result;
}

double gap_pdf_given_age(const BDParams& params, int n, int k, int l, double s, double t,
                         double tol) {
  detail::check_gap_indices(n, k, l);
  check_time(s);
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("age must be finite and > 0");
  if (s >= t) return 0.0;
  const auto rates = rates_of(params);
  const double log_coef = std::log(n - 1.0) + std::log(n - 2.0) + log_binomial(n - 3, k - 1) +
                          log_binomial(n - k - 2, l - k - 1);
  // tau is the time of the k-th event, tau - s the time of the l-th.
  const Integrand integrand = [&](double tau) {
    const auto upper = spec_terms(rates, tau, t);
    const auto lower = spec_terms(rates, tau - s, t);
    if (upper.pdf == 0.0 || lower.pdf == 0.0) return 0.0;
    const double between = std::max(0.0, upper.cdf - lower.cdf);
    const double log_rest =
        xlogy(k - 1, upper.ccdf) + xlogy(l - k - 1, between) + xlogy(n - l - 1, lower.cdf);
    return std::exp(log_coef + log_rest) * upper.pdf * lower.pdf;
  };
  return integrate(integrand, s, t, tol).value;
}

double gap_pdf_yule_given_age(const BDParams& params, int n, int k, int l, double s, double t) {
  if (params.regime() != Regime::Yule) {
    throw RegimeError("closed-form gap density is only available for the pure-birth process");
  }
  detail::check_gap_indices(n, k, l);
  check_time(s);
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("age must be finite and > 0");
  if (s >= t) return 0.0;
  const long double lambda = params.lambda();
  const long double ls = lambda * s;
  const long double lt = lambda * t;
  // Everything below is divided through by e^{lambda (n-1) t} so that all
  // exponentials are <= 1.
  const long double prefactor =
      std::pow(-std::expm1(-ls), static_cast<long double>(l - k - 1)) /
      std::pow(-std::expm1(-lt), static_cast<long double>(n - 1));
  const long double base = k * (k + 1.0L) * binomial_ld(l, k + 1) * binomial_ld(n - 1, l);
  std::vector<long double> terms;
  for (int i = 0; i <= k - 1; ++i) {
    for (int j = 0; j <= n - l - 1; ++j) {
      const int sign_exp = n + k - l - i - j;
      const long double coef = base * binomial_ld(k - 1, i) * binomial_ld(n - l - 1, j) *
                               (sign_exp % 2 == 0 ? 1.0L : -1.0L) / (n - k + i - j);
      const long double first = std::exp((i + 1 - k) * lt - (i + 1) * ls);
      const long double second = std::exp((n - k - 1 - j) * ls - (n - 1 - j) * lt);
      terms.push_back(coef * (first - second));
    }
  }
  const auto sum = compensated_sum<long double>(terms);
  return static_cast<double>(lambda * prefactor * sum.value);
}

double gap_pdf_yule_uniform_prior(const BDParams& params, int n, int k, int l, double s) {
  if (params.regime() != Regime::Yule) {
    throw RegimeError("closed-form gap density is only available for the pure-birth process");
  }
  detail::check_gap_indices(n, k, l);
  check_time(s);
  const double lambda = params.lambda();
  return std::exp(std::log(lambda) + std::log(k + 1.0) + log_binomial(l, k + 1) -
                  (k + 1) * lambda * s + xlogy(l - k - 1, -std::expm1(-lambda * s)));
}

}  // namespace cbdp
