#include "cbdp/moments.hpp"

#include <cmath>
#include <limits>
#include <type_traits>
#include <vector>

#include <boost/math/special_functions/expm1.hpp>
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/special_functions/log1p.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/float128.hpp>

#include "cbdp/errors.hpp"
#include "cbdp/numerics.hpp"
#include "detail.hpp"

namespace cbdp {

std::string_view to_string(MomentMethod method) {
  return method == MomentMethod::ClosedForm ? "closed_form" : "quadrature";
}

namespace {

using HighPrecision = boost::multiprecision::cpp_bin_float_50;
// Enough for any index below the threshold and much faster than 50 digits.
using QuadPrecision = boost::multiprecision::float128;

constexpr double kMomentTol = 1e-11;

template <typename Real>
Real sign(int exponent) {
  return exponent % 2 == 0 ? Real(1) : Real(-1);
}

template <typename Real>
Real ipow(Real x, int e) {
  if (e < 0) return Real(1) / ipow(x, -e);
  Real result = 1;
  while (e > 0) {
    if (e & 1) result *= x;
    x *= x;
    e >>= 1;
  }
  return result;
}

template <typename Real>
Real choose(int n, int k) {
  if constexpr (std::is_same_v<Real, long double>) {
    return binomial_ld(n, k);
  } else {
    if (k < 0 || k > n) return Real(0);
    Real c = 1;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
  }
}

// Collects the terms of a closed-form sum. With a finite budget it gives up
// as soon as sum |term| exceeds it: the cancellation index is then already
// beyond the threshold, whatever the remaining terms are.
template <typename Real>
class TermSink {
 public:
  explicit TermSink(Real budget = Real(-1)) : budget_(budget) {}

  bool add(const Real& term) {
    using boost::multiprecision::abs;
    using std::abs;
    if (!boost::math::isfinite(term)) {
      exhausted_ = true;
      return false;
    }
    abs_sum_ += abs(term);
    terms_.push_back(term);
    if (budget_ >= 0 && abs_sum_ > budget_) exhausted_ = true;
    return !exhausted_;
  }
  bool exhausted() const { return exhausted_; }
  const std::vector<Real>& terms() const { return terms_; }

 private:
  Real budget_;
  Real abs_sum_ = 0;
  bool exhausted_ = false;
  std::vector<Real> terms_;
};

// Pure birth: double sum over the expanded order-statistic density.
template <typename Real>
void given_age_terms_yule(TermSink<Real>& sink, double lambda_d, int n, int k, double t) {
  using std::exp;
  const Real lambda = lambda_d;
  const Real lt = lambda * Real(t);
  const Real scale = ipow(Real(-boost::math::expm1(Real(-lt))), 1 - n);
  const Real base = Real(k) * choose<Real>(n - 1, k);
  for (int i = 0; i <= n - k - 1; ++i) {
    for (int j = 0; j <= k - 1; ++j) {
      const int a = k + i - j;
      const Real y = Real(a) * lt;
      // e^{-j lt} - (a lt + 1) e^{-(k+i) lt} = e^{-j lt} (1 - (1 + y) e^{-y})
      const Real bracket = exp(Real(-j) * lt) * (-boost::math::expm1(Real(-y)) - y * exp(Real(-y)));
      if (!sink.add(base * choose<Real>(n - k - 1, i) * choose<Real>(k - 1, j) * sign<Real>(i + j) /
                    (lambda * a * a) * scale * bracket)) {
        return;
      }
    }
  }
}

// mu = lambda: E = t - sum_{i,j} ... from the integral of F(s|t)^{n-j-1}.
template <typename Real>
void given_age_terms_critical(TermSink<Real>& sink, double lambda_d, int n, int k, double t) {
  const Real lambda = lambda_d;
  const Real tt = t;
  const Real lt = lambda * tt;
  const Real log1p_lt = boost::math::log1p(lt);
  if (!sink.add(tt)) return;
  for (int i = 0; i <= k - 1; ++i) {
    for (int j = 0; j <= i; ++j) {
      const int p = n - j - 1;
      const Real coef = choose<Real>(n - 1, i) * choose<Real>(i, j) * sign<Real>(i + j) /
                        ipow(lambda, n - j) * ipow(Real((1 + lt) / tt), p);
      if (!sink.add(-coef * lt) || !sink.add(coef * p * log1p_lt)) return;
      for (int l = 2; l <= p; ++l) {
        // ((1 + lt)^{1-l} - 1) / (1 - l)
        const Real part = boost::math::expm1(Real((1 - l) * log1p_lt)) / (1 - l);
        if (!sink.add(-coef * choose<Real>(p, l) * sign<Real>(l) * part)) return;
      }
    }
  }
}

// 0 < mu < lambda: the g(j) / h(j, m) expansion.
template <typename Real>
void given_age_terms_general(TermSink<Real>& sink, double lambda_d, double mu_d, int n, int k, double t) {
  const Real lambda = lambda_d;
  const Real mu = mu_d;
  const Real r = lambda - mu;
  const Real rt = r * Real(t);
  const Real em_t = -boost::math::expm1(Real(-rt));
  const Real d_t = r + mu * em_t;                            // lambda - mu e^{-rt}
  const Real log_ratio = boost::math::log1p(Real(mu * em_t / r));  // ln(d_t / r)
  const Real p_base = d_t / em_t;

  if (!sink.add(Real(t))) return;
  for (int i = 0; i <= k - 1; ++i) {
    for (int j = 0; j <= i; ++j) {
      const int p = n - j - 1;
      const Real coef = choose<Real>(n - 1, i) * choose<Real>(i, j) * sign<Real>(i + j) * ipow(p_base, p);

      // g(j): ln((lambda e^{rt} - mu) / r) = rt + ln(d_t / r).
      const Real g_scale = Real(1) / (r * ipow(lambda, p));
      if (!sink.add(-coef * g_scale * (rt + log_ratio))) return;
      for (int m = 1; m <= p - 1; ++m) {
        // (lambda e^{rt} - mu)^{-m} - r^{-m} = r^{-m} expm1(-m (rt + ln(d_t / r)))
        const Real diff = ipow(r, -m) * boost::math::expm1(Real(-m * (rt + log_ratio)));
        if (!sink.add(coef * g_scale * choose<Real>(p - 1, m) * ipow(mu, m) / m * diff)) return;
      }

      for (int l = 1; l <= p; ++l) {
        const Real l_scale = choose<Real>(p, l) / (r * ipow(mu, l));
        for (int m = 0; m <= l - 1; ++m) {
          const int power = m + j + 2 - n;
          // (d_t^power - r^power) / power, or ln(d_t / r) when power = 0
          const Real h = power == 0 ? log_ratio
                                    : ipow(r, power) * boost::math::expm1(Real(power * log_ratio)) / power;
          if (!sink.add(-coef * l_scale * choose<Real>(l - 1, m) * sign<Real>(l + m) * ipow(lambda, l - 1 - m) *
                        h)) {
            return;
          }
        }
      }
    }
  }
}

// rho-form of the uniform-prior expectation for 0 < mu < lambda.
template <typename Real>
void uniform_prior_terms_general(TermSink<Real>& sink, double lambda_d, double mu_d, int n, int k) {
  using std::log;
  const Real lambda = lambda_d;
  const Real mu = mu_d;
  const Real r = lambda - mu;
  const Real rho = mu / lambda;
  const Real q = r / mu;                  // 1/rho - 1
  const Real log_x = log(Real(lambda / r));  // log(1 / (1 - rho))
  const Real outer = Real(k + 1) / lambda * choose<Real>(n, k + 1) * sign<Real>(k);
  for (int i = 0; i <= n - k - 1; ++i) {
    const int m = k + i;
    const Real coef = outer * choose<Real>(n - k - 1, i) / (Real(m + 1) * rho) * ipow(q, m);
    if (!sink.add(coef * log_x)) return;
    for (int j = 1; j <= m; ++j) {
      // 1 - x^j
      const Real one_minus = -boost::math::expm1(Real(j * log_x));
      if (!sink.add(-coef * choose<Real>(m, j) * sign<Real>(j) / j * one_minus)) return;
    }
  }
}

template <typename Real>
void given_age_terms(TermSink<Real>& sink, const BDParams& params, int n, int k, double t) {
  switch (params.regime()) {
    case Regime::Yule: given_age_terms_yule(sink, params.lambda(), n, k, t); break;
    case Regime::Critical: given_age_terms_critical(sink, params.lambda(), n, k, t); break;
    case Regime::General: given_age_terms_general(sink, params.lambda(), params.mu(), n, k, t); break;
  }
}

// Above this index a trusted long-double sum is recomputed in quad
// precision; at 1e12 long double keeps only about seven digits.
constexpr double kPromotionIndex = 1e4;

template <typename Real>
ClosedFormSum high_precision_sum(const TermSink<Real>& sink);

// Value of a closed-form sum, or NaN when it cannot be trusted. `rebuild`
// fills a quad-precision sink with the same terms.
template <typename Rebuild>
double trusted_value(const TermSink<long double>& sink, const Rebuild& rebuild) {
  if (sink.exhausted()) return std::numeric_limits<double>::quiet_NaN();
  const auto sum = compensated_sum<long double>(sink.terms());
  if (!std::isfinite(sum.value) || sum.cancellation_index > kCancellationThreshold) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (sum.cancellation_index > kPromotionIndex) {
    TermSink<QuadPrecision> precise;
    rebuild(precise);
    return high_precision_sum(precise).value;
  }
  return static_cast<double>(sum.value);
}

template <typename Real>
ClosedFormSum high_precision_sum(const TermSink<Real>& sink) {
  Real total = 0;
  Real abs_total = 0;
  for (const auto& term : sink.terms()) {
    total += term;
    abs_total += abs(term);
  }
  ClosedFormSum result;
  result.value = static_cast<double>(total);
  result.cancellation_index =
      total == 0 ? std::numeric_limits<double>::infinity() : static_cast<double>(abs_total / abs(total));
  result.terms = sink.terms().size();
  return result;
}

// Zero outside [0, t]; under MrcaAge the oldest event is a point mass at t.
double kth_pdf_given_mrca(const BDParams& params, int n, int k, double s, double t) {
  return kth_pdf_given_age(params, n - 1, k - 1, s, t);
}

double quadrature_moment_given_age(const BDParams& params, int n, int k, int m, double t) {
  const Integrand f = [&](double s) {
    return std::pow(s, m) * kth_pdf_given_age(params, n, k, s, t);
  };
  return integrate(f, 0.0, t, kMomentTol).value;
}

double quadrature_moment_given_mrca(const BDParams& params, int n, int k, int m, double t) {
  if (k == 1) return std::pow(t, m);
  const Integrand f = [&](double s) {
    return std::pow(s, m) * kth_pdf_given_mrca(params, n, k, s, t);
  };
  return integrate(f, 0.0, t, kMomentTol).value;
}

double quadrature_moment_uniform_prior(const BDParams& params, int n, int k, int m) {
  const Integrand f = [&](double s) {
    return std::pow(s, m) * kth_pdf_uniform_prior(params, n, k, s);
  };
  if (params.regime() == Regime::Critical) {
    return integrate_to_infinity_algebraic(f, 0.0, kMomentTol, 1.0 / params.lambda()).value;
  }
  const double decay = params.regime() == Regime::Yule ? params.lambda() : params.net_rate();
  return integrate_to_infinity(f, 0.0, kMomentTol, decay).value;
}

MomentResult fallback(double value) {
  return MomentResult{value, MomentMethod::Quadrature, true};
}

}  // namespace

MomentResult expected_kth_given_age(const BDParams& params, int n, int k, double t) {
  detail::check_kth_indices(n, k);
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("age must be finite and > 0");
  TermSink<long double> sink(static_cast<long double>(kCancellationThreshold) * t);
  given_age_terms(sink, params, n, k, t);
  const double value =
      trusted_value(sink, [&](auto& precise) { given_age_terms(precise, params, n, k, t); });
  if (std::isnan(value) || !(value > 0.0) || !(value < t)) {
    return fallback(quadrature_moment_given_age(params, n, k, 1, t));
  }
  return MomentResult{value, MomentMethod::ClosedForm, false};
}

MomentResult expected_kth_uniform_prior(const BDParams& params, int n, int k) {
  detail::check_kth_indices(n, k);
  const double lambda = params.lambda();
  switch (params.regime()) {
    case Regime::Yule: {
      std::vector<double> terms;
      for (int i = k + 1; i <= n; ++i) terms.push_back(1.0 / (lambda * i));
      return MomentResult{compensated_sum(std::span<const double>(terms)).value,
                          MomentMethod::ClosedForm, false};
    }
    case Regime::Critical:
      return MomentResult{(n - k) / (lambda * k), MomentMethod::ClosedForm, false};
    case Regime::General: break;
  }
  TermSink<long double> sink;
  uniform_prior_terms_general(sink, lambda, params.mu(), n, k);
  const double value = trusted_value(sink, [&](auto& precise) {
    uniform_prior_terms_general(precise, lambda, params.mu(), n, k);
  });
  if (std::isnan(value) || !(value > 0.0)) {
    return fallback(quadrature_moment_uniform_prior(params, n, k, 1));
  }
  return MomentResult{value, MomentMethod::ClosedForm, false};
}

ClosedFormSum closed_form_sum_given_age(const BDParams& params, int n, int k, double t) {
  detail::check_kth_indices(n, k);
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("age must be finite and > 0");
  TermSink<HighPrecision> sink;
  given_age_terms(sink, params, n, k, t);
  return high_precision_sum(sink);
}

ClosedFormSum closed_form_sum_uniform_prior(const BDParams& params, int n, int k) {
  detail::check_kth_indices(n, k);
  if (params.regime() != Regime::General) {
    throw RegimeError("the rho-form sum needs 0 < mu < lambda");
  }
  TermSink<HighPrecision> sink;
  uniform_prior_terms_general(sink, params.lambda(), params.mu(), n, k);
  return high_precision_sum(sink);
}

MomentResult expected_kth(const BDParams& params, int n, int k, const AgeCondition& cond) {
  switch (cond.kind()) {
    case AgeCondition::Kind::OriginAge: return expected_kth_given_age(params, n, k, cond.age());
    case AgeCondition::Kind::MrcaAge:
      detail::check_kth_indices(n, k);
      if (k == 1) return MomentResult{cond.age(), MomentMethod::ClosedForm, false};
      return expected_kth_given_age(params, n - 1, k - 1, cond.age());
    case AgeCondition::Kind::UniformPrior: return expected_kth_uniform_prior(params, n, k);
  }
  throw DomainError("unknown age condition");
}

double closed_form_special_moment(SpecialModel model, int n, int k, int m) {
  detail::check_kth_indices(n, k);
  if (m < 1) throw DomainError("moment order must be >= 1");
  if (model == SpecialModel::Yule) {
    double first = 0.0;
    double squares = 0.0;
    for (int i = k + 1; i <= n; ++i) {
      first += 1.0 / i;
      squares += 1.0 / (static_cast<double>(i) * i);
    }
    if (m == 1) return first;
    if (m == 2) return squares + first * first;
    throw DomainError("closed-form Yule moments exist for orders 1 and 2 only");
  }
  if (k < m) return std::numeric_limits<double>::infinity();
  return binomial(n - k + m - 1, m) / binomial(k, m);
}

MomentResult numeric_moment(const BDParams& params, int n, int k, int m, const AgeCondition& cond) {
  detail::check_kth_indices(n, k);
  if (m < 1) throw DomainError("moment order must be >= 1");
  switch (cond.kind()) {
    case AgeCondition::Kind::OriginAge:
      return MomentResult{quadrature_moment_given_age(params, n, k, m, cond.age()),
                          MomentMethod::Quadrature, false};
    case AgeCondition::Kind::MrcaAge:
      return MomentResult{quadrature_moment_given_mrca(params, n, k, m, cond.age()),
                          MomentMethod::Quadrature, false};
    case AgeCondition::Kind::UniformPrior: break;
  }
  if (params.regime() == Regime::Critical && k < m) {
    // Density tail ~ s^{-(k+2)}: moments of order m > k diverge.
    return MomentResult{std::numeric_limits<double>::infinity(), MomentMethod::ClosedForm, false};
  }
  return MomentResult{quadrature_moment_uniform_prior(params, n, k, m), MomentMethod::Quadrature,
                      false};
}

double expected_gap(const BDParams& params, int n, int k, int l, const AgeCondition& cond) {
  detail::check_gap_indices(n, k, l);
  return expected_kth(params, n, k, cond).value - expected_kth(params, n, l, cond).value;
}

}  // namespace cbdp
