#include "cbdp/params.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cbdp/errors.hpp"

namespace cbdp {

namespace {

void validate_rates(double lambda, double mu) {
  if (!std::isfinite(lambda) || !std::isfinite(mu)) {
    throw ParameterError("rates must be finite");
  }
  if (!(lambda > 0.0)) {
    throw ParameterError("birth rate must be positive, got " + std::to_string(lambda));
  }
  if (mu < 0.0 || mu > lambda) {
    throw ParameterError("death rate must satisfy 0 <= mu <= lambda, got mu=" +
                         std::to_string(mu) + " lambda=" + std::to_string(lambda));
  }
}

Regime classify(double lambda, double mu) {
  if (mu < kYuleEps * lambda) return Regime::Yule;
  if (lambda - mu < kCriticalEps * lambda) return Regime::Critical;
  return Regime::General;
}

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Yule: return "yule";
    case Regime::Critical: return "critical";
    case Regime::General: return "general";
  }
  return "unknown";
}

BDParams::BDParams(double lambda, double mu) : lambda_(lambda), mu_(mu), regime_(Regime::General) {
  validate_rates(lambda, mu);
  regime_ = classify(lambda, mu);
}

BDParams::BDParams(double lambda, double mu, Regime regime, bool)
    : lambda_(lambda), mu_(mu), regime_(regime) {}

BDParams BDParams::with_regime(double lambda, double mu, Regime regime) {
  validate_rates(lambda, mu);
  if (regime == Regime::General && mu == lambda) {
    throw ParameterError("general-rate formulas need mu < lambda");
  }
  return BDParams(lambda, mu, regime, true);
}

double log_transition_probability(const BDParams& params, int n, double t) {
  if (n < 0) throw DomainError("descendant count must be >= 0");
  if (!std::isfinite(t) || t < 0.0) throw DomainError("time must be finite and >= 0");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (t == 0.0) return n == 1 ? 0.0 : kNegInf;

  const double lambda = params.lambda();
  const double mu = params.mu();
  switch (params.regime()) {
    case Regime::Yule: {
      if (n == 0) return kNegInf;
      return -lambda * t + (n - 1) * std::log(-std::expm1(-lambda * t));
    }
    case Regime::Critical: {
      const double x = lambda * t;
      if (n == 0) return std::log(x) - std::log1p(x);
      return (n - 1) * std::log(x) - (n + 1) * std::log1p(x);
    }
    case Regime::General: break;
  }
  const double r = params.net_rate();
  const double em = -std::expm1(-r * t);  // 1 - e^{-rt}
  const double denom = r + mu * em;       // lambda - mu e^{-rt}
  if (n == 0) {
    if (mu == 0.0) return kNegInf;
    return std::log(mu) + std::log(em) - std::log(denom);
  }
  double result = 2.0 * std::log(r) - r * t - (n + 1) * std::log(denom);
  if (n > 1) result += (n - 1) * (std::log(lambda) + std::log(em));
  return result;
}

double transition_probability(const BDParams& params, int n, double t) {
  return std::exp(log_transition_probability(params, n, t));
}

double integral_pn_over_origin(const BDParams& params, int n) {
  if (n < 1) throw DomainError("integral_pn_over_origin needs n >= 1");
  return 1.0 / (n * params.lambda());
}

}  // namespace cbdp
