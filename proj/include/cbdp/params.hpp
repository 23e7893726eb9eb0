#pragma once

#include <string_view>

namespace cbdp {

enum class Regime { Yule, Critical, General };

std::string_view to_string(Regime regime);

// Rates below these thresholds (relative to lambda) switch to the closed-form
// limit branches.
inline constexpr double kYuleEps = 1e-12;
inline constexpr double kCriticalEps = 1e-8;

// Constant birth rate lambda > 0 and death rate 0 <= mu <= lambda.
class BDParams {
 public:
  BDParams(double lambda, double mu);

  // Same validation, but the regime is fixed by the caller. Used to evaluate
  // the general-rate formulas inside the Yule/critical thresholds.
  static BDParams with_regime(double lambda, double mu, Regime regime);

  double lambda() const noexcept { return lambda_; }
  double mu() const noexcept { return mu_; }
  double rho() const noexcept { return mu_ / lambda_; }
  // Net diversification rate lambda - mu.
  double net_rate() const noexcept { return lambda_ - mu_; }
  Regime regime() const noexcept { return regime_; }

 private:
  BDParams(double lambda, double mu, Regime regime, bool);

  double lambda_;
  double mu_;
  Regime regime_;
};

// p_n(t): probability that one lineage has exactly n descendants after time t.
double transition_probability(const BDParams& params, int n, double t);
double log_transition_probability(const BDParams& params, int n, double t);

// Integral of p_n(t) over t in (0, inf), which is 1/(n lambda) (critical case included).
double integral_pn_over_origin(const BDParams& params, int n);

}  // namespace cbdp
