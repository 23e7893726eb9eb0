#include "cbdp/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include "cbdp/batch.hpp"
#include "cbdp/densities.hpp"
#include "cbdp/errors.hpp"
#include "cbdp/format.hpp"
#include "cbdp/forward_sim.hpp"
#include "cbdp/moments.hpp"
#include "cbdp/numerics.hpp"
#include "cbdp/params.hpp"
#include "cbdp/pointproc.hpp"
#include "cbdp/stats.hpp"

namespace cbdp {

namespace {

constexpr double kLambda = 1.0;
const double kRhos[] = {0.0, 0.5, 1.0};

CheckResult tolerance_check(std::string name, double worst, double tol, std::string detail) {
  return CheckResult{std::move(name), worst <= tol, worst, tol, std::move(detail)};
}

double mass_error(const Integrand& pdf, double a, double b) {
  return std::abs(integrate(pdf, a, b, 1e-11).value - 1.0);
}

double mass_error_tail(const Integrand& pdf, const BDParams& params) {
  if (params.regime() == Regime::Critical) {
    return std::abs(integrate_to_infinity_algebraic(pdf, 0.0, 1e-11, 1.0 / params.lambda()).value - 1.0);
  }
  return std::abs(integrate_to_infinity(pdf, 0.0, 1e-11, params.net_rate() > 0 ? params.net_rate() : 1.0)
                      .value -
                  1.0);
}

CheckResult check_spec_time_mass() {
  double worst = 0.0;
  for (const double rho : kRhos) {
    const BDParams p(kLambda, rho * kLambda);
    for (const double t : {0.5, 2.0, 5.0}) {
      const auto cond = AgeCondition::origin(t);
      worst = std::max(worst, mass_error([&](double s) { return spec_time_pdf(p, s, cond); }, 0.0, t));
    }
  }
  return tolerance_check("spec_time_pdf mass", worst, 1e-8, "rho in {0,0.5,1}, t in {0.5,2,5}");
}

CheckResult check_kth_mass() {
  double worst = 0.0;
  const int n = 5;
  for (const double rho : kRhos) {
    const BDParams p(kLambda, rho * kLambda);
    for (int k = 1; k < n; ++k) {
      worst = std::max(worst, mass_error([&](double s) { return kth_pdf_given_age(p, n, k, s, 2.0); }, 0.0, 2.0));
      worst = std::max(worst, mass_error_tail([&](double s) { return kth_pdf_uniform_prior(p, n, k, s); }, p));
    }
  }
  return tolerance_check("kth pdf mass", worst, 1e-8, "n=5, known age 2 and flat prior");
}

CheckResult check_origin_mass() {
  double worst = 0.0;
  for (const double rho : {0.0, 0.5}) {
    const BDParams p(kLambda, rho * kLambda);
    for (const int n : {2, 5}) {
      worst = std::max(worst, mass_error_tail([&](double t) { return origin_pdf(p, t, n); }, p));
    }
  }
  return tolerance_check("origin_pdf mass", worst, 1e-8, "rho in {0,0.5}, n in {2,5}");
}

CheckResult check_pn_integral() {
  double worst = 0.0;
  for (const double rho : {0.1, 0.5, 0.9}) {
    const BDParams p(kLambda, rho * kLambda);
    for (int n = 1; n <= 6; ++n) {
      const double value =
          integrate_to_infinity([&](double t) { return transition_probability(p, n, t); }, 0.0, 1e-12,
                                p.net_rate())
              .value;
      worst = std::max(worst, std::abs(value - integral_pn_over_origin(p, n)));
    }
  }
  return tolerance_check("integral of p_n(t) dt = 1/(n lambda)", worst, 1e-8, "n=1..6");
}

CheckResult check_moments() {
  double worst = 0.0;
  const int n = 6;
  for (const double rho : kRhos) {
    const BDParams p(kLambda, rho * kLambda);
    for (int k = 1; k < n; ++k) {
      for (const auto& cond : {AgeCondition::origin(2.0), AgeCondition::uniform_prior()}) {
        const double closed = expected_kth(p, n, k, cond).value;
        const double quad = numeric_moment(p, n, k, 1, cond).value;
        worst = std::max(worst, std::abs(closed - quad) / std::abs(quad));
      }
    }
  }
  return tolerance_check("E[A^k] closed form vs quadrature", worst, 1e-6, "n=6, relative");
}

CheckResult check_anchor_values() {
  const int n = 10;
  double worst = 0.0;
  for (int k = 1; k < n; ++k) {
    double yule = 0.0;
    for (int i = k + 1; i <= n; ++i) yule += 1.0 / i;
    worst = std::max(worst, std::abs(expected_kth_uniform_prior(BDParams(1.0, 0.0), n, k).value - yule));
    const double critical = static_cast<double>(n - k) / k;
    worst = std::max(worst, std::abs(expected_kth_uniform_prior(BDParams(1.0, 1.0), n, k).value - critical));
  }
  return tolerance_check("Yule and critical anchor values", worst, 1e-12, "n=10");
}

CheckResult check_sampler_mean(std::uint64_t seed, unsigned jobs) {
  const BDParams p(1.0, 0.5);
  const int n = 5;
  const std::size_t count = 20000;
  const auto cond = AgeCondition::uniform_prior();
  const auto roots = parallel_generate(count, jobs, [&](std::size_t i) {
    Rng rng(seed, i);
    const auto pp = sample_point_process(p, n, cond, rng);
    return *std::max_element(pp.heights.begin(), pp.heights.end());
  });
  const auto estimate = mean_estimate(roots);
  const double z = std::abs(estimate.mean - expected_kth(p, n, 1, cond).value) / estimate.standard_error;
  return CheckResult{"point-process mrca mean (|z|)", z <= 4.0, z, 4.0, "n=5, rho=0.5, 2e4 trees"};
}

CheckResult check_forward_oracle(std::uint64_t seed, unsigned jobs) {
  const BDParams p(1.0, 0.5);
  const int n = 3;
  const double t = 2.0;
  const auto cond = AgeCondition::origin(t);
  const auto roots = parallel_generate(2000, jobs, [&](std::size_t i) {
    Rng rng(seed ^ 0x5bd1e995u, i);
    const auto tree = rejection_sample_conditioned(p, n, cond, rng);
    return tree.nodes[tree.root].time;
  });
  const auto ks = ks_one_sample(roots, [&](double s) { return kth_cdf_given_age(p, n, 1, s, t); });
  return CheckResult{"forward oracle vs mrca cdf (KS p)", ks.p_value >= 0.001, ks.p_value, 0.001,
                     "n=3, rho=0.5, t=2, 2000 trees"};
}

}  // namespace

std::vector<CheckResult> run_validation_suite(std::uint64_t seed, unsigned jobs) {
  std::vector<std::function<CheckResult()>> checks = {
      check_spec_time_mass,
      check_kth_mass,
      check_origin_mass,
      check_pn_integral,
      check_moments,
      check_anchor_values,
      [&] { return check_sampler_mean(seed, jobs); },
      [&] { return check_forward_oracle(seed, jobs); },
  };
  std::vector<CheckResult> results;
  for (const auto& check : checks) {
    try {
      results.push_back(check());
    } catch (const Error& e) {
      results.push_back(CheckResult{"(check failed to run)", false, 0.0, 0.0, e.what()});
    }
  }
  return results;
}

void write_validation_table(std::ostream& out, const std::vector<CheckResult>& results, int precision) {
  out << "check\tstatus\tmeasured\tthreshold\tdetail\n";
  for (const auto& r : results) {
    out << r.name << '\t' << (r.passed ? "PASS" : "FAIL") << '\t' << format_number(r.measured, precision)
        << '\t' << format_number(r.threshold, precision) << '\t' << r.detail << '\n';
  }
}

}  // namespace cbdp
