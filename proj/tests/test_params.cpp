#include <doctest.h>

#include <cmath>
#include <random>

#include "cbdp/errors.hpp"
#include "cbdp/numerics.hpp"
#include "cbdp/params.hpp"
#include "oracles.hpp"

using namespace cbdp;

TEST_CASE("parameters are validated and classified") {
  CHECK_THROWS_AS(BDParams(0.0, 0.0), ParameterError);
  CHECK_THROWS_AS(BDParams(-1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(BDParams(1.0, -0.1), ParameterError);
  CHECK_THROWS_AS(BDParams(1.0, 1.5), ParameterError);
  CHECK_THROWS_AS(BDParams(std::nan(""), 0.0), ParameterError);
  CHECK(BDParams(1.0, 0.0).regime() == Regime::Yule);
  CHECK(BDParams(2.0, 1e-13).regime() == Regime::Yule);
  CHECK(BDParams(1.0, 1.0).regime() == Regime::Critical);
  CHECK(BDParams(1.0, 1.0 - 1e-9).regime() == Regime::Critical);
  CHECK(BDParams(1.0, 0.5).regime() == Regime::General);
  CHECK(BDParams(2.0, 1.0).rho() == doctest::Approx(0.5));
  CHECK(BDParams::with_regime(1.0, 1e-13, Regime::General).regime() == Regime::General);
}

TEST_CASE("transition probability at t = 0") {
  const BDParams p(1.0, 0.5);
  CHECK(transition_probability(p, 1, 0.0) == 1.0);
  CHECK(transition_probability(p, 0, 0.0) == 0.0);
  CHECK(transition_probability(p, 3, 0.0) == 0.0);
}

TEST_CASE("transition probability closed forms") {
  const double t = 0.8;
  SUBCASE("Yule is geometric") {
    const BDParams p(1.3, 0.0);
    for (int n = 1; n < 8; ++n) {
      const double expected = std::exp(-1.3 * t) * std::pow(1.0 - std::exp(-1.3 * t), n - 1);
      CHECK(transition_probability(p, n, t) == doctest::Approx(expected).epsilon(1e-13));
    }
    CHECK(transition_probability(p, 0, t) == 0.0);
  }
  SUBCASE("critical limit") {
    const BDParams p(1.0, 1.0);
    // p_0 = t/(1+t), p_n = t^{n-1}/(1+t)^{n+1}
    CHECK(transition_probability(p, 0, t) == doctest::Approx(t / (1 + t)).epsilon(1e-13));
    for (int n = 1; n < 8; ++n) {
      CHECK(transition_probability(p, n, t) ==
            doctest::Approx(std::pow(t, n - 1) / std::pow(1 + t, n + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("transition probability matches direct forward simulation") {
  const BDParams p(1.0, 0.5);
  const double t = 1.7;
  const int runs = 1'000'000;
  std::mt19937_64 gen(11);
  int hits = 0;
  for (int i = 0; i < runs; ++i) hits += oracle::simulate_count(1.0, 0.5, t, gen) == 3 ? 1 : 0;
  const double prob = transition_probability(p, 3, t);
  const double se = std::sqrt(prob * (1 - prob) / runs);
  CHECK(std::abs(hits / double(runs) - prob) < 3 * se);
}

TEST_CASE("transition probabilities form a sub-distribution") {
  for (const double lambda : {0.5, 1.0, 2.0}) {
    for (const double rho : {0.0, 0.3, 0.9, 1.0}) {
      const BDParams p(lambda, rho * lambda);
      for (const double t : {0.01, 0.5, 2.0, 10.0}) {
        double partial = 0.0;
        for (int n = 0; n <= 50; ++n) {
          const double pn = transition_probability(p, n, t);
          REQUIRE(pn >= 0.0);
          REQUIRE(pn <= 1.0);
          const double next = partial + pn;
          CHECK(next >= partial);
          partial = next;
          CHECK(partial <= 1.0 + 1e-12);
        }
        // Convergence to 1 checked where the count distribution has a light enough tail.
        if (p.net_rate() * t > 8.0) continue;
        double total = partial;
        for (int n = 51; n <= 200000 && total < 1.0 - 1e-10; ++n) total += transition_probability(p, n, t);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("Yule branch equals general branch just above the threshold") {
  const BDParams yule(1.0, 0.0);
  const auto general = BDParams::with_regime(1.0, 1e-14, Regime::General);
  for (const double t : {0.1, 1.0, 3.0}) {
    for (int n = 0; n < 10; ++n) {
      const double a = transition_probability(yule, n, t);
      const double b = transition_probability(general, n, t);
      CHECK(std::abs(a - b) <= 1e-9 * std::max(a, 1e-300) + 1e-14);
    }
  }
}

TEST_CASE("log transition probability handles large n") {
  const BDParams p(1.0, 0.5);
  const double lp = log_transition_probability(p, 5000, 3.0);
  CHECK(std::isfinite(lp));
  CHECK(lp < 0.0);
  CHECK(std::exp(log_transition_probability(p, 4, 1.0)) ==
        doctest::Approx(transition_probability(p, 4, 1.0)).epsilon(1e-14));
  CHECK(log_transition_probability(p, 0, 0.0) == -INFINITY);
}

TEST_CASE("integral of p_n over the origin time is 1/(n lambda)") {
  CHECK(integral_pn_over_origin(BDParams(2.0, 1.0), 5) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(integral_pn_over_origin(BDParams(1.0, 0.0), 1) == doctest::Approx(1.0).epsilon(1e-15));
  // The critical integral is the Beta integral B(n, 1) / lambda and stays finite.
  CHECK(integral_pn_over_origin(BDParams(1.0, 1.0), 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(oracle::gauss_legendre_tail([](double t) { return transition_probability(BDParams(1.0, 1.0), 3, t); },
                                    0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  // Independent quadrature on [0, T] plus an analytic bound on the tail.
  const BDParams p(1.0, 0.9);
  const double T = 600.0;
  const double head = oracle::gauss_legendre([&](double t) { return transition_probability(p, 3, t); }, 0.0, T, 4000);
  // p_n(t) <= p_1(t) ~ (r^2/lambda^2) e^{-rt}: the tail beyond T is below 1e-25.
  CHECK(std::abs(head - integral_pn_over_origin(p, 3)) < 1e-8);
  const double adaptive =
      integrate_to_infinity([&](double t) { return transition_probability(p, 3, t); }, 0.0, 1e-12, p.net_rate())
          .value;
  CHECK(std::abs(adaptive - 1.0 / 3.0) < 1e-8);
}
