#pragma once

#include "cbdp/params.hpp"

namespace cbdp::detail {

// Rates as used by the formulas: Yule forces mu = 0, critical forces mu = lambda.
struct Rates {
  double lambda;
  double mu;
  double r;  // lambda - mu
  bool critical;
};

Rates rates_of(const BDParams& params);

// f(s|t), F(s|t) and 1 - F(s|t), each computed without cancellation.
struct SpecTerms {
  double pdf;
  double cdf;
  double ccdf;
};

SpecTerms spec_terms(const Rates& rates, double s, double t);

// x * log(y) with 0 * log(0) = 0.
double xlogy(double x, double y);

void check_kth_indices(int n, int k);
void check_gap_indices(int n, int k, int l);

}  // namespace cbdp::detail
