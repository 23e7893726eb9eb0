#pragma once

#include <cstddef>
#include <string_view>

#include "cbdp/densities.hpp"
#include "cbdp/params.hpp"

namespace cbdp {

enum class MomentMethod { ClosedForm, Quadrature };

std::string_view to_string(MomentMethod method);

struct MomentResult {
  double value = 0.0;  // +inf for moments that do not exist
  MomentMethod method = MomentMethod::ClosedForm;
  // Set when the closed form was abandoned for quadrature because its
  // alternating sum cancelled too badly.
  bool cancellation_flag = false;
};

// Closed-form sums are abandoned when sum|term| / |sum| exceeds this.
inline constexpr double kCancellationThreshold = 1e12;

// Raw value of a closed-form expectation sum, evaluated in 50-digit arithmetic
// without any fallback. For checking the formulas themselves.
struct ClosedFormSum {
  double value = 0.0;
  double cancellation_index = 0.0;  // sum |term| / |sum|
  std::size_t terms = 0;
};

// The sums behind expected_kth_given_age (all regimes) and the rho-form
// sum behind expected_kth_uniform_prior (0 < mu < lambda only).
ClosedFormSum closed_form_sum_given_age(const BDParams& params, int n, int k, double t);
ClosedFormSum closed_form_sum_uniform_prior(const BDParams& params, int n, int k);

// E[A_{n,t}^k] for a tree of origin age t.
MomentResult expected_kth_given_age(const BDParams& params, int n, int k, double t);

// E[A_n^k] under the flat prior on the origin.
MomentResult expected_kth_uniform_prior(const BDParams& params, int n, int k);

// Dispatches on the condition. Under MrcaAge the oldest event sits at the
// given age and the remaining n-2 are i.i.d. f(s|t).
MomentResult expected_kth(const BDParams& params, int n, int k, const AgeCondition& cond);

enum class SpecialModel { Yule, CriticalConditioned };

// Moments of A_n^k with lambda = 1: Yule for m in {1, 2}, cCBP for any m
// (+inf when k < m). DomainError for unsupported Yule orders.
double closed_form_special_moment(SpecialModel model, int n, int k, int m);

// E[(A^k)^m] by quadrature against the density for the given condition.
MomentResult numeric_moment(const BDParams& params, int n, int k, int m, const AgeCondition& cond);

// E[A^k - A^l] for k < l (positive: the k-th event is older).
double expected_gap(const BDParams& params, int n, int k, int l, const AgeCondition& cond);

}  // namespace cbdp
