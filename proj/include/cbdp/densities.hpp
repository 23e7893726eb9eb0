#pragma once

#include <span>

#include "cbdp/params.hpp"

// Densities of speciation times in the reconstructed tree of a birth-death
// process conditioned on n extant species.
//
// Index convention: k = 1 is the OLDEST speciation event (the mrca), k = n-1
// the most recent one. Times are measured backwards from the present (0).
namespace cbdp {

// What is known about the age of the tree.
class AgeCondition {
 public:
  enum class Kind { OriginAge, MrcaAge, UniformPrior };

  static AgeCondition origin(double age);
  static AgeCondition mrca(double age);
  static AgeCondition uniform_prior() { return AgeCondition(Kind::UniformPrior, 0.0); }

  Kind kind() const noexcept { return kind_; }
  bool has_age() const noexcept { return kind_ != Kind::UniformPrior; }
  // Throws DomainError under the uniform prior.
  double age() const;

 private:
  AgeCondition(Kind kind, double age) : kind_(kind), age_(age) {}

  Kind kind_;
  double age_;
};

// Density f(s|t) of a single speciation time given the age t. Origin and mrca
// conditioning give the same density. Zero for s > t.
double spec_time_pdf(const BDParams& params, double s, const AgeCondition& cond);
double spec_time_cdf(const BDParams& params, double s, const AgeCondition& cond);
double spec_time_inv_cdf(const BDParams& params, double u, const AgeCondition& cond);

// Posterior of the origin time under a flat prior on (0, inf). Requires mu < lambda.
double origin_pdf(const BDParams& params, double t, int n);
double origin_cdf(const BDParams& params, double t, int n);
double origin_inv_cdf(const BDParams& params, double u, int n);

// Time of the k-th speciation event in a tree of age t.
double kth_pdf_given_age(const BDParams& params, int n, int k, double s, double t);
double kth_cdf_given_age(const BDParams& params, int n, int k, double s, double t);

// Time of the k-th speciation event with the origin integrated out under the
// flat prior. The critical branch is the mu -> lambda limit.
double kth_pdf_uniform_prior(const BDParams& params, int n, int k, double s);
// Closed form: P[A > s] is a binomial tail in z(s) = r e^{-rs} / (lambda - mu e^{-rs}).
double kth_cdf_uniform_prior(const BDParams& params, int n, int k, double s);

// log f(x_1, ..., x_{n-1} | n) for ordered times x_1 > ... > x_{n-1} > 0.
double joint_log_density_ordered(const BDParams& params, std::span<const double> x, int n);
// Same joint density evaluated on unordered times (divided by (n-1)!).
double joint_log_density_unordered(const BDParams& params, std::span<const double> s, int n);
// log f(x_0, x_1, ..., x_{n-1} | n) including the origin x_0 > x_1 > ... .
double joint_log_density_with_origin(const BDParams& params, std::span<const double> x, int n);

inline constexpr double kGapTol = 1e-10;

// Density of A^k - A^l (k < l) in a tree of age t, by quadrature over the
// time of the k-th event.
double gap_pdf_given_age(const BDParams& params, int n, int k, int l, double s, double t,
                         double tol = kGapTol);
// Closed forms for the pure-birth process; RegimeError otherwise.
double gap_pdf_yule_given_age(const BDParams& params, int n, int k, int l, double s, double t);
double gap_pdf_yule_uniform_prior(const BDParams& params, int n, int k, int l, double s);

}  // namespace cbdp
