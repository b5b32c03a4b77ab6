#pragma once

// Scalar filter functions F(sigma) for every regularization family in the
// library, and the generic filter solver
//
//   R_alpha y = sum_m F(sigma_m) sigma_m^{-1} <y, u_m> v_m.
//
// Families, on the normalized spectrum sigma in (0, 1]:
//
//   classical_tikhonov  F(s) = s^2 / (s^2 + alpha)
//   weighted            F(s) = s^(r+1) / (s^(r+1) + alpha),        r >= 0
//   fractional          F(s) = s^(2g) / (s^2 + alpha)^g,           g >= 1/2
//   siwt                F(s) = 1 - (alpha / (s^(r+1) + alpha))^n
//   sift                F(s) = 1 - (1 - F_fractional(s))^n
//   tsvd_reference      F(s) = 1 if s >= alpha else 0   (test baseline only)
//
// siwt/sift are the n-step closed forms of the iterated weighted/fractional
// methods; the recurrences in iterate.hpp must agree with them componentwise
// for constant parameter schedules.
//
// one_minus_filter evaluates 1 - F in a cancellation-safe form: the factors
// (alpha/(s^(r+1)+alpha))^n and (1 - F_frac)^n are built from exact ratios and
// expm1/log1p, never from the subtraction 1 - filter_value, so error
// propagation factors as small as 1e-300 keep full relative accuracy.

#include <Eigen/Core>

#include <span>
#include <vector>

#include "specreg/spectral.hpp"

namespace specreg {

enum class FilterFamily {
  classical_tikhonov,
  weighted,
  fractional,
  siwt,
  sift,
  tsvd_reference,
};

struct FilterSpec {
  FilterFamily family = FilterFamily::classical_tikhonov;
  double alpha = 1.0;  // regularization parameter; tsvd: relative threshold
  double r = 1.0;      // weighted exponent (weighted/siwt)
  double gamma = 1.0;  // fractional exponent (fractional/sift)
  int n_iter = 1;      // iteration count (siwt/sift)

  static FilterSpec classical(double alpha);
  static FilterSpec weighted(double alpha, double r);
  static FilterSpec fractional(double alpha, double gamma);
  static FilterSpec siwt(double alpha, double r, int n_iter);
  static FilterSpec sift(double alpha, double gamma, int n_iter);
  static FilterSpec tsvd(double threshold);

  // Throws std::invalid_argument unless alpha > 0, r >= 0, gamma >= 1/2 and
  // n_iter >= 1 (only the fields the family uses are checked).
  void validate() const;
};

// F(sigma) for sigma in (0, 1]. Rejects sigma <= 0.
double filter_value(const FilterSpec& spec, double sigma);

// 1 - F(sigma), cancellation-safe (see file comment).
double one_minus_filter(const FilterSpec& spec, double sigma);

// x with v-coefficients F(sigma_m) sigma_m^{-1} <y, u_m>, where y is a
// physical-space vector. The gain F(s)/s is evaluated as one expression per
// family so no large intermediate ratio is formed at tiny sigma.
Eigen::VectorXd filter_solve(const SpectralOperator& op, const FilterSpec& spec,
                             const Eigen::VectorXd& y);

// sup over sigma of (1 - F_alpha(sigma)) sigma^nu per grid alpha, plus the
// log-log slope of the sup against alpha. The slope reveals the filter's
// qualification: it equals min(nu * beta, saturation cap).
struct QualificationReport {
  double nu = 0.0;
  std::vector<double> alphas;
  std::vector<double> sup_values;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Requires nu > 0 and a positive, strictly descending alpha grid. The sup is
// taken over 2000 logarithmically spaced sigma in [1e-8, 1].
QualificationReport filter_qualification_check(const FilterSpec& spec,
                                               double nu,
                                               std::span<const double> alpha_grid);

}  // namespace specreg
