#pragma once

// Nonstationary iterated solvers as per-singular-component scalar
// recurrences, parameter-sequence generators, and convergence diagnostics.
//
// Both iterations start from x_0 = 0 and run in normalized spectral
// coordinates (one scalar recurrence per retained singular value, O(rank)
// per step). With yhat the u-basis data coefficients:
//
//   nsiwt:  xhat_n[m] = (sigma^r_n yhat[m] + alpha_n xhat_{n-1}[m])
//                       / (sigma^(r_n+1) + alpha_n)
//   nsift:  with s = sigma^2, a = (s + alpha_n)^gamma_n, b = s^gamma_n:
//           xhat_n[m] = (s^(gamma_n - 1) sigma yhat[m] + (a - b) xhat_{n-1}[m]) / a
//
// For constant parameters, n steps reproduce the siwt/sift closed-form
// filters componentwise; gamma_n == 1 and r_n == 1 both collapse to the
// classical iterated Tikhonov recurrence.
//
// The noise-free error after n steps factors per mode into
//   prod_{k<=n} (1 - F_k(sigma)),
// which error_propagator evaluates in the log domain; schedule_diagnostics
// probes the divergence of sum_k F_k(sigma), the series controlling whether
// the iteration converges at all.

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

#include "specreg/spectral.hpp"
#include "specreg/stopping.hpp"

namespace specreg {

enum class IterMethod { nsiwt, nsift };

// ---------------------------------------------------------------------------
// Parameter sequences. Iterations are counted from 1: alpha_at(1) is used by
// the first step.

struct AlphaRule {
  enum class Kind { constant, geometric, factorial, polynomial, custom };
  Kind kind = Kind::constant;
  double a0 = 0.0;     // constant value / geometric start
  double q = 0.0;      // geometric ratio, in (0, 1)
  double coeff = 1.0;  // polynomial: alpha_n = coeff * n^power
  double power = 0.0;
  std::vector<double> values;  // custom

  static AlphaRule constant(double alpha);
  static AlphaRule geometric(double a0, double q);
  static AlphaRule factorial();  // alpha_n = 1/n!, clamped at 1e-300
  static AlphaRule polynomial(double coeff, double power);
  static AlphaRule custom(std::vector<double> values);
};

struct ExponentRule {
  enum class Kind {
    constant_r,
    constant_gamma,
    nonincreasing,  // 1 - (n-1)/100 for n < 50, then 1/2; valid as r or gamma
    linear_r,       // r_n = slope * n, default slope 1/10
    linear_gamma,   // gamma_n = slope * n, default slope 1/2
    custom,
  };
  Kind kind = Kind::constant_r;
  double value = 1.0;
  double slope = 0.0;
  std::vector<double> values;  // custom

  static ExponentRule constant_r(double r);
  static ExponentRule constant_gamma(double gamma);
  static ExponentRule nonincreasing();
  static ExponentRule linear_r(double slope = 0.1);
  static ExponentRule linear_gamma(double slope = 0.5);
  static ExponentRule custom(std::vector<double> values);

  // Unbounded exponents get the shorter default iteration cap.
  bool unbounded() const {
    return kind == Kind::linear_r || kind == Kind::linear_gamma;
  }
};

struct ParamSchedule {
  AlphaRule alpha_rule;
  ExponentRule exponent_rule;
  int max_iter = 0;  // 0 = default: 200 bounded, 60 unbounded exponents

  double alpha_at(int n) const;     // n >= 1
  double exponent_at(int n) const;  // r_n or gamma_n depending on the method
  int effective_max_iter() const;
  // True if the factorial rule hits its 1e-300 clamp within the horizon.
  bool alpha_clamped_within(int horizon) const;

  // Checks alpha_n > 0 and r_n >= 0 (nsiwt) or gamma_n >= 1/2 (nsift) over
  // the effective horizon. Throws std::invalid_argument on violation.
  void validate(IterMethod method) const;
};

// ---------------------------------------------------------------------------
// Iteration state and steps.

struct HistoryEntry {
  int n = 0;
  double residual_norm = 0.0;
  double error_norm = std::numeric_limits<double>::quiet_NaN();
};

struct IterationState {
  Eigen::VectorXd coeffs;  // v-basis coefficients of x_n (normalized problem)
  int n = 0;               // 0-based; n == 0 means x_0 = 0
  double residual_norm = 0.0;  // physical units
  std::vector<HistoryEntry> history;

  static IterationState zero(const SpectralOperator& op);
};

// One step of the weighted iteration. y_coeffs are u-basis coefficients of
// the data for the normalized problem (i.e. <y, u> / norm_scale).
// residual_norm is recomputed over the spectral components, in physical
// units; run_iteration adds any out-of-span data component on top.
IterationState nsiwt_step(const SpectralOperator& op,
                          const IterationState& state, double alpha_n,
                          double r_n, const SpectralVector& y_coeffs);

// One step of the fractional iteration; gamma_n >= 1/2.
IterationState nsift_step(const SpectralOperator& op,
                          const IterationState& state, double alpha_n,
                          double gamma_n, const SpectralVector& y_coeffs);

enum class StopReason { discrepancy, plateau, max_iter };

struct StopReport {
  int k_hat = 0;            // stopping index, counted from 1
  double residual = 0.0;    // physical units, includes out-of-span component
  double rel_error = std::numeric_limits<double>::quiet_NaN();
  double abs_error = std::numeric_limits<double>::quiet_NaN();
  StopReason reason = StopReason::max_iter;
  // max_iter with an unsatisfied discrepancy rule is reported, not thrown:
  bool no_convergence = false;
};

// Runs the chosen iteration on physical-space data y until the stop rule
// fires or max_iter is reached. With a max-only rule and a known truth, an
// error-plateau detector also stops once the step-to-step change of the
// relative error drops below 1e-12. History records one entry per step.
std::pair<IterationState, StopReport> run_iteration(
    const SpectralOperator& op, const ParamSchedule& schedule,
    IterMethod method, const Eigen::VectorXd& y, const StopRule& stop,
    const Eigen::VectorXd* truth = nullptr);

// prod_{k=1..n} (1 - F_k(sigma)): the exact noise-free error multiplier for
// a mode at sigma after n steps, evaluated in the log domain.
double error_propagator(const ParamSchedule& schedule, IterMethod method,
                        int n, double sigma);

// Sum of the perturbation weights of the stability bound: alpha_k^{-1} for
// nsiwt, alpha_k^{-gamma_k} for nsift, over k = 1..n. May overflow to +inf
// for factorial schedules; callers treat that as a vacuous bound.
double perturbation_bound_sum(const ParamSchedule& schedule, IterMethod method,
                              int n);

// ---------------------------------------------------------------------------
// Series diagnostics for the convergence dichotomy.

enum class ConvergenceVerdict {
  convergent_method,
  non_convergent_method,
  numeric_only,  // custom schedules: partial sums are advisory
};

struct SeriesProbe {
  double sigma = 0.0;
  double partial_half = 0.0;  // S_{N/2}
  double partial_full = 0.0;  // S_N
  double growth_ratio = 0.0;  // S_N / S_{N/2}
};

struct DiagnosticsReport {
  std::vector<SeriesProbe> probes;
  ConvergenceVerdict verdict = ConvergenceVerdict::numeric_only;
  std::string verdict_detail;
  double beta_n = 0.0;        // sum alpha_k^{-1} (nsiwt) / alpha_k^{-s} (nsift)
  double beta_tilde_n = 0.0;  // sum 1/(1 + alpha_k) resp. 1/(1 + alpha_k^s)
  bool alpha_clamped = false;
};

// Partial sums of the convergence series sum_k F_k(sigma) at N = horizon/2
// and N = horizon for each probe sigma, plus an analytic verdict for the
// built-in alpha families. horizon >= 10.
DiagnosticsReport schedule_diagnostics(const ParamSchedule& schedule,
                                       IterMethod method,
                                       std::span<const double> sigma_probes,
                                       int horizon);

// ---------------------------------------------------------------------------
// Speed comparison of two schedules on the same noise-free data
// (y must equal K x_true exactly in the spectral representation; the truth
// coefficients are recovered as yhat_m / sigma_m).

struct SpeedComparison {
  std::vector<double> err_a;  // ||x_true - x_n|| per n = 1..n_max
  std::vector<double> err_b;
  int crossover = -1;  // first n with err_a < err_b, -1 if none
};

SpeedComparison compare_speed(const SpectralOperator& op,
                              const ParamSchedule& schedule_a,
                              const ParamSchedule& schedule_b,
                              IterMethod method_a, IterMethod method_b,
                              const Eigen::VectorXd& y, int n_max);

}  // namespace specreg
