#include "specreg/iterate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace specreg {

namespace {

constexpr double kFactorialClamp = 1e-300;
constexpr int kDefaultMaxIterBounded = 200;
constexpr int kDefaultMaxIterUnbounded = 60;
constexpr double kPlateauTol = 1e-12;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Step filter value F_k(sigma) and its complement for one iteration stage.
struct StageFactors {
  double filter;     // F_k(sigma)
  double one_minus;  // 1 - F_k(sigma), exact ratio / expm1 form
};

StageFactors nsiwt_stage(double sigma, double alpha, double r) {
  const double p = std::pow(sigma, r + 1.0);
  const double den = p + alpha;
  return {p / den, alpha / den};
}

StageFactors nsift_stage(double sigma, double alpha, double gamma) {
  const double g = gamma * std::log1p(alpha / (sigma * sigma));
  return {std::exp(-g), -std::expm1(-g)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameter rules.

AlphaRule AlphaRule::constant(double alpha) {
  AlphaRule rule;
  rule.kind = Kind::constant;
  rule.a0 = alpha;
  return rule;
}

AlphaRule AlphaRule::geometric(double a0, double q) {
  require(q > 0.0 && q < 1.0, "AlphaRule: geometric ratio q must lie in (0,1)");
  AlphaRule rule;
  rule.kind = Kind::geometric;
  rule.a0 = a0;
  rule.q = q;
  return rule;
}

AlphaRule AlphaRule::factorial() {
  AlphaRule rule;
  rule.kind = Kind::factorial;
  return rule;
}

AlphaRule AlphaRule::polynomial(double coeff, double power) {
  AlphaRule rule;
  rule.kind = Kind::polynomial;
  rule.coeff = coeff;
  rule.power = power;
  return rule;
}

AlphaRule AlphaRule::custom(std::vector<double> values) {
  AlphaRule rule;
  rule.kind = Kind::custom;
  rule.values = std::move(values);
  return rule;
}

ExponentRule ExponentRule::constant_r(double r) {
  ExponentRule rule;
  rule.kind = Kind::constant_r;
  rule.value = r;
  return rule;
}

ExponentRule ExponentRule::constant_gamma(double gamma) {
  ExponentRule rule;
  rule.kind = Kind::constant_gamma;
  rule.value = gamma;
  return rule;
}

ExponentRule ExponentRule::nonincreasing() {
  ExponentRule rule;
  rule.kind = Kind::nonincreasing;
  return rule;
}

ExponentRule ExponentRule::linear_r(double slope) {
  ExponentRule rule;
  rule.kind = Kind::linear_r;
  rule.slope = slope;
  return rule;
}

ExponentRule ExponentRule::linear_gamma(double slope) {
  ExponentRule rule;
  rule.kind = Kind::linear_gamma;
  rule.slope = slope;
  return rule;
}

ExponentRule ExponentRule::custom(std::vector<double> values) {
  ExponentRule rule;
  rule.kind = Kind::custom;
  rule.values = std::move(values);
  return rule;
}

double ParamSchedule::alpha_at(int n) const {
  require(n >= 1, "alpha_at: iterations are counted from 1");
  switch (alpha_rule.kind) {
    case AlphaRule::Kind::constant:
      return alpha_rule.a0;
    case AlphaRule::Kind::geometric:
      return alpha_rule.a0 * std::pow(alpha_rule.q, n);
    case AlphaRule::Kind::factorial:
      // 1/n! through lgamma; clamped so the sequence stays positive.
      return std::max(std::exp(-std::lgamma(static_cast<double>(n) + 1.0)),
                      kFactorialClamp);
    case AlphaRule::Kind::polynomial:
      return alpha_rule.coeff * std::pow(static_cast<double>(n), alpha_rule.power);
    case AlphaRule::Kind::custom:
      require(static_cast<std::size_t>(n) <= alpha_rule.values.size(),
              "alpha_at: custom schedule exhausted");
      return alpha_rule.values[static_cast<std::size_t>(n) - 1];
  }
  throw std::logic_error("alpha_at: unknown rule");
}

double ParamSchedule::exponent_at(int n) const {
  require(n >= 1, "exponent_at: iterations are counted from 1");
  switch (exponent_rule.kind) {
    case ExponentRule::Kind::constant_r:
    case ExponentRule::Kind::constant_gamma:
      return exponent_rule.value;
    case ExponentRule::Kind::nonincreasing:
      return n < 50 ? 1.0 - (n - 1) / 100.0 : 0.5;
    case ExponentRule::Kind::linear_r:
    case ExponentRule::Kind::linear_gamma:
      return exponent_rule.slope * n;
    case ExponentRule::Kind::custom:
      require(static_cast<std::size_t>(n) <= exponent_rule.values.size(),
              "exponent_at: custom schedule exhausted");
      return exponent_rule.values[static_cast<std::size_t>(n) - 1];
  }
  throw std::logic_error("exponent_at: unknown rule");
}

int ParamSchedule::effective_max_iter() const {
  int cap = max_iter > 0 ? max_iter
                         : (exponent_rule.unbounded() ? kDefaultMaxIterUnbounded
                                                      : kDefaultMaxIterBounded);
  if (alpha_rule.kind == AlphaRule::Kind::custom)
    cap = std::min(cap, static_cast<int>(alpha_rule.values.size()));
  if (exponent_rule.kind == ExponentRule::Kind::custom)
    cap = std::min(cap, static_cast<int>(exponent_rule.values.size()));
  return cap;
}

bool ParamSchedule::alpha_clamped_within(int horizon) const {
  if (alpha_rule.kind != AlphaRule::Kind::factorial) return false;
  return std::exp(-std::lgamma(static_cast<double>(horizon) + 1.0)) <
         kFactorialClamp;
}

void ParamSchedule::validate(IterMethod method) const {
  const int cap = effective_max_iter();
  require(cap >= 1, "ParamSchedule: empty iteration horizon");
  for (int n = 1; n <= cap; ++n) {
    const double a = alpha_at(n);
    require(std::isfinite(a) && a > 0.0, "ParamSchedule: alpha_n must be > 0");
    const double e = exponent_at(n);
    if (method == IterMethod::nsiwt)
      require(std::isfinite(e) && e >= 0.0, "ParamSchedule: r_n must be >= 0");
    else
      require(std::isfinite(e) && e >= 0.5,
              "ParamSchedule: gamma_n must be >= 1/2");
  }
}

// ---------------------------------------------------------------------------
// Steps.

IterationState IterationState::zero(const SpectralOperator& op) {
  IterationState state;
  state.coeffs = Eigen::VectorXd::Zero(op.rank());
  return state;
}

namespace {

double spectral_residual(const SpectralOperator& op,
                         const Eigen::VectorXd& yhat,
                         const Eigen::VectorXd& coeffs) {
  return op.norm_scale() *
         (yhat - op.sigma().cwiseProduct(coeffs)).norm();
}

void check_step_inputs(const SpectralOperator& op, const IterationState& state,
                       const SpectralVector& y_coeffs) {
  require(state.coeffs.size() == op.rank(), "step: state/operator mismatch");
  require(y_coeffs.basis == Basis::u && y_coeffs.coeffs.size() == op.rank(),
          "step: y_coeffs must be u-basis coefficients of length rank");
  require(state.n >= 0, "step: negative iteration index");
}

}  // namespace

IterationState nsiwt_step(const SpectralOperator& op,
                          const IterationState& state, double alpha_n,
                          double r_n, const SpectralVector& y_coeffs) {
  check_step_inputs(op, state, y_coeffs);
  require(alpha_n > 0.0, "nsiwt_step: alpha_n must be > 0");
  require(r_n >= 0.0, "nsiwt_step: r_n must be >= 0");

  IterationState next = state;
  for (Eigen::Index m = 0; m < op.rank(); ++m) {
    const double sigma = op.sigma()(m);
    const double den = std::pow(sigma, r_n + 1.0) + alpha_n;
    next.coeffs(m) = (std::pow(sigma, r_n) * y_coeffs.coeffs(m) +
                      alpha_n * state.coeffs(m)) /
                     den;
  }
  next.n = state.n + 1;
  next.residual_norm = spectral_residual(op, y_coeffs.coeffs, next.coeffs);
  return next;
}

IterationState nsift_step(const SpectralOperator& op,
                          const IterationState& state, double alpha_n,
                          double gamma_n, const SpectralVector& y_coeffs) {
  check_step_inputs(op, state, y_coeffs);
  require(alpha_n > 0.0, "nsift_step: alpha_n must be > 0");
  require(gamma_n >= 0.5, "nsift_step: gamma_n must be >= 1/2");

  IterationState next = state;
  for (Eigen::Index m = 0; m < op.rank(); ++m) {
    const double sigma = op.sigma()(m);
    const double s = sigma * sigma;
    // s^(gamma-1) sigma / (s + alpha)^gamma in one exponential; the combined
    // exponent is bounded where numerator and denominator alone underflow.
    const double coef_y = std::exp((2.0 * gamma_n - 1.0) * std::log(sigma) -
                                   gamma_n * std::log(s + alpha_n));
    const double stage_one_minus = nsift_stage(sigma, alpha_n, gamma_n).one_minus;
    next.coeffs(m) =
        coef_y * y_coeffs.coeffs(m) + stage_one_minus * state.coeffs(m);
  }
  next.n = state.n + 1;
  next.residual_norm = spectral_residual(op, y_coeffs.coeffs, next.coeffs);
  return next;
}

// ---------------------------------------------------------------------------
// Full runs.

std::pair<IterationState, StopReport> run_iteration(
    const SpectralOperator& op, const ParamSchedule& schedule,
    IterMethod method, const Eigen::VectorXd& y, const StopRule& stop,
    const Eigen::VectorXd* truth) {
  schedule.validate(method);
  require(y.size() == op.rows(), "run_iteration: data dimension mismatch");

  const Eigen::VectorXd yhat_phys = op.u_basis().transpose() * y;
  const SpectralVector yhat{yhat_phys / op.norm_scale(), Basis::u};
  const double y_perp =
      std::sqrt(std::max(0.0, y.squaredNorm() - yhat_phys.squaredNorm()));

  Eigen::VectorXd truth_coeffs;
  double truth_perp2 = 0.0;
  double truth_norm = 0.0;
  if (truth != nullptr) {
    require(truth->size() == op.cols(), "run_iteration: truth dimension mismatch");
    truth_coeffs = op.v_basis().transpose() * (*truth);
    truth_perp2 = std::max(0.0, truth->squaredNorm() - truth_coeffs.squaredNorm());
    truth_norm = truth->norm();
  }
  const bool have_truth = truth != nullptr && truth_norm > 0.0;

  IterationState state = IterationState::zero(op);
  state.residual_norm = std::hypot(spectral_residual(op, yhat.coeffs, state.coeffs),
                                   y_perp);

  StopReport report;
  double prev_error = std::numeric_limits<double>::quiet_NaN();
  const int cap = schedule.effective_max_iter();

  for (int n = 1; n <= cap; ++n) {
    const double alpha_n = schedule.alpha_at(n);
    const double expo_n = schedule.exponent_at(n);
    state = method == IterMethod::nsiwt
                ? nsiwt_step(op, state, alpha_n, expo_n, yhat)
                : nsift_step(op, state, alpha_n, expo_n, yhat);
    state.residual_norm = std::hypot(state.residual_norm, y_perp);

    double abs_error = std::numeric_limits<double>::quiet_NaN();
    double rel_error = std::numeric_limits<double>::quiet_NaN();
    if (have_truth) {
      abs_error = std::sqrt((state.coeffs - truth_coeffs).squaredNorm() +
                            truth_perp2);
      rel_error = abs_error / truth_norm;
    }
    state.history.push_back({n, state.residual_norm, rel_error});

    report.k_hat = n;
    report.residual = state.residual_norm;
    report.rel_error = rel_error;
    report.abs_error = abs_error;

    if (stop.kind == StopRule::Kind::discrepancy) {
      if (discrepancy_stop(state.residual_norm, stop)) {
        report.reason = StopReason::discrepancy;
        return {std::move(state), report};
      }
    } else if (have_truth && n > 1 &&
               std::abs(rel_error - prev_error) < kPlateauTol) {
      report.reason = StopReason::plateau;
      return {std::move(state), report};
    }
    prev_error = rel_error;
  }

  report.reason = StopReason::max_iter;
  report.no_convergence = stop.kind == StopRule::Kind::discrepancy;
  return {std::move(state), report};
}

double error_propagator(const ParamSchedule& schedule, IterMethod method,
                        int n, double sigma) {
  require(n >= 0, "error_propagator: n must be >= 0");
  require(n <= schedule.effective_max_iter(),
          "error_propagator: n exceeds the schedule horizon");
  require(sigma > 0.0, "error_propagator: sigma must be positive");

  double log_prod = 0.0;
  for (int k = 1; k <= n; ++k) {
    const StageFactors stage =
        method == IterMethod::nsiwt
            ? nsiwt_stage(sigma, schedule.alpha_at(k), schedule.exponent_at(k))
            : nsift_stage(sigma, schedule.alpha_at(k), schedule.exponent_at(k));
    if (stage.one_minus <= 0.0) return 0.0;
    log_prod += std::log(stage.one_minus);
  }
  return std::exp(log_prod);
}

double perturbation_bound_sum(const ParamSchedule& schedule, IterMethod method,
                              int n) {
  require(n >= 0, "perturbation_bound_sum: n must be >= 0");
  double sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double alpha = schedule.alpha_at(k);
    if (method == IterMethod::nsiwt)
      sum += 1.0 / alpha;
    else
      sum += std::exp(-schedule.exponent_at(k) * std::log(alpha));
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Diagnostics.

namespace {

bool exponent_bounded(const ExponentRule& rule) {
  return rule.kind == ExponentRule::Kind::constant_r ||
         rule.kind == ExponentRule::Kind::constant_gamma ||
         rule.kind == ExponentRule::Kind::nonincreasing;
}

}  // namespace

DiagnosticsReport schedule_diagnostics(const ParamSchedule& schedule,
                                       IterMethod method,
                                       std::span<const double> sigma_probes,
                                       int horizon) {
  require(horizon >= 10, "schedule_diagnostics: horizon must be >= 10");
  require(!sigma_probes.empty(), "schedule_diagnostics: no probe sigmas");

  DiagnosticsReport report;
  report.alpha_clamped = schedule.alpha_clamped_within(horizon);

  const int half = horizon / 2;
  for (double sigma : sigma_probes) {
    require(sigma > 0.0, "schedule_diagnostics: probe sigma must be positive");
    SeriesProbe probe;
    probe.sigma = sigma;
    double sum = 0.0;
    for (int k = 1; k <= horizon; ++k) {
      const StageFactors stage =
          method == IterMethod::nsiwt
              ? nsiwt_stage(sigma, schedule.alpha_at(k), schedule.exponent_at(k))
              : nsift_stage(sigma, schedule.alpha_at(k), schedule.exponent_at(k));
      sum += stage.filter;
      if (k == half) probe.partial_half = sum;
    }
    probe.partial_full = sum;
    probe.growth_ratio =
        probe.partial_half > 0.0 ? probe.partial_full / probe.partial_half
                                 : std::numeric_limits<double>::infinity();
    report.probes.push_back(probe);
  }

  // Rate quantities of the bounded-exponent corollaries.
  double sup_exponent = 0.0;
  for (int k = 1; k <= horizon; ++k)
    sup_exponent = std::max(sup_exponent, schedule.exponent_at(k));
  for (int k = 1; k <= horizon; ++k) {
    const double alpha = schedule.alpha_at(k);
    if (method == IterMethod::nsiwt) {
      report.beta_n += 1.0 / alpha;
      report.beta_tilde_n += 1.0 / (1.0 + alpha);
    } else {
      const double as = std::exp(sup_exponent * std::log(alpha));
      report.beta_n += 1.0 / as;
      report.beta_tilde_n += 1.0 / (1.0 + as);
    }
  }

  // Analytic verdict for built-in families.
  const auto& ar = schedule.alpha_rule;
  const auto& er = schedule.exponent_rule;
  if (ar.kind == AlphaRule::Kind::custom ||
      er.kind == ExponentRule::Kind::custom) {
    report.verdict = ConvergenceVerdict::numeric_only;
    report.verdict_detail = "custom schedule: partial sums are advisory";
  } else if (exponent_bounded(er)) {
    // Bounded exponents: the method converges iff sum alpha_k^{-1} (weighted)
    // or alpha_k^{-gamma} (fractional) diverges.
    bool divergent = true;
    std::string detail;
    switch (ar.kind) {
      case AlphaRule::Kind::constant:
        detail = "constant alpha: inverse series diverges";
        break;
      case AlphaRule::Kind::geometric:
        detail = "geometric alpha -> 0: inverse series diverges";
        break;
      case AlphaRule::Kind::factorial:
        detail = "factorial alpha: inverse series diverges";
        break;
      case AlphaRule::Kind::polynomial:
        divergent = ar.power <= 1.0;
        detail = divergent ? "polynomial alpha with power <= 1: inverse series diverges"
                           : "polynomial alpha with power > 1: inverse series converges";
        break;
      default:
        break;
    }
    report.verdict = divergent ? ConvergenceVerdict::convergent_method
                               : ConvergenceVerdict::non_convergent_method;
    report.verdict_detail = detail;
  } else {
    // Unbounded exponents: only the factorial alpha decays fast enough that
    // (sum alpha_k^{-1})^{-1} = o(sigma^{r_n + 1}) for every sigma > 0.
    if (ar.kind == AlphaRule::Kind::factorial) {
      report.verdict = ConvergenceVerdict::convergent_method;
      report.verdict_detail =
          "factorial alpha with growing exponents: partial inverse sums "
          "outgrow every sigma^(r_n+1)";
    } else {
      report.verdict = ConvergenceVerdict::non_convergent_method;
      report.verdict_detail =
          "growing exponents without factorial alpha: series terms vanish "
          "geometrically for small sigma";
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Speed comparison.

SpeedComparison compare_speed(const SpectralOperator& op,
                              const ParamSchedule& schedule_a,
                              const ParamSchedule& schedule_b,
                              IterMethod method_a, IterMethod method_b,
                              const Eigen::VectorXd& y, int n_max) {
  schedule_a.validate(method_a);
  schedule_b.validate(method_b);
  require(y.size() == op.rows(), "compare_speed: data dimension mismatch");
  require(n_max >= 1, "compare_speed: n_max must be >= 1");
  require(n_max <= schedule_a.effective_max_iter() &&
              n_max <= schedule_b.effective_max_iter(),
          "compare_speed: n_max exceeds a schedule horizon");

  const SpectralVector yhat{
      (op.u_basis().transpose() * y) / op.norm_scale(), Basis::u};
  // Noise-free data: the truth coefficients follow from yhat = sigma * xhat.
  const Eigen::VectorXd truth = yhat.coeffs.cwiseQuotient(op.sigma());

  SpeedComparison cmp;
  IterationState a = IterationState::zero(op);
  IterationState b = IterationState::zero(op);
  for (int n = 1; n <= n_max; ++n) {
    a = method_a == IterMethod::nsiwt
            ? nsiwt_step(op, a, schedule_a.alpha_at(n), schedule_a.exponent_at(n), yhat)
            : nsift_step(op, a, schedule_a.alpha_at(n), schedule_a.exponent_at(n), yhat);
    b = method_b == IterMethod::nsiwt
            ? nsiwt_step(op, b, schedule_b.alpha_at(n), schedule_b.exponent_at(n), yhat)
            : nsift_step(op, b, schedule_b.alpha_at(n), schedule_b.exponent_at(n), yhat);
    cmp.err_a.push_back((a.coeffs - truth).norm());
    cmp.err_b.push_back((b.coeffs - truth).norm());
    if (cmp.crossover < 0 && cmp.err_a.back() < cmp.err_b.back())
      cmp.crossover = n;
  }
  return cmp;
}

}  // namespace specreg
