#include "specreg/filters.hpp"

#include <cmath>
#include <stdexcept>

#include "specreg/stopping.hpp"

namespace specreg {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// One-step weighted filter t = s^(r+1) / (s^(r+1) + alpha) and its
// complement, both as exact ratios.
struct StepRatio {
  double t;          // F for one step
  double one_minus;  // 1 - F, no cancellation
};

StepRatio weighted_step(double sigma, double alpha, double r) {
  const double p = std::pow(sigma, r + 1.0);  // clean underflow for huge r
  const double den = p + alpha;               // den >= alpha > 0
  return {p / den, alpha / den};
}

StepRatio fractional_step(double sigma, double alpha, double gamma) {
  // t = (s^2 / (s^2 + alpha))^gamma = exp(-gamma * log1p(alpha / s^2)).
  const double g = gamma * std::log1p(alpha / (sigma * sigma));
  return {std::exp(-g), -std::expm1(-g)};
}

// 1 - (1 - t)^n from an exact step ratio; accurate for t anywhere in (0, 1).
double iterated_value(const StepRatio& step, int n) {
  if (step.t < 0.5) return -std::expm1(n * std::log1p(-step.t));
  return -std::expm1(n * std::log(step.one_minus));
}

double iterated_one_minus(const StepRatio& step, int n) {
  return std::exp(n * std::log(step.one_minus));
}

}  // namespace

FilterSpec FilterSpec::classical(double alpha) {
  return {FilterFamily::classical_tikhonov, alpha, 1.0, 1.0, 1};
}
FilterSpec FilterSpec::weighted(double alpha, double r) {
  return {FilterFamily::weighted, alpha, r, 1.0, 1};
}
FilterSpec FilterSpec::fractional(double alpha, double gamma) {
  return {FilterFamily::fractional, alpha, 1.0, gamma, 1};
}
FilterSpec FilterSpec::siwt(double alpha, double r, int n_iter) {
  return {FilterFamily::siwt, alpha, r, 1.0, n_iter};
}
FilterSpec FilterSpec::sift(double alpha, double gamma, int n_iter) {
  return {FilterFamily::sift, alpha, 1.0, gamma, n_iter};
}
FilterSpec FilterSpec::tsvd(double threshold) {
  return {FilterFamily::tsvd_reference, threshold, 1.0, 1.0, 1};
}

void FilterSpec::validate() const {
  require(std::isfinite(alpha) && alpha > 0.0, "FilterSpec: alpha must be > 0");
  switch (family) {
    case FilterFamily::weighted:
    case FilterFamily::siwt:
      require(std::isfinite(r) && r >= 0.0, "FilterSpec: r must be >= 0");
      break;
    case FilterFamily::fractional:
    case FilterFamily::sift:
      require(std::isfinite(gamma) && gamma >= 0.5,
              "FilterSpec: gamma must be >= 1/2");
      break;
    default:
      break;
  }
  if (family == FilterFamily::siwt || family == FilterFamily::sift)
    require(n_iter >= 1, "FilterSpec: n_iter must be >= 1");
}

double filter_value(const FilterSpec& spec, double sigma) {
  require(sigma > 0.0, "filter_value: sigma must be positive");
  spec.validate();
  switch (spec.family) {
    case FilterFamily::classical_tikhonov: {
      const double s2 = sigma * sigma;
      return s2 / (s2 + spec.alpha);
    }
    case FilterFamily::weighted:
      return weighted_step(sigma, spec.alpha, spec.r).t;
    case FilterFamily::fractional:
      return fractional_step(sigma, spec.alpha, spec.gamma).t;
    case FilterFamily::siwt:
      return iterated_value(weighted_step(sigma, spec.alpha, spec.r),
                            spec.n_iter);
    case FilterFamily::sift:
      return iterated_value(fractional_step(sigma, spec.alpha, spec.gamma),
                            spec.n_iter);
    case FilterFamily::tsvd_reference:
      return sigma >= spec.alpha ? 1.0 : 0.0;
  }
  throw std::logic_error("filter_value: unknown family");
}

double one_minus_filter(const FilterSpec& spec, double sigma) {
  require(sigma > 0.0, "one_minus_filter: sigma must be positive");
  spec.validate();
  switch (spec.family) {
    case FilterFamily::classical_tikhonov: {
      const double s2 = sigma * sigma;
      return spec.alpha / (s2 + spec.alpha);
    }
    case FilterFamily::weighted:
      return weighted_step(sigma, spec.alpha, spec.r).one_minus;
    case FilterFamily::fractional:
      return fractional_step(sigma, spec.alpha, spec.gamma).one_minus;
    case FilterFamily::siwt:
      return iterated_one_minus(weighted_step(sigma, spec.alpha, spec.r),
                                spec.n_iter);
    case FilterFamily::sift:
      return iterated_one_minus(
          fractional_step(sigma, spec.alpha, spec.gamma), spec.n_iter);
    case FilterFamily::tsvd_reference:
      return sigma >= spec.alpha ? 0.0 : 1.0;
  }
  throw std::logic_error("one_minus_filter: unknown family");
}

namespace {

// F(sigma) / sigma without forming F and 1/sigma separately where a direct
// expression exists.
double solve_gain(const FilterSpec& spec, double sigma) {
  switch (spec.family) {
    case FilterFamily::classical_tikhonov:
      return sigma / (sigma * sigma + spec.alpha);
    case FilterFamily::weighted:
      return std::pow(sigma, spec.r) /
             (std::pow(sigma, spec.r + 1.0) + spec.alpha);
    case FilterFamily::fractional:
      // sigma^(2g-1) / (sigma^2 + alpha)^g in the log domain; the combined
      // exponent stays bounded where either factor alone would underflow.
      return std::exp((2.0 * spec.gamma - 1.0) * std::log(sigma) -
                      spec.gamma * std::log(sigma * sigma + spec.alpha));
    case FilterFamily::siwt:
    case FilterFamily::sift:
      // F is evaluated with full relative accuracy even when tiny, so the
      // quotient keeps it.
      return filter_value(spec, sigma) / sigma;
    case FilterFamily::tsvd_reference:
      return sigma >= spec.alpha ? 1.0 / sigma : 0.0;
  }
  throw std::logic_error("solve_gain: unknown family");
}

}  // namespace

Eigen::VectorXd filter_solve(const SpectralOperator& op, const FilterSpec& spec,
                             const Eigen::VectorXd& y) {
  require(y.size() == op.rows(), "filter_solve: dimension mismatch");
  spec.validate();

  const Eigen::VectorXd yhat = op.u_basis().transpose() * y;
  Eigen::VectorXd c(op.rank());
  for (Eigen::Index m = 0; m < c.size(); ++m)
    c(m) = solve_gain(spec, op.sigma()(m)) * yhat(m) / op.norm_scale();
  return op.v_basis() * c;
}

QualificationReport filter_qualification_check(const FilterSpec& spec,
                                               double nu,
                                               std::span<const double> alpha_grid) {
  require(nu > 0.0, "filter_qualification_check: nu must be positive");
  require(alpha_grid.size() >= 4,
          "filter_qualification_check: need at least 4 alphas");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    require(alpha_grid[i] > 0.0, "filter_qualification_check: alphas must be positive");
    if (i > 0)
      require(alpha_grid[i] < alpha_grid[i - 1],
              "filter_qualification_check: alphas must be strictly descending");
  }

  constexpr int kGridPoints = 2000;
  constexpr double kSigmaMin = 1e-8;
  const double step = std::log(1.0 / kSigmaMin) / (kGridPoints - 1);

  QualificationReport report;
  report.nu = nu;
  report.alphas.assign(alpha_grid.begin(), alpha_grid.end());
  report.sup_values.reserve(alpha_grid.size());

  FilterSpec probe = spec;
  for (double alpha : alpha_grid) {
    probe.alpha = alpha;
    double sup = 0.0;
    for (int k = 0; k < kGridPoints; ++k) {
      const double sigma = std::exp(std::log(kSigmaMin) + k * step);
      const double v = one_minus_filter(probe, sigma) * std::pow(sigma, nu);
      sup = std::max(sup, v);
    }
    report.sup_values.push_back(sup);
  }

  std::vector<std::pair<double, double>> points;
  points.reserve(alpha_grid.size());
  for (std::size_t i = 0; i < alpha_grid.size(); ++i)
    points.emplace_back(report.alphas[i], report.sup_values[i]);
  const RateFit fit = rate_fit(points);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.r_squared = fit.r_squared;
  return report;
}

}  // namespace specreg
