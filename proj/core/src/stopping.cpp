#include "specreg/stopping.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace specreg {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Uniform in (0, 1] from one 64-bit word: 53 high bits, shifted off zero.
double uniform_from_bits(std::uint64_t x) {
  return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

Eigen::VectorXd gaussian_vector(std::uint64_t seed, Eigen::Index n) {
  require(n >= 0, "gaussian_vector: negative length");
  std::mt19937_64 gen(seed);
  Eigen::VectorXd z(n);
  Eigen::Index i = 0;
  while (i < n) {
    const double u1 = uniform_from_bits(gen());
    const double u2 = uniform_from_bits(gen());
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    z(i++) = radius * std::cos(angle);
    if (i < n) z(i++) = radius * std::sin(angle);
  }
  return z;
}

std::pair<Eigen::VectorXd, double> add_noise(const Eigen::VectorXd& y,
                                             const NoiseModel& model) {
  require(model.xi >= 0.0, "add_noise: xi must be >= 0");
  if (model.xi == 0.0) return {y, 0.0};

  const double ynorm = y.norm();
  require(ynorm > 0.0, "add_noise: zero data with positive noise level");

  Eigen::VectorXd e = gaussian_vector(model.seed, y.size());
  const double delta = model.xi * ynorm;
  e *= delta / e.norm();
  return {y + e, delta};
}

StopRule StopRule::discrepancy(double tau, double delta) {
  require(tau > 1.0, "StopRule: tau must be > 1");
  require(delta >= 0.0, "StopRule: delta must be >= 0");
  return {Kind::discrepancy, tau, delta};
}

StopRule StopRule::max_only() { return {Kind::max_only, 1.01, 0.0}; }

bool discrepancy_stop(double residual_norm, const StopRule& rule) {
  require(rule.kind == StopRule::Kind::discrepancy,
          "discrepancy_stop: rule is not a discrepancy rule");
  return residual_norm <= rule.tau * rule.delta;
}

double relative_error(const Eigen::VectorXd& x_hat,
                      const Eigen::VectorXd& x_true) {
  require(x_hat.size() == x_true.size(), "relative_error: dimension mismatch");
  const double tnorm = x_true.norm();
  require(tnorm > 0.0, "relative_error: zero truth");
  return (x_hat - x_true).norm() / tnorm;
}

RateFit rate_fit(std::span<const std::pair<double, double>> points) {
  require(points.size() >= 4, "rate_fit: need at least 4 points");
  const auto n = static_cast<double>(points.size());

  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  double prev_delta = std::numeric_limits<double>::infinity();
  for (const auto& [delta, error] : points) {
    require(delta > 0.0 && delta < prev_delta,
            "rate_fit: deltas must be positive and strictly decreasing");
    require(error > 0.0, "rate_fit: errors must be positive");
    prev_delta = delta;
    const double x = std::log(delta);
    const double y = std::log(error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }

  const double vxx = sxx - sx * sx / n;
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;
  require(vxx > 0.0, "rate_fit: degenerate delta grid");

  RateFit fit;
  fit.slope = vxy / vxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r_squared = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
  return fit;
}

}  // namespace specreg
