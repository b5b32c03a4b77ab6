#pragma once

// Noise injection with a prescribed relative level, the discrepancy
// principle, and error/rate metrics.
//
// Noise stream (frozen for cross-platform reproducibility):
//   generator  std::mt19937_64 seeded directly with the 64-bit seed
//   uniforms   u = (x >> 11 + 1) * 2^-53  in (0, 1]
//   gaussians  Box-Muller pairs: sqrt(-2 ln u1) * {cos, sin}(2 pi u2)
// mt19937_64 output is fully specified by the standard, so a (seed, length)
// pair yields bit-identical noise everywhere.

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace specreg {

struct NoiseModel {
  double xi = 0.0;        // relative noise level ||e|| / ||y||
  std::uint64_t seed = 0;
};

// Deterministic standard-normal vector from the frozen stream above.
Eigen::VectorXd gaussian_vector(std::uint64_t seed, Eigen::Index n);

// y_delta = y + e with ||e|| = xi * ||y|| exactly (the raw draw is rescaled).
// Returns (y_delta, delta) with delta = ||e||. xi == 0 returns y unchanged.
// Throws std::invalid_argument for xi > 0 with ||y|| == 0 or xi < 0.
std::pair<Eigen::VectorXd, double> add_noise(const Eigen::VectorXd& y,
                                             const NoiseModel& model);

struct StopRule {
  enum class Kind { discrepancy, max_only };
  Kind kind = Kind::max_only;
  double tau = 1.01;   // > 1
  double delta = 0.0;  // absolute noise norm, physical units

  static StopRule discrepancy(double tau, double delta);
  static StopRule max_only();
};

// true iff residual_norm <= tau * delta (inclusive). Requires a discrepancy
// rule.
bool discrepancy_stop(double residual_norm, const StopRule& rule);

// ||x_hat - x_true|| / ||x_true||. Throws on zero truth.
double relative_error(const Eigen::VectorXd& x_hat,
                      const Eigen::VectorXd& x_true);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least-squares fit of log(error) against log(delta). Requires >= 4 points,
// strictly decreasing positive deltas and positive errors.
RateFit rate_fit(std::span<const std::pair<double, double>> points);

}  // namespace specreg
