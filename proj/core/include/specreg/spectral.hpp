#pragma once

// SVD representation of a discretized compact operator and the spectral-space
// algebra every solver in this library runs on.
//
// A dense matrix A is decomposed into singular triplets (sigma_m, u_m, v_m).
// Singular values are stored divided by sigma_1, so sigma(0) == 1; the
// original sigma_1 is kept in norm_scale so residuals can be reported in the
// units of the input data. All solver mathematics (filters, iterations)
// operates on the normalized spectrum, which makes regularization parameters
// scale-invariant: the methods produce identical solutions for (A, y) and
// (c*A, c*y).
//
//   apply:          K x  = sum_m sigma_m <x, v_m> u_m
//   apply_adjoint:  K* y = sum_m sigma_m <y, u_m> v_m
//   fractional_power_apply:  (K*K)^p x = sum_m (sigma_m^2)^p <x, v_m> v_m
//   make_source_solution:    x = (K*K)^(nu/2) omega, the smoothness class
//                            used by convergence-rate studies.

#include <Eigen/Core>

namespace specreg {

enum class Basis { u, v };

// Whether a vector returned by apply/apply_adjoint is expressed in the
// normalized spectrum (sigma_1 = 1) or rescaled by norm_scale to match the
// units of the original matrix.
enum class Units { normalized, physical };

// Coefficients of a vector in the left (u) or right (v) singular basis of a
// particular operator. The tag is advisory; length must match op.rank().
struct SpectralVector {
  Eigen::VectorXd coeffs;
  Basis basis = Basis::v;
};

// Smoothness class X_{nu,rho}: x = (K*K)^(nu/2) omega with ||omega|| <= rho.
struct SourceCondition {
  double nu;
  double rho = 1.0;
};

class SpectralOperator {
 public:
  // Builds the operator from raw SVD factors with physical singular values.
  // Normalizes by sigma_phys(0). Throws std::invalid_argument on empty or
  // non-positive spectra, wrong dimensions, or non-decreasing ordering.
  static SpectralOperator from_svd(Eigen::MatrixXd u_basis,
                                   Eigen::VectorXd sigma_phys,
                                   Eigen::MatrixXd v_basis);

  // Normalized singular values, non-increasing, sigma(0) == 1.
  const Eigen::VectorXd& sigma() const { return sigma_; }
  // Left singular vectors, rows() x rank().
  const Eigen::MatrixXd& u_basis() const { return u_; }
  // Right singular vectors, cols() x rank().
  const Eigen::MatrixXd& v_basis() const { return v_; }
  // The physical sigma_1 divided out during normalization (1.0 if none).
  double norm_scale() const { return norm_scale_; }

  Eigen::Index rank() const { return sigma_.size(); }
  Eigen::Index rows() const { return u_.rows(); }
  Eigen::Index cols() const { return v_.rows(); }

  // Coefficients <y, u_m> / <x, v_m> of a physical-space vector.
  SpectralVector to_u_coeffs(const Eigen::VectorXd& y) const;
  SpectralVector to_v_coeffs(const Eigen::VectorXd& x) const;
  Eigen::VectorXd from_u_coeffs(const SpectralVector& c) const;
  Eigen::VectorXd from_v_coeffs(const SpectralVector& c) const;

  // Largest deviation of U^T U and V^T V from the identity. Test aid.
  double orthonormality_defect() const;

 private:
  SpectralOperator() = default;

  Eigen::VectorXd sigma_;
  Eigen::MatrixXd u_;
  Eigen::MatrixXd v_;
  double norm_scale_ = 1.0;
};

// Computes the SVD of a dense matrix and keeps every triplet with
// sigma > rel_cutoff * sigma_1. Requires finite entries and
// 0 <= rel_cutoff < 1. Throws std::invalid_argument for an empty matrix and
// for an all-zero matrix ("rank zero"). Exactly symmetric square matrices
// take a symmetric-eigensolver fast path; the result is an SVD either way.
SpectralOperator decompose(const Eigen::MatrixXd& matrix,
                           double rel_cutoff = 1e-14);

// K x, restricted to the retained triplets.
Eigen::VectorXd apply(const SpectralOperator& op, const Eigen::VectorXd& x,
                      Units units = Units::normalized);

// K* y, restricted to the retained triplets.
Eigen::VectorXd apply_adjoint(const SpectralOperator& op,
                              const Eigen::VectorXd& y,
                              Units units = Units::normalized);

// (K*K)^exponent x on the normalized spectrum. exponent >= 0; exponent == 0
// projects onto span{v_m}. Powers are evaluated as exp(p * log(sigma^2)) so
// that huge exponents underflow cleanly to zero instead of producing NaN.
Eigen::VectorXd fractional_power_apply(const SpectralOperator& op,
                                       double exponent,
                                       const Eigen::VectorXd& x);

// Builds x = (K*K)^(nu/2) omega from v-basis coefficients of omega, i.e.
// v-coefficients sigma_m^nu * omega_m. Requires ||omega|| <= rho unless
// rescale is set, in which case omega is scaled down to norm rho first.
// Since sigma <= 1 after normalization, the result satisfies ||x|| <= rho.
Eigen::VectorXd make_source_solution(const SpectralOperator& op,
                                     const SourceCondition& sc,
                                     const SpectralVector& omega_coeffs,
                                     bool rescale = false);

}  // namespace specreg
